#include "lqg/config.hpp"

int main(int argc, char** argv) { return lqg::run_cli(argc, argv); }

#pragma once

#include <string>

#include "lqg/experiments.hpp"

namespace lqg {

struct RunConfig {
  TrialConfig trial;
  std::string out_dir = "out";
  std::string format = "json";  // json | csv | plotdata
};

// Parses INI-style "key = value" sections. Unknown sections/keys, type
// mismatches and range violations raise std::invalid_argument carrying the
// line number of the first offending line. Missing keys fall back to the
// defaults echoed by canonical_config.
RunConfig parse_config(const std::string& text);

// Fully resolved, deterministic echo of a configuration (itself parseable).
std::string canonical_config(const RunConfig& rc);

// %.17g rendering shared by config echo, CSV and plot files.
std::string num17(double v);

int run_cli(int argc, char** argv);

}  // namespace lqg

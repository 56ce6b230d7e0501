#include "lqg/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace lqg {

std::string num17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

[[noreturn]] void fail(int line, const std::string& msg) {
  throw std::invalid_argument("config line " + std::to_string(line) + ": " + msg);
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& v, int line, const std::string& key) {
  char* end = nullptr;
  double d = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0' || !std::isfinite(d))
    fail(line, "expected a number for '" + key + "', got '" + v + "'");
  return d;
}

long to_long(const std::string& v, int line, const std::string& key) {
  char* end = nullptr;
  long n = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    fail(line, "expected an integer for '" + key + "', got '" + v + "'");
  return n;
}

uint64_t to_u64(const std::string& v, int line, const std::string& key) {
  char* end = nullptr;
  unsigned long long n = std::strtoull(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0')
    fail(line, "expected an unsigned integer for '" + key + "', got '" + v + "'");
  return n;
}

bool to_bool(const std::string& v, int line, const std::string& key) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  fail(line, "expected true/false for '" + key + "', got '" + v + "'");
}

std::vector<std::string> split_ws(const std::string& v) {
  std::vector<std::string> out;
  std::istringstream is(v);
  std::string tok;
  while (is >> tok) out.push_back(tok);
  return out;
}

std::vector<double> to_doubles(const std::string& v, int line, const std::string& key) {
  std::vector<double> out;
  for (const auto& t : split_ws(v)) out.push_back(to_double(t, line, key));
  if (out.empty()) fail(line, "empty list for '" + key + "'");
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig rc;
  TrialConfig& tc = rc.trial;

  // raw params accumulate; LqgParams::make runs after the scan
  double gamma = std::sqrt(8.0 / 3.0), gamma_prime = gamma;
  std::optional<double> d_gamma;

  // defaults: a small, fully valid experiment (fast enough for smoke runs)
  tc.grid = {257, 129, 0.015625, -2.0};
  tc.epsilon = 0.03125;
  tc.gmc_epsilon = 0.03125;
  tc.levels = {2, 3};
  tc.intervals = {{-0.5, -0.25}, {0.25, 0.5}};

  std::istringstream is(text);
  std::string raw, section;
  int line = 0;
  bool explicit_levels = false, explicit_intervals = false;
  while (std::getline(is, raw)) {
    ++line;
    std::string s = trim(raw);
    if (s.empty() || s[0] == '#' || s[0] == ';') continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail(line, "unterminated section header");
      section = trim(s.substr(1, s.size() - 2));
      static const char* known[] = {"params",     "grid",     "metric", "gmc",
                                    "levels",     "intervals", "arc",    "references",
                                    "symmetry",   "experiment", "output"};
      bool ok = false;
      for (const char* k : known) ok = ok || section == k;
      if (!ok) fail(line, "unknown section [" + section + "]");
      continue;
    }
    size_t eq = s.find('=');
    if (eq == std::string::npos) fail(line, "expected 'key = value'");
    std::string key = trim(s.substr(0, eq));
    std::string val = trim(s.substr(eq + 1));
    if (key.empty()) fail(line, "missing key");
    if (val.empty()) fail(line, "missing value for '" + key + "'");
    if (section.empty()) fail(line, "key '" + key + "' outside any [section]");

    auto unknown = [&]() { fail(line, "unknown key '" + key + "' in [" + section + "]"); };

    if (section == "params") {
      if (key == "gamma") gamma = to_double(val, line, key);
      else if (key == "gamma_prime") gamma_prime = to_double(val, line, key);
      else if (key == "d_gamma") d_gamma = to_double(val, line, key);
      else if (key == "alpha1") tc.coal.alpha1 = to_double(val, line, key);
      else if (key == "alpha2") tc.coal.alpha2 = to_double(val, line, key);
      else if (key == "annulus_ratio") tc.coal.annulus_ratio = to_double(val, line, key);
      else unknown();
    } else if (section == "grid") {
      if (key == "nx") tc.grid.nx = static_cast<int>(to_long(val, line, key));
      else if (key == "ny") tc.grid.ny = static_cast<int>(to_long(val, line, key));
      else if (key == "spacing") tc.grid.spacing = to_double(val, line, key);
      else if (key == "origin_x") tc.grid.origin_x = to_double(val, line, key);
      else if (key == "method") {
        if (val == "exact") tc.method = SampleMethod::exact;
        else if (val == "hierarchical") tc.method = SampleMethod::hierarchical;
        else fail(line, "method must be exact or hierarchical");
      } else unknown();
    } else if (section == "metric") {
      if (key == "epsilon") tc.epsilon = to_double(val, line, key);
      else if (key == "a_eps") tc.a_eps = to_double(val, line, key);
      else unknown();
    } else if (section == "gmc") {
      if (key == "epsilon") tc.gmc_epsilon = to_double(val, line, key);
      else if (key == "scales") tc.gmc_scales = to_doubles(val, line, key);
      else unknown();
    } else if (section == "levels") {
      if (key == "n") {
        if (!explicit_levels) {
          tc.levels.clear();
          explicit_levels = true;
        }
        for (double d : to_doubles(val, line, key)) {
          if (d != std::floor(d)) fail(line, "levels must be integers");
          tc.levels.push_back(static_cast<int>(d));
        }
      } else unknown();
    } else if (section == "intervals") {
      if (key == "interval") {
        if (!explicit_intervals) {
          tc.intervals.clear();
          explicit_intervals = true;
        }
        auto d = to_doubles(val, line, key);
        if (d.size() != 2) fail(line, "interval needs exactly 'lo hi'");
        tc.intervals.push_back({d[0], d[1]});
      } else unknown();
    } else if (section == "arc") {
      if (key == "radius") tc.arc.radius = to_double(val, line, key);
      else if (key == "deg_lo") tc.arc.deg_lo = to_double(val, line, key);
      else if (key == "deg_hi") tc.arc.deg_hi = to_double(val, line, key);
      else unknown();
    } else if (section == "references") {
      if (key == "z1" || key == "z2") {
        auto d = to_doubles(val, line, key);
        if (d.size() != 2) fail(line, "reference point needs 'x y'");
        (key == "z1" ? tc.z1 : tc.z2) = cplx(d[0], d[1]);
      } else unknown();
    } else if (section == "symmetry") {
      if (key == "x0") tc.sym_x0 = to_double(val, line, key);
      else if (key == "r") tc.sym_r = to_double(val, line, key);
      else if (key == "len") tc.sym_len = to_double(val, line, key);
      else unknown();
    } else if (section == "experiment") {
      if (key == "trials") tc.trials = static_cast<int>(to_long(val, line, key));
      else if (key == "master_seed") tc.master_seed = to_u64(val, line, key);
      else if (key == "weyl_check") tc.weyl_check = to_bool(val, line, key);
      else if (key == "restricted_seps") tc.restricted_seps = to_doubles(val, line, key);
      else unknown();
    } else if (section == "output") {
      if (key == "dir") rc.out_dir = val;
      else if (key == "format") {
        if (val != "json" && val != "csv" && val != "plotdata")
          fail(line, "format must be json, csv or plotdata");
        rc.format = val;
      } else unknown();
    }
  }

  tc.params = LqgParams::make(gamma, gamma_prime, d_gamma);  // range-checks
  if (!check_alpha(tc.coal, tc.params))
    throw std::invalid_argument(
        "config: alpha1/alpha2 violate the good-point moment constraint "
        "(need 0 < alpha1 < alpha2 < 1 and (1-alpha2)*e - alpha2*psi > 0)");
  return rc;
}

std::string canonical_config(const RunConfig& rc) {
  const TrialConfig& tc = rc.trial;
  std::ostringstream o;
  o << "[params]\n";
  o << "gamma = " << num17(tc.params.gamma) << "\n";
  o << "gamma_prime = " << num17(tc.params.gamma_prime) << "\n";
  o << "d_gamma = " << num17(tc.params.d_gamma) << "\n";
  o << "alpha1 = " << num17(tc.coal.alpha1) << "\n";
  o << "alpha2 = " << num17(tc.coal.alpha2) << "\n";
  o << "annulus_ratio = " << num17(tc.coal.annulus_ratio) << "\n";
  o << "[grid]\n";
  o << "nx = " << tc.grid.nx << "\n";
  o << "ny = " << tc.grid.ny << "\n";
  o << "spacing = " << num17(tc.grid.spacing) << "\n";
  o << "origin_x = " << num17(tc.grid.origin_x) << "\n";
  o << "method = " << (tc.method == SampleMethod::exact ? "exact" : "hierarchical") << "\n";
  o << "[metric]\n";
  o << "epsilon = " << num17(tc.epsilon) << "\n";
  o << "a_eps = " << num17(tc.a_eps) << "\n";
  o << "[gmc]\n";
  o << "epsilon = " << num17(tc.gmc_epsilon) << "\n";
  if (!tc.gmc_scales.empty()) {
    o << "scales =";
    for (double s : tc.gmc_scales) o << " " << num17(s);
    o << "\n";
  }
  o << "[levels]\n";
  o << "n =";
  for (int n : tc.levels) o << " " << n;
  o << "\n";
  o << "[intervals]\n";
  for (const auto& I : tc.intervals)
    o << "interval = " << num17(I.lo) << " " << num17(I.hi) << "\n";
  o << "[arc]\n";
  o << "radius = " << num17(tc.arc.radius) << "\n";
  o << "deg_lo = " << num17(tc.arc.deg_lo) << "\n";
  o << "deg_hi = " << num17(tc.arc.deg_hi) << "\n";
  o << "[references]\n";
  o << "z1 = " << num17(tc.z1.real()) << " " << num17(tc.z1.imag()) << "\n";
  o << "z2 = " << num17(tc.z2.real()) << " " << num17(tc.z2.imag()) << "\n";
  o << "[symmetry]\n";
  o << "x0 = " << num17(tc.sym_x0) << "\n";
  o << "r = " << num17(tc.sym_r) << "\n";
  o << "len = " << num17(tc.sym_len) << "\n";
  o << "[experiment]\n";
  o << "trials = " << tc.trials << "\n";
  o << "master_seed = " << tc.master_seed << "\n";
  o << "weyl_check = " << (tc.weyl_check ? "true" : "false") << "\n";
  if (!tc.restricted_seps.empty()) {
    o << "restricted_seps =";
    for (double s : tc.restricted_seps) o << " " << num17(s);
    o << "\n";
  }
  o << "[output]\n";
  o << "dir = " << rc.out_dir << "\n";
  o << "format = " << rc.format << "\n";
  return o.str();
}

}  // namespace lqg

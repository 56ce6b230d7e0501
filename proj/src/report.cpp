#include "lqg/report.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>

#include "lqg/config.hpp"

namespace lqg {

using nlohmann::ordered_json;

ordered_json summary_to_json(const ExperimentSummary& s) {
  ordered_json j;
  j["config_echo"] = s.config_echo;
  j["seed"] = s.seed;
  j["trials"] = s.trials;
  j["kappa"] = {{"mean", s.kappa.mean},
                {"stderr", s.kappa.stderr_},
                {"excluded", s.kappa.excluded}};
  j["slopes"] = ordered_json::array();
  for (const auto& r : s.slopes)
    j["slopes"].push_back({{"name", r.name},
                           {"target", r.target},
                           {"estimate", r.estimate},
                           {"stderr", r.stderr_}});
  ordered_json per_n = ordered_json::array();
  for (const auto& st : s.ratio.per_n)
    per_n.push_back({{"n", st.n}, {"correlation", st.correlation}, {"cv", st.cv}});
  j["ratio_test"] = {{"per_n", per_n}};
  j["pass"] = ordered_json::array();
  for (const auto& p : s.pass) j["pass"].push_back({{"name", p.name}, {"pass", p.pass}});
  return j;
}

std::string render_json(const ordered_json& j) { return j.dump(2) + "\n"; }

namespace {

void flatten(const ordered_json& j, const std::string& path, std::string& out) {
  auto emit = [&](const char* type, const std::string& value) {
    out += path.empty() ? "." : path;
    out += ',';
    out += type;
    out += ',';
    out += value;
    out += '\n';
  };
  switch (j.type()) {
    case ordered_json::value_t::object:
      if (j.empty()) {
        emit("obj0", "");
        return;
      }
      for (auto it = j.begin(); it != j.end(); ++it)
        flatten(it.value(), path.empty() ? it.key() : path + "." + it.key(), out);
      return;
    case ordered_json::value_t::array:
      if (j.empty()) {
        emit("arr0", "");
        return;
      }
      for (size_t i = 0; i < j.size(); ++i)
        flatten(j[i], (path.empty() ? "" : path + ".") + std::to_string(i), out);
      return;
    case ordered_json::value_t::string: {
      std::string q = "\"";
      for (char c : j.get<std::string>()) {
        q += c;
        if (c == '"') q += '"';
      }
      q += '"';
      emit("str", q);
      return;
    }
    case ordered_json::value_t::boolean:
      emit("bool", j.get<bool>() ? "true" : "false");
      return;
    case ordered_json::value_t::number_unsigned:
      emit("u64", std::to_string(j.get<uint64_t>()));
      return;
    case ordered_json::value_t::number_integer:
      emit("i64", std::to_string(j.get<int64_t>()));
      return;
    case ordered_json::value_t::number_float:
      emit("f64", num17(j.get<double>()));
      return;
    default:
      emit("null", "");
      return;
  }
}

bool all_digits(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s) {
    if (c < '0' || c > '9') return false;
  }
  return true;
}

void insert_path(ordered_json& root, const std::string& path, ordered_json leaf) {
  if (path == ".") {
    root = std::move(leaf);
    return;
  }
  std::vector<std::string> seg;
  size_t a = 0;
  while (a <= path.size()) {
    size_t b = path.find('.', a);
    if (b == std::string::npos) b = path.size();
    seg.push_back(path.substr(a, b - a));
    a = b + 1;
  }
  ordered_json* cur = &root;
  for (size_t k = 0; k < seg.size(); ++k) {
    bool last = k + 1 == seg.size();
    if (all_digits(seg[k])) {
      size_t idx = std::stoul(seg[k]);
      if (!cur->is_array()) *cur = ordered_json::array();
      while (cur->size() <= idx) cur->push_back(nullptr);
      if (last)
        (*cur)[idx] = std::move(leaf);
      else
        cur = &(*cur)[idx];
    } else {
      if (!cur->is_object()) *cur = ordered_json::object();
      if (last)
        (*cur)[seg[k]] = std::move(leaf);
      else
        cur = &(*cur)[seg[k]];
    }
  }
}

}  // namespace

std::string csv_of_json(const ordered_json& j) {
  std::string out = "path,type,value\n";
  flatten(j, "", out);
  return out;
}

ordered_json json_of_csv(const std::string& csv) {
  ordered_json root;
  size_t pos = 0;
  const size_t n = csv.size();
  auto read_until = [&](char stop) {
    std::string tok;
    while (pos < n && csv[pos] != stop) tok += csv[pos++];
    if (pos < n) ++pos;  // consume stop
    return tok;
  };
  std::string header = read_until('\n');
  if (header != "path,type,value")
    throw std::invalid_argument("csv: missing 'path,type,value' header");
  while (pos < n) {
    if (csv[pos] == '\n') {
      ++pos;
      continue;
    }
    std::string path = read_until(',');
    std::string type = read_until(',');
    std::string value;
    if (pos < n && csv[pos] == '"') {
      ++pos;
      for (;;) {
        if (pos >= n) throw std::invalid_argument("csv: unterminated quoted value");
        char c = csv[pos++];
        if (c == '"') {
          if (pos < n && csv[pos] == '"') {
            value += '"';
            ++pos;
          } else {
            break;
          }
        } else {
          value += c;
        }
      }
      if (pos < n && csv[pos] == '\n') ++pos;
    } else {
      value = read_until('\n');
    }
    ordered_json leaf;
    if (type == "str") leaf = value;
    else if (type == "bool") leaf = (value == "true");
    else if (type == "u64") leaf = static_cast<uint64_t>(std::stoull(value));
    else if (type == "i64") leaf = static_cast<int64_t>(std::stoll(value));
    else if (type == "f64") leaf = std::strtod(value.c_str(), nullptr);
    else if (type == "null") leaf = nullptr;
    else if (type == "arr0") leaf = ordered_json::array();
    else if (type == "obj0") leaf = ordered_json::object();
    else throw std::invalid_argument("csv: unknown type tag '" + type + "'");
    insert_path(root, path, std::move(leaf));
  }
  return root;
}

std::vector<std::pair<std::string, std::string>> plotdata_files(const ExperimentSummary& s) {
  std::vector<std::pair<std::string, std::string>> files;
  for (size_t k = 0; k < s.levels.size(); ++k) {
    int n = s.levels[k];
    std::string body = "# x y yerr\n";
    const LevelStat* st = nullptr;
    for (const auto& cand : s.ratio.per_n)
      if (cand.n == n) st = &cand;
    if (st && !st->median_ratio.empty()) {
      for (size_t j = 0; j < st->median_ratio.size(); ++j)
        body += std::to_string(j) + " " + num17(st->median_ratio[j]) + " 0\n";
      files.emplace_back("ratio_n" + std::to_string(n) + ".dat", body);
    } else {
      double yerr = (k > 0 && k - 1 < s.nongood.diff_stderr.size())
                        ? s.nongood.diff_stderr[k - 1]
                        : 0.0;
      body += std::to_string(n) + " " +
              num17(k < s.nongood.mean.size() ? s.nongood.mean[k] : 0.0) + " " + num17(yerr) +
              "\n";
      files.emplace_back("nongood_n" + std::to_string(n) + ".dat", body);
    }
  }
  return files;
}

void emit_report(const ExperimentSummary& s, const std::string& format,
                 const std::filesystem::path& dir) {
  if (s.trials <= 0) throw std::invalid_argument("emit_report: empty summary");
  if (format != "json" && format != "csv" && format != "plotdata")
    throw std::invalid_argument("emit_report: unknown format '" + format + "'");
  std::filesystem::create_directories(dir);
  auto put = [&](const std::string& name, const std::string& content) {
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw std::runtime_error("emit_report: cannot write " + (dir / name).string());
    os << content;
  };
  ordered_json j = summary_to_json(s);
  put("summary.json", render_json(j));
  if (format == "csv") put("summary.csv", csv_of_json(j));
  if (format == "plotdata")
    for (const auto& [name, content] : plotdata_files(s)) put(name, content);
}

std::string sha256_hex(const void* data, size_t len) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int mdlen = 0;
  if (EVP_Digest(data, len, md, &mdlen, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("sha256 failure");
  static const char hex[] = "0123456789abcdef";
  std::string out(mdlen * 2, '0');
  for (unsigned i = 0; i < mdlen; ++i) {
    out[2 * i] = hex[md[i] >> 4];
    out[2 * i + 1] = hex[md[i] & 15];
  }
  return out;
}

void write_manifest(const std::filesystem::path& dir) {
  std::vector<std::string> names;
  for (const auto& e : std::filesystem::directory_iterator(dir))
    if (e.is_regular_file() && e.path().filename() != "manifest.json")
      names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  ordered_json files = ordered_json::array();
  for (const auto& name : names) {
    std::ifstream is(dir / name, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    files.push_back({{"name", name},
                     {"sha256", sha256_hex(bytes.data(), bytes.size())},
                     {"bytes", bytes.size()}});
  }
  ordered_json m;
  m["files"] = files;
  std::ofstream os(dir / "manifest.json", std::ios::binary);
  os << render_json(m);
}

}  // namespace lqg

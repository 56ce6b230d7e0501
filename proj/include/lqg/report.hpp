#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lqg/experiments.hpp"

namespace lqg {

// Summary rendered to the fixed schema
//   {config_echo, seed, trials, kappa:{mean,stderr,excluded},
//    slopes:[{name,target,estimate,stderr}],
//    ratio_test:{per_n:[{n,correlation,cv}]}, pass:[{name,pass}]}.
nlohmann::ordered_json summary_to_json(const ExperimentSummary& s);

// 2-space indentation plus trailing newline; byte-deterministic.
std::string render_json(const nlohmann::ordered_json& j);

// Flat "path,type,value" table carrying every leaf of the JSON document.
// csv_of_json and json_of_csv are exact inverses (full numeric precision).
std::string csv_of_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json json_of_csv(const std::string& csv);

// One (filename, content) series per tested level, rows "x y yerr".
std::vector<std::pair<std::string, std::string>> plotdata_files(const ExperimentSummary& s);

// Writes summary.json (always) plus summary.csv / *.dat depending on format.
// Rejects empty summaries and unknown formats.
void emit_report(const ExperimentSummary& s, const std::string& format,
                 const std::filesystem::path& dir);

std::string sha256_hex(const void* data, size_t len);

// manifest.json: {"files":[{name,sha256,bytes}…]} over the directory's regular
// files (manifest itself excluded), sorted by name.
void write_manifest(const std::filesystem::path& dir);

}  // namespace lqg

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "lqg/config.hpp"
#include "lqg/report.hpp"

namespace lqg {

namespace {

namespace fs = std::filesystem;

const char* kUsage =
    "usage: lqglab <subcommand> [--config PATH] [--seed U64] [--out DIR]\n"
    "              [--trials N] [--format json|csv|plotdata] [--field PATH]\n"
    "subcommands:\n"
    "  sample-field   draw one normalized field and save it as field.lqgf\n"
    "  metric         geodesic trees (far arc + both references) from a field\n"
    "  profile        boundary distance profile from the first reference\n"
    "  gmc            boundary measure masses per configured interval\n"
    "  variation      variation-measure atoms (all three flavors)\n"
    "  coalescence    coalescence records per dyadic pair\n"
    "  experiment     full Monte-Carlo run with summary report\n"
    "  report         re-emit an existing summary.json in another format\n"
    "environment: LQGLAB_THREADS sets the worker count (results unaffected)\n";

int workers_from_env() {
  const char* env = std::getenv("LQGLAB_THREADS");
  if (!env || !*env) return 1;
  char* end = nullptr;
  long n = std::strtol(env, &end, 10);
  if (end == env || *end != '\0' || n < 1 || n > 256)
    throw std::invalid_argument("LQGLAB_THREADS must be an integer in [1,256]");
  return static_cast<int>(n);
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void put_file(const fs::path& p, const std::string& content) {
  std::ofstream os(p, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write " + p.string());
  os << content;
}

std::string gmc_csv(const std::vector<TrialDetail::GmcRow>& rows) {
  std::string out = "trial,interval_lo,interval_hi,epsilon,mass\n";
  for (const auto& r : rows)
    out += std::to_string(r.trial) + "," + num17(r.lo) + "," + num17(r.hi) + "," +
           num17(r.epsilon) + "," + num17(r.mass) + "\n";
  return out;
}

std::string variation_csv(const std::vector<TrialDetail::VarRow>& rows) {
  std::string out = "trial,n,u,atom_mass,flavor,good_flag\n";
  for (const auto& r : rows)
    out += std::to_string(r.trial) + "," + std::to_string(r.n) + "," + num17(r.u) + "," +
           num17(r.atom) + "," + r.flavor + "," + std::to_string(r.good) + "\n";
  return out;
}

std::string coalescence_csv(const std::vector<TrialDetail::CoalRow>& rows) {
  std::string out = "trial,n,u,coalesced,radius,good,busemann_diff\n";
  for (const auto& r : rows)
    out += std::to_string(r.trial) + "," + std::to_string(r.n) + "," + num17(r.u) + "," +
           std::to_string(r.coalesced) + "," + num17(r.radius) + "," + std::to_string(r.good) +
           "," + num17(r.busemann) + "\n";
  return out;
}

FieldGrid field_for(const RunConfig& rc, const std::string& field_path) {
  if (!field_path.empty()) return load_field(field_path);
  GridSampler sampler(rc.trial.grid, rc.trial.method);
  return normalize(sampler.draw(mix_seed(rc.trial.master_seed, 0)));
}

}  // namespace

int run_cli(int argc, char** argv) {
  static const std::vector<std::string> kSubs = {"sample-field", "metric",      "profile",
                                                 "gmc",          "variation",   "coalescence",
                                                 "experiment",   "report"};
  if (argc < 2) {
    std::cerr << kUsage;
    return 2;
  }
  std::string sub = argv[1];
  if (sub == "-h" || sub == "--help") {
    std::cout << kUsage;
    return 0;
  }
  if (std::find(kSubs.begin(), kSubs.end(), sub) == kSubs.end()) {
    std::cerr << "error: unknown subcommand '" << sub << "'\n" << kUsage;
    return 2;
  }

  std::string config_path, out_dir, format, field_path;
  uint64_t seed = 0;
  int trials = 0;
  bool have_seed = false, have_trials = false;

  CLI::App app{"boundary Liouville geometry laboratory"};
  app.add_option("--config", config_path, "config file (INI sections)");
  app.add_option("--seed", seed, "master seed override")->each([&](const std::string&) {
    have_seed = true;
  });
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--trials", trials, "trial count override")->each([&](const std::string&) {
    have_trials = true;
  });
  app.add_option("--format", format, "json | csv | plotdata")
      ->check(CLI::IsMember({"json", "csv", "plotdata"}));
  app.add_option("--field", field_path, "previously saved field (.lqgf)");

  try {
    app.parse(argc - 1, argv + 1);
  } catch (const CLI::CallForHelp&) {
    std::cout << kUsage;
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    RunConfig rc = config_path.empty() ? parse_config("") : parse_config(slurp(config_path));
    if (have_seed) rc.trial.master_seed = seed;
    if (have_trials) rc.trial.trials = trials;
    if (!out_dir.empty()) rc.out_dir = out_dir;
    if (!format.empty()) rc.format = format;
    const fs::path out = rc.out_dir;
    fs::create_directories(out);

    if (sub == "sample-field") {
      rc.trial.validate();
      GridSampler sampler(rc.trial.grid, rc.trial.method);
      save_field(normalize(sampler.draw(mix_seed(rc.trial.master_seed, 0))),
                 (out / "field.lqgf").string());
    } else if (sub == "metric") {
      rc.trial.validate();
      FieldGrid f = field_for(rc, field_path);
      FieldGrid hs = mollify(f, rc.trial.epsilon);
      MetricGraph g =
          build_graph_premollified(hs, rc.trial.params, rc.trial.epsilon, rc.trial.a_eps);
      GeodesicTree far = shortest_paths(g, arc_vertices(rc.trial.grid, rc.trial.arc));
      GeodesicTree t1 =
          shortest_paths(g, {g.nearest_vertex(rc.trial.z1.real(), rc.trial.z1.imag())});
      GeodesicTree t2 =
          shortest_paths(g, {g.nearest_vertex(rc.trial.z2.real(), rc.trial.z2.imag())});
      save_tree(far, (out / "tree_far.lqgt").string());
      save_tree(t1, (out / "tree_z1.lqgt").string());
      save_tree(t2, (out / "tree_z2.lqgt").string());
      double b01 = busemann_diff(far, g.nearest_vertex(0.0, 0.0), g.nearest_vertex(1.0, 0.0));
      nlohmann::ordered_json stage;
      stage["busemann01"] = b01;
      put_file(out / "stage.json", render_json(stage));
    } else if (sub == "profile") {
      rc.trial.validate();
      FieldGrid f = field_for(rc, field_path);
      FieldGrid hs = mollify(f, rc.trial.epsilon);
      MetricGraph g =
          build_graph_premollified(hs, rc.trial.params, rc.trial.epsilon, rc.trial.a_eps);
      GeodesicTree t1 =
          shortest_paths(g, {g.nearest_vertex(rc.trial.z1.real(), rc.trial.z1.imag())});
      double q = std::exp2(-rc.trial.levels.front());
      Interval span{rc.trial.intervals.front().lo, rc.trial.intervals.back().hi + q + 1e-9};
      DistanceProfile prof = distance_profile(t1, g, span);
      std::string csv = "x,dist\n";
      for (size_t k = 0; k < prof.xs.size(); ++k)
        csv += num17(prof.xs[k]) + "," + num17(prof.dist[k]) + "\n";
      put_file(out / "profile.csv", csv);
    } else if (sub == "gmc" || sub == "variation" || sub == "coalescence") {
      ExperimentRunner runner(rc.trial);
      TrialDetail d = runner.run_on_field(field_for(rc, field_path), 0);
      if (sub == "gmc") put_file(out / "gmc.csv", gmc_csv(d.gmc));
      if (sub == "variation") put_file(out / "variation.csv", variation_csv(d.variation));
      if (sub == "coalescence")
        put_file(out / "coalescence.csv", coalescence_csv(d.coalescence));
    } else if (sub == "experiment") {
      ExperimentRunner runner(rc.trial);
      std::vector<TrialResult> results = runner.run_all(workers_from_env());
      ExperimentSummary summary = runner.summarize(results, canonical_config(rc));
      emit_report(summary, rc.format, out);
      if (rc.format == "csv") {
        std::vector<TrialDetail::GmcRow> g;
        std::vector<TrialDetail::VarRow> v;
        std::vector<TrialDetail::CoalRow> c;
        for (int t = 0; t < rc.trial.trials; ++t) {
          TrialDetail d = runner.run_trial_detailed(t);
          g.insert(g.end(), d.gmc.begin(), d.gmc.end());
          v.insert(v.end(), d.variation.begin(), d.variation.end());
          c.insert(c.end(), d.coalescence.begin(), d.coalescence.end());
        }
        put_file(out / "gmc.csv", gmc_csv(g));
        put_file(out / "variation.csv", variation_csv(v));
        put_file(out / "coalescence.csv", coalescence_csv(c));
      }
      std::cout << "wrote " << (out / "summary.json").string() << " (" << results.size()
                << " trials)\n";
    } else if (sub == "report") {
      fs::path src = out / "summary.json";
      if (!fs::exists(src)) throw std::runtime_error("report: " + src.string() + " not found");
      nlohmann::ordered_json j = nlohmann::ordered_json::parse(slurp(src.string()));
      if (rc.format == "json") {
        put_file(src, render_json(j));
      } else if (rc.format == "csv") {
        put_file(out / "summary.csv", csv_of_json(j));
      } else {
        throw std::runtime_error(
            "report: plotdata needs the per-level series; rerun the experiment with "
            "--format plotdata");
      }
    }

    write_manifest(out);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace lqg

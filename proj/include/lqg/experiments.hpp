#pragma once

#include <memory>
#include <string>
#include <vector>

#include "lqg/geodesics.hpp"
#include "lqg/gff.hpp"
#include "lqg/gmc.hpp"
#include "lqg/interval.hpp"
#include "lqg/metric.hpp"
#include "lqg/params.hpp"
#include "lqg/profile.hpp"

namespace lqg {

// Source arc for the "geodesics from infinity" proxy: grid vertices within
// three quarters of a cell of the circle |v| = radius, with argument between
// deg_lo and deg_hi. Deliberately placed near the domain truncation edge.
struct ArcSpec {
  double radius = 1.5;
  double deg_lo = 50.0, deg_hi = 130.0;
};

struct TrialConfig {
  LqgParams params;  // zero-initialized; fill via LqgParams::make
  CoalescenceConfig coal;
  GridSpec grid;
  SampleMethod method = SampleMethod::hierarchical;
  double epsilon = 0;        // metric mollification scale
  double gmc_epsilon = 0;    // boundary-measure regularization scale
  double a_eps = 1.0;
  std::vector<int> levels;          // dyadic levels n, ascending
  std::vector<Interval> intervals;  // disjoint observation intervals
  cplx z1{0.0, 0.75}, z2{0.5, 0.75};  // bulk reference points (distinct)
  ArcSpec arc;
  double sym_x0 = 0.25;   // boundary shift for the symmetry comparison
  double sym_r = 0.5;     // scaling factor for the symmetry comparison
  double sym_len = 0.25;  // pair separation entering both comparisons
  uint64_t master_seed = 1;
  int trials = 8;
  bool weyl_check = true;
  std::vector<double> restricted_seps;  // half-disk pair separations (optional)
  std::vector<double> gmc_scales;       // nested dyadic interval lengths (optional)

  void validate() const;  // throws invalid_argument naming the offending field
};

struct TrialResult {
  int index = -1;
  uint64_t seed = 0;
  std::vector<double> gmc_mass;       // per interval
  std::vector<double> mu_mass;        // level-major: [level][interval]
  std::vector<double> local_mass;     // same layout
  std::vector<double> busemann_mass;  // same layout
  std::vector<double> nongood_mass;   // profile-flavor mass on non-good points
  std::vector<int> good_count, pair_count, nocoal_count;  // per level
  int ident_violations = 0;  // good-point identity failures (expected 0)
  double busemann01 = 0;
  bool busemann01_ok = false;
  double sym_a = 0, sym_b = 0, sym_c = 0;  // |B|^e, shifted, rescaled variants
  double weyl_residual = 0;
  std::vector<double> restricted_dist;  // per separation
  std::vector<double> gmc_scale_mass;   // per nested scale
};

struct KappaEstimate {
  double mean = 0;
  double stderr_ = 0;
  int excluded = 0;
  int samples = 0;
};

struct LevelStat {
  int n = 0;
  double correlation = 0;  // pooled over (trial, interval) pairs
  double cv = 0;           // dispersion of per-interval median ratios
  std::vector<double> median_ratio;  // per interval (plot series; not in JSON)
};

struct RatioReport {
  std::vector<LevelStat> per_n;
  bool correlation_increasing = false;
  bool cv_decreasing = false;
};

struct TrendReport {
  std::vector<double> mean;         // per level
  std::vector<double> diff_stderr;  // stderr of mean[k+1]-mean[k], paired
  bool nonincreasing_within_1sigma = false;
};

struct MomentComparison {
  double mean_a = 0, mean_b = 0;
  double ci_a_lo = 0, ci_a_hi = 0, ci_b_lo = 0, ci_b_hi = 0;
  bool overlap = false;
};

struct PassRow {
  std::string name;
  bool pass = false;
};

struct SlopeRow {
  std::string name;
  double target = 0, estimate = 0, stderr_ = 0;
};

struct ExperimentSummary {
  std::string config_echo;
  uint64_t seed = 0;
  int trials = 0;
  KappaEstimate kappa;
  std::vector<SlopeRow> slopes;
  RatioReport ratio;
  std::vector<PassRow> pass;
  // extra series for csv/plotdata emission (not part of the JSON summary)
  std::vector<int> levels;
  TrendReport nongood;
  std::vector<double> good_fraction;  // per level
};

// Atom-level rows for the per-trial tables the CLI can emit. Column sets:
//   gmc:          trial, interval_lo, interval_hi, epsilon, mass
//   variation:    trial, n, u, atom_mass, flavor, good_flag
//   coalescence:  trial, n, u, coalesced, radius, good, busemann_diff
struct TrialDetail {
  TrialResult result;
  struct GmcRow {
    int trial;
    double lo, hi, epsilon, mass;
  };
  struct VarRow {
    int trial, n;
    double u, atom;
    std::string flavor;  // profile | local_proxy | busemann
    int good;
  };
  struct CoalRow {
    int trial, n;
    double u;
    int coalesced;
    double radius;
    int good;
    double busemann;
  };
  std::vector<GmcRow> gmc;
  std::vector<VarRow> variation;
  std::vector<CoalRow> coalescence;
};

class ExperimentRunner {
 public:
  explicit ExperimentRunner(TrialConfig cfg);  // one-time sampler factorization
  ~ExperimentRunner();
  ExperimentRunner(ExperimentRunner&&) noexcept;

  TrialResult run_trial(int index) const;
  TrialDetail run_trial_detailed(int index) const;  // same numbers, plus rows
  // Runs the post-sampling stages on a supplied (already saved/loaded) field;
  // with the trial-0 field this reproduces run_trial(0) exactly.
  TrialDetail run_on_field(const FieldGrid& field, int index = 0) const;
  // Trials are independent; `workers` only changes scheduling, never results.
  std::vector<TrialResult> run_all(int workers = 1) const;
  ExperimentSummary summarize(const std::vector<TrialResult>& results,
                              std::string config_echo) const;
  const TrialConfig& config() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// One-shot convenience (constructs a runner; prefer the class in loops).
TrialResult run_trial(const TrialConfig& config, int index);

// Grid vertices within 0.75 cells of the arc circle and inside the sector.
std::vector<uint32_t> arc_vertices(const GridSpec& g, const ArcSpec& arc);

KappaEstimate estimate_kappa(const std::vector<TrialResult>& results, const LqgParams& params,
                             uint64_t boot_seed = 99, int boot_reps = 500);

RatioReport ratio_convergence_test(const std::vector<TrialResult>& results,
                                   const std::vector<int>& levels, int n_intervals);

// Max over sampled vertex pairs of |D_{h+c}(u,v) - e^{xi c} D_h(u,v)| / D_h(u,v).
double weyl_exactness_test(const FieldGrid& field, double c, const LqgParams& params,
                           double epsilon, int pairs = 1000, uint64_t seed = 7);

struct CoordinateChangeReport {
  double estimate = 0, stderr_ = 0, target = 0;  // mean log-distance difference
};

// Compares log distances between a pair at one scale and the pair scaled by r
// on a grid scaled by r (same lattice geometry): the mean difference targets
// xi * Q * log r.
CoordinateChangeReport coordinate_change_test(const LqgParams& params, double r,
                                              const GridSpec& spec, double pair_half_sep,
                                              double pair_height, double epsilon, int trials,
                                              uint64_t seed);

// which = 'b': shift comparison (sym_a vs sym_b); 'c': scaling comparison.
MomentComparison busemann_symmetry_test(const std::vector<TrialResult>& results, char which,
                                        uint64_t boot_seed = 17, int boot_reps = 500);

TrendReport nongood_mass_test(const std::vector<TrialResult>& results,
                              const std::vector<int>& levels);

SlopeEstimate distance_moment_scaling_test(const std::vector<TrialResult>& results,
                                           const LqgParams& params,
                                           const std::vector<double>& seps,
                                           uint64_t boot_seed = 31);

}  // namespace lqg

#include "lqg/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "lqg/rng.hpp"

namespace lqg {

namespace {

constexpr double kTol = 1e-9;

uint32_t grid_vid(const GridSpec& g, double x, double y) {
  int i = static_cast<int>(std::lround((x - g.origin_x) / g.spacing));
  int j = static_cast<int>(std::lround(y / g.spacing));
  if (i < 0 || i >= g.nx || j < 0 || j >= g.ny)
    throw std::invalid_argument("reference point outside grid");
  return static_cast<uint32_t>(j) * g.nx + i;
}

double mean_of(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = mean_of(x), my = mean_of(y), sxy = 0, sxx = 0, syy = 0;
  for (size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  if (sxx <= 0 || syy <= 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// bootstrap 95% interval for the mean (deterministic given seed)
std::pair<double, double> boot_mean_ci(const std::vector<double>& v, uint64_t seed, int reps) {
  Rng rng(seed);
  std::vector<double> ms(reps);
  const size_t n = v.size();
  for (int b = 0; b < reps; ++b) {
    double s = 0;
    for (size_t k = 0; k < n; ++k) s += v[static_cast<size_t>(rng.uniform() * n) % n];
    ms[b] = s / static_cast<double>(n);
  }
  std::sort(ms.begin(), ms.end());
  auto q = [&](double p) { return ms[std::min(static_cast<size_t>(p * reps), ms.size() - 1)]; };
  return {q(0.025), q(0.975)};
}

double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = mean_of(x), my = mean_of(y), num = 0, den = 0;
  for (size_t k = 0; k < x.size(); ++k) {
    num += (x[k] - mx) * (y[k] - my);
    den += (x[k] - mx) * (x[k] - mx);
  }
  return num / den;
}

}  // namespace

std::vector<uint32_t> arc_vertices(const GridSpec& g, const ArcSpec& arc) {
  std::vector<uint32_t> out;
  double lo = arc.deg_lo * std::numbers::pi / 180.0;
  double hi = arc.deg_hi * std::numbers::pi / 180.0;
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      double x = g.origin_x + i * g.spacing, y = j * g.spacing;
      double r = std::hypot(x, y);
      if (std::abs(r - arc.radius) > 0.75 * g.spacing) continue;
      double th = std::atan2(y, x);
      if (th < lo - kTol || th > hi + kTol) continue;
      out.push_back(static_cast<uint32_t>(j) * g.nx + i);
    }
  if (out.empty()) throw std::invalid_argument("arc: no grid vertices on the source arc");
  return out;
}

void TrialConfig::validate() const {
  auto fail = [](const std::string& m) { throw std::invalid_argument("config: " + m); };
  if (!(params.gamma > 0)) fail("params not initialized (gamma)");
  if (grid.nx < 2 || grid.ny < 2 || !(grid.spacing > 0)) fail("grid geometry invalid");
  const double W = (grid.nx - 1) * grid.spacing, H = (grid.ny - 1) * grid.spacing;
  const double xmin = grid.origin_x, xmax = grid.origin_x + W;
  const double margin = 0.25 * W;
  if (xmin > -1 + kTol || xmax < 1 - kTol || H < 1 - kTol)
    fail("grid must contain the unit semicircle (normalization)");
  if (epsilon < grid.spacing) fail("epsilon below grid spacing");
  if (gmc_epsilon < 2 * grid.spacing) fail("gmc_epsilon below 2*spacing");
  if (!(a_eps > 0)) fail("a_eps must be positive");
  if (trials < 1) fail("trials must be >= 1");

  if (levels.empty()) fail("levels empty");
  for (size_t k = 0; k < levels.size(); ++k) {
    check_dyadic_level(levels[k], grid.spacing);
    if (k && levels[k] <= levels[k - 1]) fail("levels must be strictly ascending");
  }
  if (intervals.empty()) fail("intervals empty");
  double maxlen = 0;
  for (size_t k = 0; k < intervals.size(); ++k) {
    if (!intervals[k].valid()) fail("interval empty");
    maxlen = std::max(maxlen, intervals[k].length());
    if (k && intervals[k].lo < intervals[k - 1].hi - kTol)
      fail("intervals must be disjoint and sorted");
    if (intervals[k].lo < xmin + margin - kTol || intervals[k].hi > xmax - margin + kTol)
      fail("interval violates the 25%-width truncation margin");
  }
  const double qmax = std::exp2(-levels.front());
  if (intervals.back().hi + qmax > xmax - kTol) fail("profile overhang exits grid");

  if (!check_alpha(coal, params)) fail("coalescence exponents violate the moment constraint");
  const double contain = 2.0 * std::exp2(-levels.front() * (1.0 - coal.alpha1));
  for (cplx z : {z1, z2}) {
    if (!(z.imag() > 0)) fail("reference points must be interior (Im > 0)");
    if (z.real() < xmin + margin - kTol || z.real() > xmax - margin + kTol)
      fail("reference point violates the horizontal truncation margin");
    if (z.imag() > 0.75 * H + kTol) fail("reference point too close to the top edge");
    if (z.imag() < contain - kTol)
      fail("reference point must sit above the coalescence containment disks");
  }
  if (z1 == z2) fail("reference points must be distinct");

  if (arc.radius + grid.spacing > std::min({-xmin, xmax, H}))
    fail("arc radius exits grid");
  if (!(arc.deg_lo < arc.deg_hi) || arc.deg_lo < 0 || arc.deg_hi > 180)
    fail("arc sector invalid");
  // far-arc distance: at least 4x the largest interval length away from data
  double min_arc_dist = 1e300;
  for (const auto& I : intervals)
    for (double u : {I.lo, I.hi})
      for (int t = 0; t <= 256; ++t) {
        double th = (arc.deg_lo + (arc.deg_hi - arc.deg_lo) * t / 256.0) * std::numbers::pi / 180.0;
        min_arc_dist = std::min(min_arc_dist,
                                std::abs(cplx(u, 0.0) - arc.radius * cplx(std::cos(th), std::sin(th))));
      }
  if (min_arc_dist < 4.0 * maxlen - kTol)
    fail("arc too close to the observation intervals (need 4x the largest interval)");

  if (sym_len <= 0 || sym_r <= 0 || sym_r > 1) fail("symmetry comparison parameters invalid");
  if (std::abs(sym_x0) + 1.0 > std::min(-xmin, xmax) - kTol)
    fail("sym_x0 unit semicircle exits grid");
  if (sym_r < 2 * grid.spacing) fail("sym_r below circle-average resolution");
  for (double s : restricted_seps) {
    if (s < 8 * grid.spacing - kTol) fail("restricted separation below 8 cells");
    if (s > margin + kTol) fail("restricted separation violates the truncation margin");
    double half_cells = (s / 2) / grid.spacing;
    if (std::abs(half_cells - std::round(half_cells)) > kTol)
      fail("restricted separation endpoints must be grid-aligned");
  }
  for (double s : gmc_scales) {
    if (!(s > 0) || s / 2 > margin + kTol) fail("gmc scale invalid");
    double cells = s / grid.spacing;
    if (std::abs(cells - std::round(cells)) > kTol) fail("gmc scale must be grid-aligned");
  }
}

struct ExperimentRunner::Impl {
  TrialConfig cfg;
  std::shared_ptr<const GridSampler> sampler;
  std::vector<uint32_t> arc_vids;
  uint32_t z1_vid = 0, z2_vid = 0;
  Interval prof_iv, gmc_hull;

  explicit Impl(TrialConfig c) : cfg(std::move(c)) {
    cfg.validate();
    sampler = std::make_shared<GridSampler>(cfg.grid, cfg.method);
    arc_vids = arc_vertices(cfg.grid, cfg.arc);
    z1_vid = grid_vid(cfg.grid, cfg.z1.real(), cfg.z1.imag());
    z2_vid = grid_vid(cfg.grid, cfg.z2.real(), cfg.z2.imag());
    double qmax = std::exp2(-cfg.levels.front());
    prof_iv = {cfg.intervals.front().lo, cfg.intervals.back().hi + qmax + kTol};
    double lo = cfg.intervals.front().lo, hi = cfg.intervals.back().hi;
    for (double s : cfg.gmc_scales) {
      lo = std::min(lo, -s / 2);
      hi = std::max(hi, s / 2);
    }
    gmc_hull = {lo, hi + kTol};
  }

  TrialResult run(int index, TrialDetail* detail = nullptr) const;
  TrialResult run_field(const FieldGrid& f, int index, uint64_t seed,
                        TrialDetail* detail) const;
};

TrialResult ExperimentRunner::Impl::run(int index, TrialDetail* detail) const {
  uint64_t seed = mix_seed(cfg.master_seed, static_cast<uint64_t>(index));
  FieldGrid f = normalize(sampler->draw(seed));
  return run_field(f, index, seed, detail);
}

TrialResult ExperimentRunner::Impl::run_field(const FieldGrid& f, int index, uint64_t seed,
                                              TrialDetail* detail) const {
  const LqgParams& P = cfg.params;
  const double expo = variation_exponent(P);
  TrialResult r;
  r.index = index;
  r.seed = seed;

  FieldGrid hs = mollify(f, cfg.epsilon);
  MetricGraph g = build_graph_premollified(hs, P, cfg.epsilon, cfg.a_eps);

  GeodesicTree far = shortest_paths(g, arc_vids);
  GeodesicTree t1 = shortest_paths(g, {z1_vid});
  GeodesicTree t2 = shortest_paths(g, {z2_vid});

  BoundaryMeasure nu = boundary_gmc(f, P.gamma_prime, cfg.gmc_epsilon, gmc_hull);
  for (const auto& I : cfg.intervals) {
    double m = measure_mass(nu, I);
    r.gmc_mass.push_back(m);
    if (detail) detail->gmc.push_back({index, I.lo, I.hi, cfg.gmc_epsilon, m});
  }
  for (double s : cfg.gmc_scales) r.gmc_scale_mass.push_back(measure_mass(nu, {-s / 2, s / 2}));

  DistanceProfile prof = distance_profile(t1, g, prof_iv);

  for (int n : cfg.levels) {
    const double q = std::exp2(-n);
    int goodc = 0, pairc = 0, nocoal = 0;
    for (const auto& I : cfg.intervals) {
      VariationMeasure mu = variation_measure(prof, n, P, I);
      VariationMeasure loc = local_proxy_measure(g, n, P, I);
      if (mu.us.size() != loc.us.size())
        throw std::logic_error("variation/local measures disagree on pair set");

      std::vector<CoalescenceRecord> recs;
      recs.reserve(mu.us.size());
      for (double u : mu.us) {
        CoalescenceRecord rec = make_record(g, far, u, u + q, n, cfg.coal);
        check_reference_tree(rec, t1);
        check_reference_tree(rec, t2);
        recs.push_back(rec);
      }
      classify_good(recs, n, cfg.coal);
      VariationMeasure bus = busemann_variation_measure(recs, n, P, I);

      double nongood = 0;
      for (size_t k = 0; k < mu.us.size(); ++k) {
        // per-sample domination is a hard assertion (exact in real arithmetic;
        // 1e-12 relative slack covers floating-point accumulation order)
        if (mu.atoms[k] > loc.atoms[k] * (1.0 + 1e-12) + 1e-300)
          throw std::runtime_error("trial " + std::to_string(index) +
                                   ": domination violated (profile atom exceeds local proxy)");
        const auto& rec = recs[k];
        if (rec.good) {
          ++goodc;
          double d1 = t1.dist[rec.u_vid] - t1.dist[rec.up_vid];
          double d2 = t2.dist[rec.u_vid] - t2.dist[rec.up_vid];
          double tol = 1e-9 * std::max(1.0, std::abs(d1));
          if (std::abs(d1 - d2) > tol || std::abs(d1 - rec.busemann) > tol)
            ++r.ident_violations;
        } else {
          nongood += mu.atoms[k];
        }
        if (!rec.w) ++nocoal;
        ++pairc;
        if (detail) {
          int gd = rec.good ? 1 : 0;
          detail->variation.push_back({index, n, mu.us[k], mu.atoms[k], "profile", gd});
          detail->variation.push_back({index, n, loc.us[k], loc.atoms[k], "local_proxy", gd});
          detail->variation.push_back({index, n, bus.us[k], bus.atoms[k], "busemann", gd});
          detail->coalescence.push_back({index, n, mu.us[k], rec.w ? 1 : 0, rec.radius, gd,
                                         rec.busemann});
        }
      }
      r.mu_mass.push_back(mu.total());
      r.local_mass.push_back(loc.total());
      r.busemann_mass.push_back(bus.total());
      r.nongood_mass.push_back(nongood);
    }
    r.good_count.push_back(goodc);
    r.pair_count.push_back(pairc);
    r.nocoal_count.push_back(nocoal);
  }

  // kappa sample: far-tree Busemann difference of the boundary pair (0, 1)
  uint32_t v0 = grid_vid(cfg.grid, 0.0, 0.0), v1 = grid_vid(cfg.grid, 1.0, 0.0);
  r.busemann01 = busemann_diff(far, v0, v1);
  r.busemann01_ok = coalescence_point(far, v0, v1).has_value();

  // symmetry comparison samples (shifted and rescaled variants)
  auto B = [&](double xa, double xb) {
    return busemann_diff(far, grid_vid(cfg.grid, xa, 0.0), grid_vid(cfg.grid, xb, 0.0));
  };
  const double L = cfg.sym_len;
  r.sym_a = std::pow(std::abs(B(0.0, L)), expo);
  double h1 = circle_average(f, cfg.sym_x0, 1.0);
  r.sym_b = std::pow(std::abs(std::exp(-P.xi * h1) * B(cfg.sym_x0, cfg.sym_x0 + L)), expo);
  double hr = circle_average(f, 0.0, cfg.sym_r);
  r.sym_c = std::pow(
      std::abs(std::pow(cfg.sym_r, -P.xi * P.q) * std::exp(-P.xi * hr) * B(0.0, cfg.sym_r * L)),
      expo);

  if (cfg.weyl_check) {
    // small crop: the scaling identity is exact on any subgrid
    int wnx = std::min(48, cfg.grid.nx), wny = std::min(24, cfg.grid.ny);
    int i0 = (cfg.grid.nx - wnx) / 2;
    FieldGrid crop;
    crop.spacing = f.spacing;
    crop.nx = wnx;
    crop.ny = wny;
    crop.origin_x = f.x(i0);
    crop.values.resize(static_cast<size_t>(wnx) * wny);
    for (int j = 0; j < wny; ++j)
      for (int i = 0; i < wnx; ++i) crop.values[crop.idx(i, j)] = f.at(i0 + i, j);
    r.weyl_residual = weyl_exactness_test(crop, 1.0, P, cfg.epsilon, 64, r.seed ^ 0x5eedULL);
  }

  for (double s : cfg.restricted_seps) {
    MetricGraph sub = g.restricted(half_disk_mask(g, 0.0, s));
    double d = pair_distance(sub, grid_vid(cfg.grid, -s / 2, 0.0),
                             grid_vid(cfg.grid, s / 2, 0.0));
    if (!std::isfinite(d))
      throw std::runtime_error("trial " + std::to_string(index) +
                               ": restricted pair disconnected");
    r.restricted_dist.push_back(d);
  }
  return r;
}

ExperimentRunner::ExperimentRunner(TrialConfig cfg) : impl_(new Impl(std::move(cfg))) {}
ExperimentRunner::~ExperimentRunner() = default;
ExperimentRunner::ExperimentRunner(ExperimentRunner&&) noexcept = default;
const TrialConfig& ExperimentRunner::config() const { return impl_->cfg; }

TrialDetail ExperimentRunner::run_trial_detailed(int index) const {
  TrialDetail d;
  d.result = impl_->run(index, &d);
  return d;
}

TrialDetail ExperimentRunner::run_on_field(const FieldGrid& field, int index) const {
  const GridSpec& g = impl_->cfg.grid;
  if (field.nx != g.nx || field.ny != g.ny ||
      std::abs(field.spacing - g.spacing) > 1e-12 ||
      std::abs(field.origin_x - g.origin_x) > 1e-12)
    throw std::invalid_argument("run_on_field: field geometry does not match the config grid");
  TrialDetail d;
  d.result = impl_->run_field(normalize(field), index, field.seed, &d);
  return d;
}

TrialResult ExperimentRunner::run_trial(int index) const {
  try {
    return impl_->run(index);
  } catch (const std::logic_error&) {
    throw;
  } catch (const std::exception& e) {
    std::string msg = e.what();
    if (msg.rfind("trial ", 0) == 0) throw;
    throw std::runtime_error("trial " + std::to_string(index) + ": " + msg);
  }
}

std::vector<TrialResult> ExperimentRunner::run_all(int workers) const {
  const int n = impl_->cfg.trials;
  std::vector<TrialResult> out(static_cast<size_t>(n));
  workers = std::max(1, std::min(workers, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) out[static_cast<size_t>(i)] = run_trial(i);
    return out;
  }
  std::atomic<int> next{0};
  std::mutex emu;
  std::exception_ptr err;
  auto work = [&] {
    for (;;) {
      int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        out[static_cast<size_t>(i)] = run_trial(i);
      } catch (...) {
        std::lock_guard<std::mutex> lk(emu);
        if (!err) err = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (err) std::rethrow_exception(err);
  return out;
}

TrialResult run_trial(const TrialConfig& config, int index) {
  return ExperimentRunner(config).run_trial(index);
}

KappaEstimate estimate_kappa(const std::vector<TrialResult>& results, const LqgParams& params,
                             uint64_t boot_seed, int boot_reps) {
  const double expo = variation_exponent(params);
  KappaEstimate k;
  std::vector<double> samples;
  for (const auto& r : results) {
    if (!r.busemann01_ok) {
      ++k.excluded;
      continue;
    }
    samples.push_back(std::pow(std::abs(r.busemann01), expo));
  }
  if (samples.empty())
    throw std::runtime_error("estimate_kappa: no coalesced pairs available");
  if (samples.size() < 100)
    throw std::invalid_argument("estimate_kappa: need >= 100 coalesced samples");
  k.samples = static_cast<int>(samples.size());
  k.mean = mean_of(samples);
  Rng rng(boot_seed);
  std::vector<double> ms(boot_reps);
  for (int b = 0; b < boot_reps; ++b) {
    double s = 0;
    for (size_t t = 0; t < samples.size(); ++t)
      s += samples[static_cast<size_t>(rng.uniform() * samples.size()) % samples.size()];
    ms[b] = s / static_cast<double>(samples.size());
  }
  double mb = mean_of(ms), var = 0;
  for (double v : ms) var += (v - mb) * (v - mb);
  k.stderr_ = std::sqrt(var / (boot_reps - 1));
  return k;
}

RatioReport ratio_convergence_test(const std::vector<TrialResult>& results,
                                   const std::vector<int>& levels, int n_intervals) {
  if (results.size() < 200 || levels.size() < 2 || n_intervals < 8)
    throw std::invalid_argument(
        "ratio_convergence_test: need >= 200 trials, >= 2 levels, >= 8 intervals");
  RatioReport rep;
  const size_t nl = levels.size(), ni = static_cast<size_t>(n_intervals);
  for (size_t l = 0; l < nl; ++l) {
    std::vector<double> xs, ys;
    xs.reserve(results.size() * ni);
    for (const auto& r : results)
      for (size_t j = 0; j < ni; ++j) {
        xs.push_back(r.mu_mass[l * ni + j]);
        ys.push_back(r.gmc_mass[j]);
      }
    LevelStat st;
    st.n = levels[l];
    st.correlation = pearson(xs, ys);
    std::vector<double> med(ni);
    for (size_t j = 0; j < ni; ++j) {
      std::vector<double> ratios;
      ratios.reserve(results.size());
      for (const auto& r : results) ratios.push_back(r.mu_mass[l * ni + j] / r.gmc_mass[j]);
      med[j] = median_of(std::move(ratios));
    }
    double mm = mean_of(med), vv = 0;
    for (double m : med) vv += (m - mm) * (m - mm);
    st.cv = std::sqrt(vv / (ni - 1)) / mm;
    st.median_ratio = med;
    rep.per_n.push_back(st);
  }
  rep.correlation_increasing = true;
  rep.cv_decreasing = true;
  for (size_t l = 1; l < nl; ++l) {
    if (!(rep.per_n[l].correlation > rep.per_n[l - 1].correlation))
      rep.correlation_increasing = false;
    if (!(rep.per_n[l].cv < rep.per_n[l - 1].cv)) rep.cv_decreasing = false;
  }
  return rep;
}

double weyl_exactness_test(const FieldGrid& field, double c, const LqgParams& params,
                           double epsilon, int pairs, uint64_t seed) {
  if (c == 0.0) return 0.0;
  MetricGraph g1 = build_graph(field, params, epsilon, 1.0);
  MetricGraph g2 = build_graph(add_function(field, [c](double, double) { return c; }), params,
                               epsilon, 1.0);
  const double fac = std::exp(params.xi * c);
  const size_t n = g1.size();
  Rng rng(seed);
  int per_src = 32;
  int nsrc = std::max(1, (pairs + per_src - 1) / per_src);
  double worst = 0;
  for (int s = 0; s < nsrc; ++s) {
    uint32_t src = static_cast<uint32_t>(rng.uniform() * n) % n;
    GeodesicTree ta = shortest_paths(g1, {src});
    GeodesicTree tb = shortest_paths(g2, {src});
    for (int t = 0; t < per_src; ++t) {
      uint32_t v = static_cast<uint32_t>(rng.uniform() * n) % n;
      if (v == src) continue;
      worst = std::max(worst, std::abs(tb.dist[v] - fac * ta.dist[v]) / ta.dist[v]);
    }
  }
  return worst;
}

CoordinateChangeReport coordinate_change_test(const LqgParams& params, double r,
                                              const GridSpec& spec, double pair_half_sep,
                                              double pair_height, double epsilon, int trials,
                                              uint64_t seed) {
  double l2 = std::log2(r);
  if (!(r > 0) || std::abs(l2 - std::round(l2)) > 1e-12)
    throw std::invalid_argument("coordinate_change_test: r must be a power of 2");
  GridSpec spec2 = spec;
  spec2.spacing = spec.spacing * r;
  spec2.origin_x = spec.origin_x * r;
  auto method = [&](const GridSpec& s) {
    return static_cast<long>(s.nx) * s.ny <= 4096 ? SampleMethod::exact
                                                  : SampleMethod::hierarchical;
  };
  GridSampler s1(spec, method(spec));
  GridSampler s2(spec2, method(spec2));
  double xc1 = spec.origin_x + 0.5 * (spec.nx - 1) * spec.spacing;
  double xc2 = xc1 * r;
  std::vector<double> diff(trials);
  for (int t = 0; t < trials; ++t) {
    uint64_t st = mix_seed(seed, static_cast<uint64_t>(t));
    FieldGrid f1 = s1.draw(st), f2 = s2.draw(st);
    MetricGraph g1 = build_graph(f1, params, epsilon, 1.0);
    MetricGraph g2 = build_graph(f2, params, epsilon * r, 1.0);
    double d1 = pair_distance(g1, g1.nearest_vertex(xc1 - pair_half_sep, pair_height),
                              g1.nearest_vertex(xc1 + pair_half_sep, pair_height));
    double d2 = pair_distance(g2, g2.nearest_vertex(xc2 - pair_half_sep * r, pair_height * r),
                              g2.nearest_vertex(xc2 + pair_half_sep * r, pair_height * r));
    diff[t] = std::log(d2) - std::log(d1);
  }
  CoordinateChangeReport rep;
  rep.target = params.xi * params.q * std::log(r);
  rep.estimate = mean_of(diff);
  double var = 0;
  for (double d : diff) var += (d - rep.estimate) * (d - rep.estimate);
  rep.stderr_ = trials > 1 ? std::sqrt(var / (trials - 1) / trials) : 0.0;
  return rep;
}

MomentComparison busemann_symmetry_test(const std::vector<TrialResult>& results, char which,
                                        uint64_t boot_seed, int boot_reps) {
  if (results.size() < 50)
    throw std::invalid_argument("busemann_symmetry_test: need >= 50 paired samples");
  std::vector<double> a, b;
  for (const auto& r : results) {
    a.push_back(r.sym_a);
    b.push_back(which == 'c' ? r.sym_c : r.sym_b);
  }
  MomentComparison m;
  m.mean_a = mean_of(a);
  m.mean_b = mean_of(b);
  std::tie(m.ci_a_lo, m.ci_a_hi) = boot_mean_ci(a, boot_seed, boot_reps);
  std::tie(m.ci_b_lo, m.ci_b_hi) = boot_mean_ci(b, boot_seed ^ 0x9e37ULL, boot_reps);
  m.overlap = m.ci_a_lo <= m.ci_b_hi && m.ci_b_lo <= m.ci_a_hi;
  return m;
}

TrendReport nongood_mass_test(const std::vector<TrialResult>& results,
                              const std::vector<int>& levels) {
  TrendReport rep;
  const size_t nl = levels.size();
  if (results.empty() || nl == 0) throw std::invalid_argument("nongood_mass_test: no data");
  const size_t ni = results[0].nongood_mass.size() / nl;
  std::vector<std::vector<double>> per_trial(nl, std::vector<double>(results.size(), 0.0));
  for (size_t t = 0; t < results.size(); ++t)
    for (size_t l = 0; l < nl; ++l)
      for (size_t j = 0; j < ni; ++j)
        per_trial[l][t] += results[t].nongood_mass[l * ni + j];
  for (size_t l = 0; l < nl; ++l) rep.mean.push_back(mean_of(per_trial[l]));
  rep.nonincreasing_within_1sigma = true;
  for (size_t l = 1; l < nl; ++l) {
    std::vector<double> d(results.size());
    for (size_t t = 0; t < results.size(); ++t) d[t] = per_trial[l][t] - per_trial[l - 1][t];
    double md = mean_of(d), var = 0;
    for (double v : d) var += (v - md) * (v - md);
    double se = results.size() > 1
                    ? std::sqrt(var / (results.size() - 1) / results.size())
                    : 0.0;
    rep.diff_stderr.push_back(se);
    if (md > se) rep.nonincreasing_within_1sigma = false;
  }
  return rep;
}

SlopeEstimate distance_moment_scaling_test(const std::vector<TrialResult>& results,
                                           const LqgParams& params,
                                           const std::vector<double>& seps,
                                           uint64_t boot_seed) {
  if (seps.size() < 4)
    throw std::invalid_argument("distance_moment_scaling_test: need >= 4 separations");
  if (results.size() < 500)
    throw std::invalid_argument("distance_moment_scaling_test: need >= 500 trials");
  const double expo = variation_exponent(params);
  const size_t ns = seps.size(), nt = results.size();
  std::vector<std::vector<double>> mp(ns, std::vector<double>(nt));
  for (size_t t = 0; t < nt; ++t) {
    if (results[t].restricted_dist.size() != ns)
      throw std::invalid_argument("distance_moment_scaling_test: missing restricted distances");
    for (size_t s = 0; s < ns; ++s)
      mp[s][t] = std::pow(results[t].restricted_dist[s], expo);
  }
  std::vector<double> X(ns);
  for (size_t s = 0; s < ns; ++s) X[s] = std::log(seps[s]);
  auto slope_of = [&](const std::vector<size_t>& pick) {
    std::vector<double> Y(ns);
    for (size_t s = 0; s < ns; ++s) {
      double m = 0;
      for (size_t t : pick) m += mp[s][t];
      Y[s] = std::log(m / pick.size());
    }
    return ls_slope(X, Y);
  };
  std::vector<size_t> all(nt);
  for (size_t t = 0; t < nt; ++t) all[t] = t;
  SlopeEstimate e;
  e.estimate = slope_of(all);
  e.target = psi(params.gamma, params.gamma_prime / params.gamma);
  e.samples = static_cast<int>(nt);
  Rng rng(boot_seed);
  const int reps = 400;
  std::vector<double> bs(reps);
  std::vector<size_t> pick(nt);
  for (int b = 0; b < reps; ++b) {
    for (size_t t = 0; t < nt; ++t) pick[t] = static_cast<size_t>(rng.uniform() * nt) % nt;
    bs[b] = slope_of(pick);
  }
  double mb = mean_of(bs), var = 0;
  for (double v : bs) var += (v - mb) * (v - mb);
  e.stderr_ = std::sqrt(var / (reps - 1));
  return e;
}

ExperimentSummary ExperimentRunner::summarize(const std::vector<TrialResult>& results,
                                              std::string config_echo) const {
  const TrialConfig& cfg = impl_->cfg;
  if (results.empty()) throw std::invalid_argument("summarize: no trial results");
  ExperimentSummary s;
  s.config_echo = std::move(config_echo);
  s.seed = cfg.master_seed;
  s.trials = static_cast<int>(results.size());
  s.levels = cfg.levels;

  int valid = 0;
  for (const auto& r : results) valid += r.busemann01_ok ? 1 : 0;
  if (valid >= 100) {
    s.kappa = estimate_kappa(results, cfg.params);
  } else {
    s.kappa.samples = valid;
    s.kappa.excluded = s.trials - valid;
  }

  const size_t ni = cfg.intervals.size();
  if (results.size() >= 200 && cfg.levels.size() >= 2 && ni >= 8) {
    s.ratio = ratio_convergence_test(results, cfg.levels, static_cast<int>(ni));
    s.pass.push_back({"ratio_trend", s.ratio.correlation_increasing && s.ratio.cv_decreasing});
  }

  s.nongood = nongood_mass_test(results, cfg.levels);
  s.pass.push_back({"nongood_trend", s.nongood.nonincreasing_within_1sigma});

  for (size_t l = 0; l < cfg.levels.size(); ++l) {
    long g = 0, p = 0;
    for (const auto& r : results) {
      g += r.good_count[l];
      p += r.pair_count[l];
    }
    s.good_fraction.push_back(p > 0 ? static_cast<double>(g) / p : 0.0);
  }

  int violations = 0;
  for (const auto& r : results) violations += r.ident_violations;
  s.pass.push_back({"domination", true});  // hard-asserted inside every trial
  s.pass.push_back({"good_identities", violations == 0});

  if (cfg.restricted_seps.size() >= 4 && results.size() >= 500) {
    SlopeEstimate e = distance_moment_scaling_test(results, cfg.params, cfg.restricted_seps);
    s.slopes.push_back({"restricted_distance_moment", e.target, e.estimate, e.stderr_});
  }
  double gp = cfg.params.gamma_prime;
  if (cfg.gmc_scales.size() >= 4 && results.size() >= 500 && 2.0 < 4.0 / (gp * gp)) {
    std::vector<std::vector<double>> masses(cfg.gmc_scales.size(),
                                            std::vector<double>(results.size()));
    for (size_t t = 0; t < results.size(); ++t)
      for (size_t k = 0; k < cfg.gmc_scales.size(); ++k)
        masses[k][t] = results[t].gmc_scale_mass[k];
    SlopeEstimate e = moment_scaling(masses, cfg.gmc_scales, 2.0, gp);
    s.slopes.push_back({"gmc_moment_p2", e.target, e.estimate, e.stderr_});
  }
  return s;
}

}  // namespace lqg

#include "lqg/profile.hpp"

#include <cmath>
#include <stdexcept>

namespace lqg {

namespace {

constexpr double kTol = 1e-9;

// dyadic points of level n in [I.lo, I.hi): k*2^{-n}
std::vector<double> dyadic_points(int n, Interval I) {
  double q = std::exp2(-n);
  long k0 = static_cast<long>(std::ceil(I.lo / q - kTol));
  std::vector<double> us;
  for (long k = k0; k * q < I.hi - kTol; ++k) us.push_back(k * q);
  return us;
}

}  // namespace

void check_dyadic_level(int n, double spacing) {
  if (n < 0) throw std::invalid_argument("dyadic level must be >= 0");
  double q = std::exp2(-n);
  double cells = q / spacing;
  if (std::abs(cells - std::round(cells)) > kTol)
    throw std::invalid_argument("grid spacing does not divide 2^{-n}");
  if (cells < 8 - kTol)
    throw std::invalid_argument("dyadic level too fine for the grid (need 2^{-n} >= 8*spacing)");
}

double DistanceProfile::at(double x) const {
  double g = (x - x0) / spacing;
  long i = std::lround(g);
  if (i < 0 || i >= static_cast<long>(xs.size()) || std::abs(g - i) > kTol)
    throw std::invalid_argument("profile lookup off the covered boundary lattice");
  return dist[static_cast<size_t>(i)];
}

DistanceProfile distance_profile(const GeodesicTree& tree, const MetricGraph& g, Interval I) {
  if (!I.valid()) throw std::invalid_argument("distance_profile: empty interval");
  int i0 = static_cast<int>(std::ceil((I.lo - g.origin_x) / g.spacing - kTol));
  int i1 = static_cast<int>(std::floor((I.hi - g.origin_x) / g.spacing + kTol));
  if (i0 < 0 || i1 >= g.nx) throw std::domain_error("distance_profile: interval outside grid");
  DistanceProfile p;
  p.spacing = g.spacing;
  p.x0 = g.origin_x + i0 * g.spacing;
  for (int i = i0; i <= i1; ++i) {
    uint32_t v = g.vid(i, 0);
    double d = tree.dist[v];
    if (!std::isfinite(d))
      throw std::domain_error("distance_profile: boundary vertex outside the tree's mask");
    p.xs.push_back(g.origin_x + i * g.spacing);
    p.dist.push_back(d);
  }
  return p;
}

double VariationMeasure::total() const {
  double s = 0;
  for (double a : atoms) s += a;
  return s;
}

double VariationMeasure::mass(Interval sub) const {
  double s = 0;
  for (size_t k = 0; k < us.size(); ++k)
    if (us[k] >= sub.lo - kTol && us[k] < sub.hi - kTol) s += atoms[k];
  return s;
}

VariationMeasure variation_measure(const DistanceProfile& profile, int n,
                                   const LqgParams& params, Interval I) {
  check_dyadic_level(n, profile.spacing);
  VariationMeasure m;
  m.n = n;
  m.interval = I;
  double q = std::exp2(-n);
  double norm = std::exp2(-n * normalization_exponent(params));
  double expo = variation_exponent(params);
  double xmax = profile.xs.empty() ? -1e300 : profile.xs.back();
  for (double u : dyadic_points(n, I)) {
    if (u + q > xmax + kTol) continue;  // right edge leaves the data: skip
    double inc = profile.at(u + q) - profile.at(u);
    m.us.push_back(u);
    m.atoms.push_back(norm * std::pow(std::abs(inc), expo));
    m.flagged.push_back(0);
  }
  return m;
}

VariationMeasure local_proxy_measure(const MetricGraph& base, int n, const LqgParams& params,
                                     Interval I) {
  check_dyadic_level(n, base.spacing);
  VariationMeasure m;
  m.n = n;
  m.interval = I;
  double q = std::exp2(-n);
  double norm = std::exp2(-n * normalization_exponent(params));
  double expo = variation_exponent(params);
  double xmax = base.origin_x + (base.nx - 1) * base.spacing;
  for (double u : dyadic_points(n, I)) {
    if (u + q > xmax + kTol) continue;
    MetricGraph sub = base.restricted(half_disk_mask(base, u + q / 2, q));
    double d = pair_distance(sub, base.nearest_vertex(u, 0), base.nearest_vertex(u + q, 0));
    if (!std::isfinite(d))
      throw std::runtime_error("local_proxy_measure: pair not connected inside its half-disk");
    m.us.push_back(u);
    m.atoms.push_back(norm * std::pow(d, expo));
    m.flagged.push_back(0);
  }
  return m;
}

VariationMeasure busemann_variation_measure(const std::vector<CoalescenceRecord>& records,
                                            int n, const LqgParams& params, Interval I) {
  VariationMeasure m;
  m.n = n;
  m.interval = I;
  double q = std::exp2(-n);
  double norm = std::exp2(-n * normalization_exponent(params));
  double expo = variation_exponent(params);
  for (const auto& rec : records) {
    if (!(rec.u >= I.lo - kTol && rec.u < I.hi - kTol)) continue;
    double cells = rec.u / q;
    if (std::abs(cells - std::round(cells)) > kTol)
      throw std::invalid_argument("busemann_variation_measure: record off the level-n lattice");
    double atom = 0;
    bool flag = !rec.w.has_value();
    if (rec.u_plus == rec.u) {
      atom = 0;  // degenerate pair guard
    } else if (std::isfinite(rec.busemann)) {
      atom = norm * std::pow(std::abs(rec.busemann), expo);
    } else {
      flag = true;
    }
    m.us.push_back(rec.u);
    m.atoms.push_back(atom);
    m.flagged.push_back(flag ? 1 : 0);
  }
  return m;
}

}  // namespace lqg

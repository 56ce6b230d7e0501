#include "lqg/gmc.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "lqg/params.hpp"
#include "lqg/rng.hpp"

namespace lqg {

double BoundaryMeasure::total() const {
  double s = 0;
  for (double a : atoms) s += a;
  return s;
}

BoundaryMeasure boundary_gmc(const FieldGrid& field, double gamma_prime, double epsilon,
                             Interval interval) {
  if (!(gamma_prime > 0 && gamma_prime < 2))
    throw std::invalid_argument("boundary_gmc: gamma_prime must lie in (0,2)");
  if (epsilon < 2 * field.spacing)
    throw std::invalid_argument("boundary_gmc: epsilon must be >= 2*spacing");
  if (!interval.valid()) throw std::invalid_argument("boundary_gmc: empty interval");

  BoundaryMeasure m;
  m.interval = interval;
  m.epsilon = epsilon;
  m.gamma_prime = gamma_prime;
  m.spacing = field.spacing;

  const double tol = 1e-9 * field.spacing;
  int i0 = static_cast<int>(std::ceil((interval.lo - field.origin_x - tol) / field.spacing));
  int i1 = static_cast<int>(std::floor((interval.hi - field.origin_x - tol) / field.spacing));
  if (i0 < 0 || i1 >= field.nx)
    throw std::domain_error("boundary_gmc: interval outside grid");
  double prefac = std::pow(epsilon, gamma_prime * gamma_prime / 4.0);
  for (int i = i0; i <= i1; ++i) {
    double x = field.x(i);
    if (!interval.contains(x) && !(std::abs(x - interval.lo) <= tol)) continue;
    double h = circle_average(field, x, epsilon);  // throws if semicircle exits grid
    m.xs.push_back(x);
    m.atoms.push_back(prefac * std::exp(0.5 * gamma_prime * h) * field.spacing);
  }
  return m;
}

double measure_mass(const BoundaryMeasure& measure, Interval sub) {
  if (!(sub.hi >= sub.lo)) throw std::invalid_argument("measure_mass: inverted interval");
  double tol = 1e-9 * measure.spacing;
  if (sub.lo < measure.interval.lo - tol || sub.hi > measure.interval.hi + tol)
    throw std::invalid_argument("measure_mass: query outside measure support");
  double s = 0;
  for (size_t k = 0; k < measure.xs.size(); ++k)
    if (measure.xs[k] >= sub.lo - tol && measure.xs[k] < sub.hi - tol) s += measure.atoms[k];
  return s;
}

double boundary_variance(double x) { return semicircle_average_variance(x, 1.0, 128); }

double gmc_mean_target(Interval I, double gamma_prime, double eps, int nq) {
  if (!I.valid()) throw std::invalid_argument("gmc_mean_target: empty interval");
  double h = I.length() / nq, s = 0;
  for (int k = 0; k < nq; ++k) {
    double x = I.lo + (k + 0.5) * h;
    double vhat = semicircle_average_variance(x, eps, 128) + 2.0 * std::log(eps);
    s += std::exp(gamma_prime * gamma_prime * vhat / 8.0);
  }
  return s * h;
}

SlopeEstimate moment_scaling(const std::vector<std::vector<double>>& masses,
                             const std::vector<double>& scales, double p, double gamma_prime,
                             uint64_t boot_seed, int boot_reps) {
  if (!(p > 0) || !(p < 4.0 / (gamma_prime * gamma_prime)))
    throw std::invalid_argument("moment_scaling: p outside the finite-moment range (0, 4/gp^2)");
  const size_t ns = scales.size();
  if (ns < 4 || masses.size() != ns)
    throw std::invalid_argument("moment_scaling: need >= 4 dyadic scales");
  const size_t nt = masses[0].size();
  if (nt < 500) throw std::invalid_argument("moment_scaling: need >= 500 field samples");
  for (const auto& row : masses)
    if (row.size() != nt) throw std::invalid_argument("moment_scaling: ragged mass table");

  std::vector<std::vector<double>> mp(ns, std::vector<double>(nt));
  for (size_t s = 0; s < ns; ++s)
    for (size_t t = 0; t < nt; ++t) mp[s][t] = std::pow(masses[s][t], p);

  auto slope_of = [&](const std::vector<size_t>& pick) {
    double lx = 0, ly = 0;
    std::vector<double> X(ns), Y(ns);
    for (size_t s = 0; s < ns; ++s) {
      double mean = 0;
      for (size_t t : pick) mean += mp[s][t];
      mean /= pick.size();
      X[s] = std::log(scales[s]);
      Y[s] = std::log(mean);
      lx += X[s];
      ly += Y[s];
    }
    lx /= ns;
    ly /= ns;
    double num = 0, den = 0;
    for (size_t s = 0; s < ns; ++s) {
      num += (X[s] - lx) * (Y[s] - ly);
      den += (X[s] - lx) * (X[s] - lx);
    }
    return num / den;
  };

  std::vector<size_t> all(nt);
  for (size_t t = 0; t < nt; ++t) all[t] = t;
  SlopeEstimate e;
  e.estimate = slope_of(all);
  e.target = psi(gamma_prime, p);
  e.samples = static_cast<int>(nt);

  Rng rng(boot_seed);
  std::vector<double> bs(boot_reps);
  std::vector<size_t> pick(nt);
  for (int b = 0; b < boot_reps; ++b) {
    for (size_t t = 0; t < nt; ++t)
      pick[t] = static_cast<size_t>(rng.uniform() * nt) % nt;
    bs[b] = slope_of(pick);
  }
  double mb = 0;
  for (double v : bs) mb += v;
  mb /= boot_reps;
  double var = 0;
  for (double v : bs) var += (v - mb) * (v - mb);
  e.stderr_ = std::sqrt(var / (boot_reps - 1));
  return e;
}

}  // namespace lqg

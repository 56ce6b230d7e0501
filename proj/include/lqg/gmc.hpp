#pragma once

#include <cstdint>
#include <vector>

#include "lqg/gff.hpp"
#include "lqg/interval.hpp"

namespace lqg {

// Regularized boundary measure: one atom per boundary grid point x in [lo,hi),
// mass eps^{gp^2/4} * exp(gp * h_eps(x) / 2) * spacing, with h_eps the
// semicircle average of the field at radius eps.
struct BoundaryMeasure {
  Interval interval;
  double epsilon = 0;
  double gamma_prime = 0;
  double spacing = 0;
  std::vector<double> xs;     // atom positions (boundary grid points)
  std::vector<double> atoms;  // atom masses, same order
  double total() const;
};

BoundaryMeasure boundary_gmc(const FieldGrid& field, double gamma_prime, double epsilon,
                             Interval interval);

double measure_mass(const BoundaryMeasure& measure, Interval sub);

// Variance of the unit-radius boundary semicircle average at position x
// (128-point arc quadrature of the kernel; closed form off the unit circle).
double boundary_variance(double x);

// Quadrature of the mean-mass identity target for the measure above at unit
// regularization: integral over I of exp(gp^2 * V(x) / 8) dx. For finite eps
// multiply the empirical comparison by nothing — pass eps to evaluate the
// finite-eps version integral of exp(gp^2 * Vhat_eps(x) / 8) dx with
// Vhat_eps(x) = 4 * avg_theta logplus|x + eps e^{i theta}|.
double gmc_mean_target(Interval I, double gamma_prime, double eps = 1.0, int nq = 256);

struct SlopeEstimate {
  double estimate = 0;
  double stderr_ = 0;
  double target = 0;
  int samples = 0;
};

// Least-squares slope of log E[mass^p] against log scale with a paired
// bootstrap standard error over fields. masses[s][t]: scale s, field t.
SlopeEstimate moment_scaling(const std::vector<std::vector<double>>& masses,
                             const std::vector<double>& scales, double p, double gamma_prime,
                             uint64_t boot_seed = 2026, int boot_reps = 400);

}  // namespace lqg

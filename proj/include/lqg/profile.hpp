#pragma once

#include <cstdint>
#include <vector>

#include "lqg/geodesics.hpp"
#include "lqg/interval.hpp"
#include "lqg/metric.hpp"
#include "lqg/params.hpp"

namespace lqg {

// Distances from a tree's source set to the boundary vertices in an interval.
struct DistanceProfile {
  double x0 = 0;       // position of the first boundary vertex covered
  double spacing = 0;  // grid spacing
  std::vector<double> xs;
  std::vector<double> dist;
  // exact lookup at a covered grid-aligned position (throws when misaligned)
  double at(double x) const;
};

DistanceProfile distance_profile(const GeodesicTree& tree, const MetricGraph& g, Interval I);

// Normalized power-variation measure at dyadic level n over [I.lo, I.hi):
// atom(u) = 2^{-n*normalization_exponent} * |increment(u)|^{variation_exponent}
// placed at u in Pi_n cap I; a pair whose right edge leaves the data is
// skipped. The three builders differ only in which increment they use.
struct VariationMeasure {
  int n = 0;
  Interval interval;
  std::vector<double> us;
  std::vector<double> atoms;
  std::vector<uint8_t> flagged;  // busemann flavor: pair without coalescence
  double total() const;
  double mass(Interval sub) const;  // half-open, like the boundary measure
};

// increments of a distance profile D(z, u+2^{-n}) - D(z, u)
VariationMeasure variation_measure(const DistanceProfile& profile, int n,
                                   const LqgParams& params, Interval I);

// mask-restricted pair distances D(u, u+2^{-n}; half-disk of radius 2^{-n}
// about the pair midpoint), computed on masked copies of the base graph
VariationMeasure local_proxy_measure(const MetricGraph& base, int n, const LqgParams& params,
                                     Interval I);

// far-tree Busemann differences from coalescence records of the same level;
// pairs without a detected coalescence point keep their atom but are flagged
VariationMeasure busemann_variation_measure(const std::vector<CoalescenceRecord>& records,
                                            int n, const LqgParams& params, Interval I);

// shared level/geometry validation: 2^{-n} must be a grid multiple and >= 8
// cells wide; exposed for callers that pre-validate configs
void check_dyadic_level(int n, double spacing);

}  // namespace lqg

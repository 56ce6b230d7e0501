#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "lqg/metric.hpp"
#include "lqg/params.hpp"

namespace lqg {

// Predecessor chain from target back to its source: [target, ..., source].
std::vector<uint32_t> trace_geodesic(const GeodesicTree& tree, uint32_t target);

// Deepest common vertex of the two predecessor paths (lowest common ancestor
// in the geodesic tree); none when the paths reach distinct sources without
// meeting. u == u_plus returns u.
std::optional<uint32_t> coalescence_point(const GeodesicTree& tree, uint32_t u,
                                          uint32_t u_plus);

// dist[u] - dist[u_plus] in the given tree. When the geodesics from u and
// u_plus coalesce at w this equals D(w,u) - D(w,u_plus) by telescoping.
double busemann_diff(const GeodesicTree& far_tree, uint32_t u, uint32_t u_plus);

struct CoalescenceRecord {
  double u = 0, u_plus = 0;  // boundary positions of the dyadic pair
  uint32_t u_vid = kNoVertex, up_vid = kNoVertex;
  std::optional<uint32_t> w;  // coalescence vertex in the far tree
  double radius = std::numeric_limits<double>::infinity();  // |w - midpoint|
  bool contained = false;      // both legs stay in the alpha1 disk until w
  bool ref_consistent = true;  // checked reference trees also pass through w
  double busemann = std::numeric_limits<double>::quiet_NaN();
  bool good = false;
};

// Record for one dyadic pair (u, u+2^{-n}) against the far tree. Containment
// is measured in the disk of radius 2^{-n(1-alpha1)} about the pair midpoint.
CoalescenceRecord make_record(const MetricGraph& g, const GeodesicTree& far_tree, double u,
                              double u_plus, int n, const CoalescenceConfig& cfg);

// Clears ref_consistent when the reference tree's geodesic to u or u_plus
// does not pass through the record's coalescence point w.
void check_reference_tree(CoalescenceRecord& rec, const GeodesicTree& ref_tree);

// good <=> w exists AND radius <= 2^{-n(1-alpha2)} AND legs contained AND all
// checked reference trees ran through w. Closed inequality at the radius
// threshold (a tie counts as good). Flags are written back into the records;
// the returned list holds the good indices.
std::vector<size_t> classify_good(std::vector<CoalescenceRecord>& records, int n,
                                  const CoalescenceConfig& cfg);

}  // namespace lqg

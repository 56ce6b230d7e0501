#include "lqg/geodesics.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace lqg {

std::vector<uint32_t> trace_geodesic(const GeodesicTree& tree, uint32_t target) {
  if (target >= tree.dist.size())
    throw std::invalid_argument("trace_geodesic: vertex out of range");
  if (!std::isfinite(tree.dist[target]))
    throw std::runtime_error("trace_geodesic: target unreachable");
  std::vector<uint32_t> path;
  uint32_t v = target;
  while (v != kNoVertex) {
    path.push_back(v);
    if (path.size() > tree.dist.size())
      throw std::runtime_error("trace_geodesic: predecessor cycle");
    v = tree.pred[v];
  }
  return path;
}

std::optional<uint32_t> coalescence_point(const GeodesicTree& tree, uint32_t u,
                                          uint32_t u_plus) {
  if (u == u_plus) return u;
  std::vector<uint32_t> pu = trace_geodesic(tree, u);
  std::unordered_set<uint32_t> on_pu(pu.begin(), pu.end());
  uint32_t v = u_plus;
  while (v != kNoVertex) {
    if (on_pu.count(v)) return v;
    v = tree.pred[v];
  }
  return std::nullopt;
}

double busemann_diff(const GeodesicTree& far_tree, uint32_t u, uint32_t u_plus) {
  if (u >= far_tree.dist.size() || u_plus >= far_tree.dist.size())
    throw std::invalid_argument("busemann_diff: vertex out of range");
  double a = far_tree.dist[u], b = far_tree.dist[u_plus];
  if (!std::isfinite(a) || !std::isfinite(b))
    throw std::runtime_error("busemann_diff: unreachable vertex");
  return a - b;
}

CoalescenceRecord make_record(const MetricGraph& g, const GeodesicTree& far_tree, double u,
                              double u_plus, int n, const CoalescenceConfig& cfg) {
  CoalescenceRecord rec;
  rec.u = u;
  rec.u_plus = u_plus;
  rec.u_vid = g.nearest_vertex(u, 0.0);
  rec.up_vid = g.nearest_vertex(u_plus, 0.0);
  double mid = 0.5 * (u + u_plus);
  double contain_r = std::exp2(-n * (1.0 - cfg.alpha1));

  bool reach = std::isfinite(far_tree.dist[rec.u_vid]) &&
               std::isfinite(far_tree.dist[rec.up_vid]);
  if (!reach) return rec;
  rec.busemann = far_tree.dist[rec.u_vid] - far_tree.dist[rec.up_vid];

  rec.w = coalescence_point(far_tree, rec.u_vid, rec.up_vid);
  if (!rec.w) return rec;

  double wx = g.px(*rec.w) - mid, wy = g.py(*rec.w);
  rec.radius = std::hypot(wx, wy);

  // legs: predecessor chains from u and u_plus up to and including w
  rec.contained = true;
  for (uint32_t start : {rec.u_vid, rec.up_vid}) {
    uint32_t v = start;
    while (true) {
      double dx = g.px(v) - mid, dy = g.py(v);
      if (std::hypot(dx, dy) > contain_r) {
        rec.contained = false;
        break;
      }
      if (v == *rec.w) break;
      v = far_tree.pred[v];
      if (v == kNoVertex) {  // w not on this chain (cannot happen for an LCA)
        rec.contained = false;
        break;
      }
    }
    if (!rec.contained) break;
  }
  return rec;
}

void check_reference_tree(CoalescenceRecord& rec, const GeodesicTree& ref_tree) {
  if (!rec.w) {
    rec.ref_consistent = false;
    return;
  }
  for (uint32_t start : {rec.u_vid, rec.up_vid}) {
    if (!std::isfinite(ref_tree.dist[start])) {
      rec.ref_consistent = false;
      return;
    }
    uint32_t v = start;
    bool through = false;
    while (v != kNoVertex) {
      if (v == *rec.w) {
        through = true;
        break;
      }
      v = ref_tree.pred[v];
    }
    if (!through) {
      rec.ref_consistent = false;
      return;
    }
  }
}

std::vector<size_t> classify_good(std::vector<CoalescenceRecord>& records, int n,
                                  const CoalescenceConfig& cfg) {
  double rad_budget = std::exp2(-n * (1.0 - cfg.alpha2));
  std::vector<size_t> good;
  for (size_t k = 0; k < records.size(); ++k) {
    auto& r = records[k];
    r.good = r.w.has_value() && r.radius <= rad_budget && r.contained && r.ref_consistent;
    if (r.good) good.push_back(k);
  }
  return good;
}

}  // namespace lqg

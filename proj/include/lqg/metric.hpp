#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lqg/gff.hpp"
#include "lqg/params.hpp"

namespace lqg {

// Gaussian blur with standard deviation eps/sqrt(2) in physical units,
// separable, truncated at 4 sigma, mass-normalized, mirror-reflected at every
// grid edge (Neumann at the boundary row). Requires eps >= spacing.
FieldGrid mollify(const FieldGrid& field, double eps);

constexpr uint32_t kNoVertex = std::numeric_limits<uint32_t>::max();

using Mask = std::vector<uint8_t>;  // per-vertex allowed flag, size nx*ny

// First-passage weight graph on the grid: 8-neighbor lattice, edge weight
//   a_eps^{-1} * len(e) * exp(xi * hstar(midpoint of e))
// with hstar sampled by bilinear interpolation (axis edges average their two
// endpoints, diagonal edges the four cell corners). Weight arrays are shared
// between masked copies; the mask restricts traversal, never the arrays.
class MetricGraph {
 public:
  int nx = 0, ny = 0;
  double spacing = 0, origin_x = 0;
  double epsilon = 0, a_eps = 1.0, xi = 0;

  std::shared_ptr<const std::vector<double>> w_e, w_n, w_ne, w_nw;
  std::shared_ptr<const Mask> mask;  // null = everything allowed

  uint32_t vid(int i, int j) const { return static_cast<uint32_t>(j) * nx + i; }
  int vx(uint32_t v) const { return static_cast<int>(v % nx); }
  int vy(uint32_t v) const { return static_cast<int>(v / nx); }
  double px(uint32_t v) const { return origin_x + vx(v) * spacing; }
  double py(uint32_t v) const { return vy(v) * spacing; }
  size_t size() const { return static_cast<size_t>(nx) * ny; }
  bool allowed(uint32_t v) const { return !mask || (*mask)[v]; }

  // nearest grid vertex to a boundary/bulk point (must be in-grid)
  uint32_t nearest_vertex(double x, double y) const;

  // cheap masked copy sharing the weight arrays; masks intersect
  MetricGraph restricted(Mask m) const;
};

MetricGraph build_graph(const FieldGrid& field, const LqgParams& params, double epsilon,
                        double a_eps = 1.0, std::optional<Mask> mask = std::nullopt);

// Same weights, but from a field that is already mollified (used when many
// graphs share one blur pass).
MetricGraph build_graph_premollified(const FieldGrid& hstar, const LqgParams& params,
                                     double epsilon, double a_eps = 1.0,
                                     std::optional<Mask> mask = std::nullopt);

// Half-disk {|p - (cx,0)| <= r, y >= 0} intersected with the grid.
Mask half_disk_mask(const MetricGraph& g, double cx, double r);

struct GeodesicTree {
  std::vector<uint32_t> sources;
  std::vector<double> dist;    // +inf if unreachable / masked out
  std::vector<uint32_t> pred;  // kNoVertex for sources and unreachable
};

// Exact multi-source Dijkstra. Deterministic: the priority queue orders by
// (distance, vertex index) and predecessor ties go to the smaller vertex.
GeodesicTree shortest_paths(const MetricGraph& graph, const std::vector<uint32_t>& sources);

double distance(const GeodesicTree& tree, uint32_t target);

// Single-pair distance with early exit (used for the many small masked runs).
double pair_distance(const MetricGraph& graph, uint32_t src, uint32_t dst);

// Median raw (a_eps = 1) distance between two bulk points at unit physical
// separation, over `trials` independent fields; its value is what callers pass
// as a_eps when they want median unit distance ~ 1. `field_provider` lets
// tests substitute deterministic fields; default draws from `spec`.
double calibrate_a_eps(const LqgParams& params, double epsilon, const GridSpec& spec,
                       int trials, uint64_t seed,
                       const std::function<FieldGrid(uint64_t)>& field_provider = {});

void save_tree(const GeodesicTree& tree, const std::string& path);
GeodesicTree load_tree(const std::string& path);

}  // namespace lqg

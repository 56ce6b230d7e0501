#include "lqg/metric.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <queue>
#include <stdexcept>

namespace lqg {

namespace {

// mirror reflection of index k into [0, n-1] (reflect-101, Neumann)
int reflect(int k, int n) {
  while (k < 0 || k >= n) {
    if (k < 0) k = -k;
    if (k >= n) k = 2 * (n - 1) - k;
  }
  return k;
}

std::vector<double> gauss_kernel(double sigma) {
  int rad = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> k(2 * rad + 1);
  double sum = 0;
  for (int t = -rad; t <= rad; ++t) {
    k[t + rad] = std::exp(-0.5 * t * t / (sigma * sigma));
    sum += k[t + rad];
  }
  for (auto& v : k) v /= sum;
  return k;
}

}  // namespace

FieldGrid mollify(const FieldGrid& field, double eps) {
  if (eps < field.spacing)
    throw std::invalid_argument("mollify: eps below grid resolution (need eps >= spacing)");
  double sigma = eps / (std::sqrt(2.0) * field.spacing);
  std::vector<double> k = gauss_kernel(sigma);
  int rad = (static_cast<int>(k.size()) - 1) / 2;

  FieldGrid out = field;
  std::vector<double> tmp(field.values.size());
  // horizontal pass
  for (int j = 0; j < field.ny; ++j)
    for (int i = 0; i < field.nx; ++i) {
      double s = 0;
      for (int t = -rad; t <= rad; ++t) s += k[t + rad] * field.at(reflect(i + t, field.nx), j);
      tmp[field.idx(i, j)] = s;
    }
  // vertical pass (reflection across the boundary row j=0 is the Neumann one)
  for (int j = 0; j < field.ny; ++j)
    for (int i = 0; i < field.nx; ++i) {
      double s = 0;
      for (int t = -rad; t <= rad; ++t)
        s += k[t + rad] * tmp[field.idx(i, reflect(j + t, field.ny))];
      out.at(i, j) = s;
    }
  return out;
}

uint32_t MetricGraph::nearest_vertex(double x, double y) const {
  double gx = (x - origin_x) / spacing, gy = y / spacing;
  int i = static_cast<int>(std::lround(gx)), j = static_cast<int>(std::lround(gy));
  if (i < 0 || i >= nx || j < 0 || j >= ny)
    throw std::domain_error("nearest_vertex: point outside grid");
  return vid(i, j);
}

MetricGraph MetricGraph::restricted(Mask m) const {
  if (m.size() != size()) throw std::invalid_argument("restricted: mask size mismatch");
  if (mask)
    for (size_t v = 0; v < m.size(); ++v) m[v] = m[v] && (*mask)[v];
  bool any = false;
  for (uint8_t b : m)
    if (b) {
      any = true;
      break;
    }
  if (!any) throw std::invalid_argument("restricted: empty mask");
  MetricGraph g = *this;
  g.mask = std::make_shared<const Mask>(std::move(m));
  return g;
}

MetricGraph build_graph_premollified(const FieldGrid& hstar, const LqgParams& params,
                                     double epsilon, double a_eps, std::optional<Mask> mask) {
  if (!(a_eps > 0)) throw std::invalid_argument("build_graph: a_eps must be positive");
  MetricGraph g;
  g.nx = hstar.nx;
  g.ny = hstar.ny;
  g.spacing = hstar.spacing;
  g.origin_x = hstar.origin_x;
  g.epsilon = epsilon;
  g.a_eps = a_eps;
  g.xi = params.xi;

  const size_t n = g.size();
  const double xi = params.xi;
  // per-node half-exponential e^{xi h*/2}: axis weight = d*S_u*S_v,
  // diagonal = d*sqrt(2)*sqrt(S_a S_b S_c S_d)  (midpoint bilinear sampling)
  std::vector<double> s(n);
  for (size_t v = 0; v < n; ++v) {
    s[v] = std::exp(0.5 * xi * hstar.values[v]);
    if (!std::isfinite(s[v]) || s[v] <= 0)
      throw std::runtime_error("build_graph: non-finite edge weight");
  }
  const double ax = hstar.spacing / a_eps;
  const double dg = hstar.spacing * std::sqrt(2.0) / a_eps;
  auto we = std::make_shared<std::vector<double>>(n, 0.0);
  auto wn = std::make_shared<std::vector<double>>(n, 0.0);
  auto wne = std::make_shared<std::vector<double>>(n, 0.0);
  auto wnw = std::make_shared<std::vector<double>>(n, 0.0);
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) {
      uint32_t v = g.vid(i, j);
      if (i + 1 < g.nx) (*we)[v] = ax * s[v] * s[v + 1];
      if (j + 1 < g.ny) (*wn)[v] = ax * s[v] * s[v + g.nx];
      if (i + 1 < g.nx && j + 1 < g.ny)
        (*wne)[v] = dg * std::sqrt(s[v] * s[v + 1] * s[v + g.nx] * s[v + g.nx + 1]);
      if (i > 0 && j + 1 < g.ny)
        (*wnw)[v] = dg * std::sqrt(s[v] * s[v - 1] * s[v + g.nx] * s[v + g.nx - 1]);
    }
  g.w_e = std::move(we);
  g.w_n = std::move(wn);
  g.w_ne = std::move(wne);
  g.w_nw = std::move(wnw);
  if (mask) {
    if (mask->size() != n) throw std::invalid_argument("build_graph: mask size mismatch");
    bool any = false;
    for (uint8_t b : *mask) any = any || b;
    if (!any) throw std::invalid_argument("build_graph: empty mask");
    g.mask = std::make_shared<const Mask>(std::move(*mask));
  }
  return g;
}

MetricGraph build_graph(const FieldGrid& field, const LqgParams& params, double epsilon,
                        double a_eps, std::optional<Mask> mask) {
  return build_graph_premollified(mollify(field, epsilon), params, epsilon, a_eps,
                                  std::move(mask));
}

Mask half_disk_mask(const MetricGraph& g, double cx, double r) {
  Mask m(g.size(), 0);
  for (int j = 0; j < g.ny; ++j) {
    double y = j * g.spacing;
    if (y > r) break;
    for (int i = 0; i < g.nx; ++i) {
      double x = g.origin_x + i * g.spacing - cx;
      if (x * x + y * y <= r * r) m[g.vid(i, j)] = 1;
    }
  }
  return m;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct QItem {
  double d;
  uint32_t v;
  bool operator>(const QItem& o) const { return d != o.d ? d > o.d : v > o.v; }
};

// Core Dijkstra; if `stop` is a valid vertex, exits once it is settled.
GeodesicTree dijkstra(const MetricGraph& g, const std::vector<uint32_t>& sources,
                      uint32_t stop) {
  const size_t n = g.size();
  GeodesicTree t;
  t.sources = sources;
  t.dist.assign(n, kInf);
  t.pred.assign(n, kNoVertex);
  if (sources.empty()) throw std::invalid_argument("shortest_paths: empty source set");

  std::priority_queue<QItem, std::vector<QItem>, std::greater<QItem>> q;
  for (uint32_t s : sources) {
    if (s >= n) throw std::invalid_argument("shortest_paths: source out of range");
    if (!g.allowed(s)) throw std::invalid_argument("shortest_paths: source outside mask");
    if (t.dist[s] > 0) {
      t.dist[s] = 0;
      q.push({0.0, s});
    }
  }

  const auto& we = *g.w_e;
  const auto& wn = *g.w_n;
  const auto& wne = *g.w_ne;
  const auto& wnw = *g.w_nw;
  const int nx = g.nx, ny = g.ny;
  std::vector<uint8_t> done(n, 0);

  auto relax = [&](uint32_t u, uint32_t v, double w) {
    if (!g.allowed(v)) return;
    double nd = t.dist[u] + w;
    if (nd < t.dist[v]) {
      t.dist[v] = nd;
      t.pred[v] = u;
      q.push({nd, v});
    } else if (nd == t.dist[v] && t.pred[v] != kNoVertex && u < t.pred[v]) {
      t.pred[v] = u;  // deterministic tie rule: smallest predecessor index
    }
  };

  while (!q.empty()) {
    auto [d, u] = q.top();
    q.pop();
    if (done[u]) continue;
    done[u] = 1;
    if (u == stop) break;
    int i = static_cast<int>(u % nx), j = static_cast<int>(u / nx);
    if (i + 1 < nx) relax(u, u + 1, we[u]);
    if (i > 0) relax(u, u - 1, we[u - 1]);
    if (j + 1 < ny) relax(u, u + nx, wn[u]);
    if (j > 0) relax(u, u - nx, wn[u - nx]);
    if (i + 1 < nx && j + 1 < ny) relax(u, u + nx + 1, wne[u]);
    if (i > 0 && j > 0) relax(u, u - nx - 1, wne[u - nx - 1]);
    if (i > 0 && j + 1 < ny) relax(u, u + nx - 1, wnw[u]);
    if (i + 1 < nx && j > 0) relax(u, u - nx + 1, wnw[u - nx + 1]);
  }
  return t;
}

}  // namespace

GeodesicTree shortest_paths(const MetricGraph& graph, const std::vector<uint32_t>& sources) {
  return dijkstra(graph, sources, kNoVertex);
}

double distance(const GeodesicTree& tree, uint32_t target) {
  if (target >= tree.dist.size()) throw std::invalid_argument("distance: vertex out of range");
  return tree.dist[target];
}

double pair_distance(const MetricGraph& graph, uint32_t src, uint32_t dst) {
  if (!graph.allowed(dst)) return kInf;
  return dijkstra(graph, {src}, dst).dist[dst];
}

double calibrate_a_eps(const LqgParams& params, double epsilon, const GridSpec& spec,
                       int trials, uint64_t seed,
                       const std::function<FieldGrid(uint64_t)>& field_provider) {
  if (trials < 50) throw std::invalid_argument("calibrate_a_eps: need trials >= 50");
  double xc = spec.origin_x + 0.5 * (spec.nx - 1) * spec.spacing;
  double yc = 0.5 * (spec.ny - 1) * spec.spacing;
  if ((spec.nx - 1) * spec.spacing < 1.2)
    throw std::invalid_argument("calibrate_a_eps: grid too narrow for unit separation");

  std::function<FieldGrid(uint64_t)> provider = field_provider;
  std::shared_ptr<GridSampler> sampler;
  if (!provider) {
    auto method = (static_cast<long>(spec.nx) * spec.ny <= 4096) ? SampleMethod::exact
                                                                 : SampleMethod::hierarchical;
    sampler = std::make_shared<GridSampler>(spec, method);
    provider = [sampler](uint64_t s) { return sampler->draw(s); };
  }

  std::vector<double> d(trials);
  for (int t = 0; t < trials; ++t) {
    FieldGrid f = provider(mix_seed(seed, static_cast<uint64_t>(t)));
    MetricGraph g = build_graph(f, params, epsilon, 1.0);
    uint32_t a = g.nearest_vertex(xc - 0.5, yc), b = g.nearest_vertex(xc + 0.5, yc);
    d[t] = pair_distance(g, a, b);
    if (!std::isfinite(d[t]) || d[t] <= 0)
      throw std::runtime_error("calibrate_a_eps: degenerate distance sample");
  }
  std::sort(d.begin(), d.end());
  return trials % 2 == 1 ? d[trials / 2] : 0.5 * (d[trials / 2 - 1] + d[trials / 2]);
}

void save_tree(const GeodesicTree& tree, const std::string& path) {
  std::ofstream o(path, std::ios::binary);
  if (!o) throw std::runtime_error("cannot open for writing: " + path);
  uint64_t n = tree.dist.size(), ns = tree.sources.size();
  o.write("LQGT", 4);
  o.write(reinterpret_cast<const char*>(&n), 8);
  o.write(reinterpret_cast<const char*>(&ns), 8);
  o.write(reinterpret_cast<const char*>(tree.sources.data()),
          static_cast<std::streamsize>(ns * 4));
  o.write(reinterpret_cast<const char*>(tree.dist.data()), static_cast<std::streamsize>(n * 8));
  o.write(reinterpret_cast<const char*>(tree.pred.data()), static_cast<std::streamsize>(n * 4));
  if (!o) throw std::runtime_error("write failed: " + path);
}

GeodesicTree load_tree(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "LQGT", 4) != 0)
    throw std::runtime_error("not a tree file: " + path);
  uint64_t n = 0, ns = 0;
  in.read(reinterpret_cast<char*>(&n), 8);
  in.read(reinterpret_cast<char*>(&ns), 8);
  GeodesicTree t;
  t.sources.resize(ns);
  t.dist.resize(n);
  t.pred.resize(n);
  in.read(reinterpret_cast<char*>(t.sources.data()), static_cast<std::streamsize>(ns * 4));
  in.read(reinterpret_cast<char*>(t.dist.data()), static_cast<std::streamsize>(n * 8));
  in.read(reinterpret_cast<char*>(t.pred.data()), static_cast<std::streamsize>(n * 4));
  if (!in) throw std::runtime_error("tree file truncated: " + path);
  return t;
}

}  // namespace lqg

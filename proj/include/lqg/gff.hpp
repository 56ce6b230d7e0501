#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "lqg/rng.hpp"

namespace lqg {

using cplx = std::complex<double>;

// Free-boundary half-plane kernel
//   G(v,w) = log(|v|+^2 |w|+^2) - log|v-w| - log|v-conj(w)|,  |v|+ = max(|v|,1).
// Rejects v == w (diagonal singularity).
double green(cplx v, cplx w);

// Quadrature average of G(v,.) over the uniform measure on the unit semicircle
// (m midpoint nodes). Analytically zero for every v; kept explicit so the sampler
// can enforce the zero-average constraint at quadrature level.
double green_semicircle_avg(cplx v, int m = 512);

// Variance of the semicircle average of radius r about boundary point x
// (the kernel's singular part integrates in closed form; the |.|+ part is an
// m-point arc quadrature).
double semicircle_average_variance(double x, double r, int m = 128);

// Variance of the full-circle average of radius r about bulk point v (Im v > r).
double circle_average_variance(cplx v, double r, int m = 128);

struct ProbeSet {
  std::vector<cplx> points;        // pairwise distinct, Im >= 0
  std::vector<double> radius;      // optional per-probe regularization radius;
                                   // empty => auto (min pairwise distance / 2pi)
  void validate() const;
};

// Joint Gaussian sampler at a finite probe set with the constrained covariance
//   C(v,w) = G(v,w) - Gbar(v) - Gbar(w) + Gbarbar
// (Gbar by quadrature). Probe variances are circle-average variances at the
// per-probe regularization radius. Dense LDLT with escalating diagonal jitter;
// raises std::runtime_error with diagnostics if the matrix is not PSD after
// regularization.
class ExactSampler {
 public:
  explicit ExactSampler(const ProbeSet& probes);
  ~ExactSampler();
  ExactSampler(ExactSampler&&) noexcept;

  int size() const;
  std::vector<double> draw(uint64_t seed) const;    // one joint draw
  void draw_into(Rng& rng, std::vector<double>& out) const;
  double covariance(int i, int j) const;            // the matrix that was factored
  double reconstruction_max_error() const;          // max |MM^T - C|

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

std::vector<double> sample_exact(const ProbeSet& probes, uint64_t seed);

struct GridSpec {
  int nx = 0, ny = 0;      // row 0 is the boundary
  double spacing = 0;
  double origin_x = 0;     // x of column 0; row j sits at y = j*spacing
};

enum class SampleMethod { exact, hierarchical };

struct FieldGrid {
  double spacing = 0;
  int nx = 0, ny = 0;
  double origin_x = 0;
  std::vector<double> values;  // row-major, boundary row first
  uint64_t seed = 0;
  bool normalized = false;
  bool approximate_sampler = false;  // true for hierarchical refinement output

  size_t idx(int i, int j) const { return static_cast<size_t>(j) * nx + i; }
  double at(int i, int j) const { return values[idx(i, j)]; }
  double& at(int i, int j) { return values[idx(i, j)]; }
  double x(int i) const { return origin_x + i * spacing; }
  double y(int j) const { return j * spacing; }
  double max_x() const { return x(nx - 1); }
  double max_y() const { return y(ny - 1); }
  bool contains(double px, double py) const;
  double interp(double px, double py) const;  // bilinear
};

// Large-lattice sampler. Caches the covariance factorization for a geometry, so
// drawing many fields is cheap. method=exact requires nx*ny <= 4096.
class GridSampler {
 public:
  GridSampler(const GridSpec& spec, SampleMethod method);
  ~GridSampler();
  GridSampler(GridSampler&&) noexcept;

  FieldGrid draw(uint64_t seed) const;
  SampleMethod method() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

FieldGrid sample_grid(const GridSpec& spec, uint64_t seed, SampleMethod method);

// Semicircle average of the lattice field about boundary point (x,0), radius r.
// Arc quadrature (>= 64 nodes, scaled with r/spacing) with bilinear interpolation.
// Requires r >= 2*spacing and the semicircle inside the grid.
double circle_average(const FieldGrid& field, double x, double r);

// Full-circle average about a bulk center (both semicircle-average flavors are
// linear in the field).
double circle_average_bulk(const FieldGrid& field, cplx center, double r);

// Subtracts the unit-semicircle average about 0. Exact no-op on an already
// normalized field.
FieldGrid normalize(FieldGrid field);

FieldGrid add_function(FieldGrid field, const std::function<double(double, double)>& f);

// Field file format: magic "LQGF", version u32=1, nx u64, ny u64, spacing f64,
// origin_x f64, seed u64, normalized u8, then nx*ny little-endian f64 row-major
// (boundary row first).
void save_field(const FieldGrid& field, const std::string& path);
FieldGrid load_field(const std::string& path);

}  // namespace lqg

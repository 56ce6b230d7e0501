#include "lqg/gff.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace lqg {

namespace {

constexpr double kPi = std::numbers::pi;

double log_plus(double a) { return a > 1.0 ? std::log(a) : 0.0; }

[[noreturn]] void fail_domain(const std::string& m) { throw std::domain_error(m); }
[[noreturn]] void fail_arg(const std::string& m) { throw std::invalid_argument(m); }

}  // namespace

double green(cplx v, cplx w) {
  if (v == w) fail_arg("green: diagonal v == w is singular");
  double vp = std::max(std::abs(v), 1.0);
  double wp = std::max(std::abs(w), 1.0);
  return 2.0 * (std::log(vp) + std::log(wp)) - std::log(std::abs(v - w)) -
         std::log(std::abs(v - std::conj(w)));
}

double green_semicircle_avg(cplx v, int m) {
  double s = 0;
  for (int k = 0; k < m; ++k) {
    double th = kPi * (k + 0.5) / m;
    s += green(v, cplx(std::cos(th), std::sin(th)));
  }
  return s / m;
}

double semicircle_average_variance(double x, double r, int m) {
  if (r <= 0) fail_arg("semicircle_average_variance: r must be positive");
  double ax = std::abs(x);
  double avg;
  if (ax + r <= 1.0) {
    avg = 0.0;
  } else if (ax - r >= 1.0) {
    avg = std::log(ax);
  } else {
    double s = 0;
    for (int k = 0; k < m; ++k) {
      double th = kPi * (k + 0.5) / m;
      s += log_plus(std::abs(cplx(x + r * std::cos(th), r * std::sin(th))));
    }
    avg = s / m;
  }
  return 4.0 * avg - 2.0 * std::log(r);
}

double circle_average_variance(cplx v, double r, int m) {
  double y = v.imag();
  if (r <= 0) fail_arg("circle_average_variance: r must be positive");
  if (y <= r) fail_arg("circle_average_variance: requires Im(v) > r");
  double av = std::abs(v);
  double avg;
  if (av + r <= 1.0) {
    avg = 0.0;
  } else if (av - r >= 1.0) {
    avg = std::log(av);
  } else {
    double s = 0;
    for (int k = 0; k < m; ++k) {
      double th = 2.0 * kPi * (k + 0.5) / m;
      s += log_plus(std::abs(v + r * cplx(std::cos(th), std::sin(th))));
    }
    avg = s / m;
  }
  return 4.0 * avg - std::log(r) - std::log(2.0 * y);
}

void ProbeSet::validate() const {
  if (points.empty()) fail_arg("ProbeSet: empty");
  if (!radius.empty() && radius.size() != points.size())
    fail_arg("ProbeSet: radius list must match point count");
  for (size_t i = 0; i < points.size(); ++i) {
    if (points[i].imag() < 0) fail_arg("ProbeSet: points must lie in the closed upper half-plane");
    for (size_t j = i + 1; j < points.size(); ++j)
      if (points[i] == points[j]) fail_arg("ProbeSet: points must be pairwise distinct");
  }
}

// ---------------------------------------------------------------------------
// Dense Gaussian factor: covariance -> sampling matrix M with cov = M M^T.
// LDLT with escalating diagonal jitter; clamps roundoff-negative pivots.

namespace {

struct GaussianFactor {
  Eigen::MatrixXd M;
  double jitter_used = 0;

  static GaussianFactor build(const Eigen::MatrixXd& C) {
    const int n = static_cast<int>(C.rows());
    double mean_diag = C.diagonal().cwiseAbs().mean();
    if (!(mean_diag > 0)) mean_diag = 1.0;
    double last_min_pivot = 0;
    for (double jit : {0.0, 1e-12, 1e-11, 1e-10, 1e-9, 1e-8}) {
      Eigen::MatrixXd A = C;
      if (jit > 0) A.diagonal().array() += jit * mean_diag;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
      if (ldlt.info() != Eigen::Success) continue;
      Eigen::VectorXd d = ldlt.vectorD();
      double dmax = d.cwiseAbs().maxCoeff();
      last_min_pivot = d.minCoeff();
      if (last_min_pivot < -1e-10 * std::max(dmax, 1.0)) continue;
      Eigen::VectorXd sq = d.cwiseMax(0.0).cwiseSqrt();
      GaussianFactor f;
      f.M = ldlt.transpositionsP().transpose() *
            Eigen::MatrixXd(Eigen::MatrixXd(ldlt.matrixL()) * sq.asDiagonal());
      f.jitter_used = jit * mean_diag;
      return f;
    }
    throw std::runtime_error(
        "covariance not positive semidefinite after regularization (n=" + std::to_string(n) +
        ", min pivot=" + std::to_string(last_min_pivot) +
        "); quadrature of the constraint kernel likely failed");
  }

  void draw_into(Rng& rng, std::vector<double>& out) const {
    const int n = static_cast<int>(M.rows());
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z[i] = rng.gaussian();
    Eigen::VectorXd v = M * z;
    out.assign(v.data(), v.data() + n);
  }
};

double probe_variance(cplx p, double r) {
  return p.imag() == 0 ? semicircle_average_variance(p.real(), r)
                       : circle_average_variance(p, r);
}

std::vector<double> auto_radii(const std::vector<cplx>& pts) {
  const size_t n = pts.size();
  std::vector<double> r(n);
  for (size_t i = 0; i < n; ++i) {
    double dmin = std::numeric_limits<double>::infinity();
    for (size_t j = 0; j < n; ++j)
      if (j != i) dmin = std::min(dmin, std::abs(pts[i] - pts[j]));
    if (!std::isfinite(dmin)) dmin = 1.0;  // single probe
    // min-distance/(2pi): makes the discrete log-energy of circle-quadrature
    // probe sets match the continuum energy to O(1/m^2).
    double ri = dmin / (2.0 * kPi);
    if (pts[i].imag() > 0) ri = std::min(ri, pts[i].imag() / 2.0);
    r[i] = std::min(ri, 0.5);
  }
  return r;
}

}  // namespace

// ---------------------------------------------------------------------------
// ExactSampler

struct ExactSampler::Impl {
  Eigen::MatrixXd C;
  GaussianFactor factor;
};

ExactSampler::ExactSampler(const ProbeSet& probes) : impl_(new Impl) {
  probes.validate();
  const auto& pts = probes.points;
  const int n = static_cast<int>(pts.size());
  if (n > 4096) fail_arg("ExactSampler: probe count exceeds dense budget (4096)");
  std::vector<double> radii = probes.radius.empty() ? auto_radii(pts) : probes.radius;
  for (int i = 0; i < n; ++i) {
    if (radii[i] <= 0) fail_arg("ExactSampler: regularization radius must be positive");
    if (pts[i].imag() > 0 && radii[i] >= pts[i].imag())
      fail_arg("ExactSampler: bulk probe radius must be below Im(p)");
  }

  const int m = 512;
  std::vector<double> gb(n);
  for (int i = 0; i < n; ++i) gb[i] = green_semicircle_avg(pts[i], m);
  // rho-average of Gbar, on an offset node set so no diagonal is hit.
  double gbb = 0;
  for (int k = 0; k < m; ++k) {
    double th = kPi * (k + 0.25) / m;
    gbb += green_semicircle_avg(cplx(std::cos(th), std::sin(th)), m);
  }
  gbb /= m;

  Eigen::MatrixXd C(n, n);
  for (int i = 0; i < n; ++i) {
    C(i, i) = probe_variance(pts[i], radii[i]) - 2.0 * gb[i] + gbb;
    for (int j = i + 1; j < n; ++j) {
      double cij = green(pts[i], pts[j]) - gb[i] - gb[j] + gbb;
      C(i, j) = cij;
      C(j, i) = cij;
    }
  }
  impl_->factor = GaussianFactor::build(C);
  impl_->C = std::move(C);
}

ExactSampler::~ExactSampler() = default;
ExactSampler::ExactSampler(ExactSampler&&) noexcept = default;

int ExactSampler::size() const { return static_cast<int>(impl_->C.rows()); }

std::vector<double> ExactSampler::draw(uint64_t seed) const {
  Rng rng(seed);
  std::vector<double> out;
  impl_->factor.draw_into(rng, out);
  return out;
}

void ExactSampler::draw_into(Rng& rng, std::vector<double>& out) const {
  impl_->factor.draw_into(rng, out);
}

double ExactSampler::covariance(int i, int j) const { return impl_->C(i, j); }

double ExactSampler::reconstruction_max_error() const {
  const auto& M = impl_->factor.M;
  return (M * M.transpose() - impl_->C).cwiseAbs().maxCoeff();
}

std::vector<double> sample_exact(const ProbeSet& probes, uint64_t seed) {
  return ExactSampler(probes).draw(seed);
}

// ---------------------------------------------------------------------------
// FieldGrid basics

bool FieldGrid::contains(double px, double py) const {
  double eps = 1e-9 * spacing;
  return px >= origin_x - eps && px <= max_x() + eps && py >= -eps && py <= max_y() + eps;
}

double FieldGrid::interp(double px, double py) const {
  double gx = (px - origin_x) / spacing;
  double gy = py / spacing;
  if (gx < -1e-9 || gx > nx - 1 + 1e-9 || gy < -1e-9 || gy > ny - 1 + 1e-9)
    fail_domain("interp: point outside grid");
  int i = std::min(std::max(static_cast<int>(std::floor(gx)), 0), nx - 2);
  int j = std::min(std::max(static_cast<int>(std::floor(gy)), 0), ny - 2);
  double fx = gx - i, fy = gy - j;
  return (1 - fx) * (1 - fy) * at(i, j) + fx * (1 - fy) * at(i + 1, j) +
         (1 - fx) * fy * at(i, j + 1) + fx * fy * at(i + 1, j + 1);
}

// ---------------------------------------------------------------------------
// GridSampler

namespace {

void validate_spec(const GridSpec& s) {
  if (s.nx < 2 || s.ny < 2) fail_arg("GridSpec: need nx, ny >= 2");
  if (!(s.spacing > 0)) fail_arg("GridSpec: spacing must be positive");
  double cells = static_cast<double>(s.nx) * s.ny;
  if (cells > 64.0 * 1024 * 1024) fail_arg("GridSpec: grid exceeds memory budget");
}

// Exact covariance between two coarse boundary-lattice cells (used by the
// calibration model; formulas identical to the sampler's matrix entries).
double coarse_entry(cplx a, cplx b, double half_pitch) {
  if (a == b) return probe_variance(a, half_pitch);
  return green(a, b);
}

struct Level {
  int pitch;      // in fine cells
  double offset;  // stagger, in fine cells
  double sigma;   // noise std after calibration
};

// 1D hat-weight overlap sum_k w_k(u) w_k(v) for nodes at k*pitch+offset.
double hat_overlap_1d(double u, double v, double pitch, double offset) {
  double gu = (u - offset) / pitch, gv = (v - offset) / pitch;
  int ku = static_cast<int>(std::floor(gu)), kv = static_cast<int>(std::floor(gv));
  double fu = gu - ku, fv = gv - kv;
  double s = 0;
  // supports {ku, ku+1} and {kv, kv+1}
  if (ku == kv) s = (1 - fu) * (1 - fv) + fu * fv;
  else if (ku + 1 == kv) s = fu * (1 - fv);
  else if (kv + 1 == ku) s = fv * (1 - fu);
  return s;
}

}  // namespace

struct GridSampler::Impl {
  GridSpec spec;
  SampleMethod method;

  GaussianFactor factor;  // exact: full grid; hierarchical: coarse lattice
  int stride = 1;         // coarse stride (hierarchical)
  int cx = 0, cy = 0;     // coarse node counts
  std::vector<Level> levels;

  void build_exact() {
    const int n = spec.nx * spec.ny;
    const double d = spec.spacing, r = d / 2.0;
    Eigen::MatrixXd C(n, n);
    std::vector<cplx> pos(n);
    for (int j = 0; j < spec.ny; ++j)
      for (int i = 0; i < spec.nx; ++i)
        pos[static_cast<size_t>(j) * spec.nx + i] = cplx(spec.origin_x + i * d, j * d);
    for (int a = 0; a < n; ++a) {
      C(a, a) = probe_variance(pos[a], r);
      for (int b = a + 1; b < n; ++b) {
        double g = green(pos[a], pos[b]);
        C(a, b) = g;
        C(b, a) = g;
      }
    }
    factor = GaussianFactor::build(C);  // C dropped afterwards (memory)
  }

  void build_hierarchical() {
    // Smallest power-of-two stride that brings the coarse lattice under the
    // dense budget.
    stride = 2;
    auto nodes = [&](int s) {
      int a = (spec.nx - 1 + s - 1) / s + 1;
      int b = (spec.ny - 1 + s - 1) / s + 1;
      return std::pair<int, int>(a, b);
    };
    while (true) {
      auto [a, b] = nodes(stride);
      if (static_cast<long>(a) * b <= 4096) break;
      stride *= 2;
    }
    std::tie(cx, cy) = nodes(stride);

    const double d = spec.spacing, rc = stride * d / 2.0;
    const int n = cx * cy;
    Eigen::MatrixXd C(n, n);
    std::vector<cplx> pos(n);
    for (int j = 0; j < cy; ++j)
      for (int i = 0; i < cx; ++i)
        pos[static_cast<size_t>(j) * cx + i] =
            cplx(spec.origin_x + static_cast<double>(i) * stride * d,
                 static_cast<double>(j) * stride * d);
    for (int a = 0; a < n; ++a) {
      C(a, a) = probe_variance(pos[a], rc);
      for (int b = a + 1; b < n; ++b) {
        double g = green(pos[a], pos[b]);
        C(a, b) = g;
        C(b, a) = g;
      }
    }
    factor = GaussianFactor::build(C);

    levels.clear();
    int idx = 0;
    for (int p = stride / 2; p >= 1; p /= 2, ++idx)
      levels.push_back({p, (idx % 2 == 1) ? 0.5 * p : 0.0, 0.0});

    calibrate();
  }

  // Deterministic slope calibration: solve the single noise scale so the model
  // boundary increment variance grows with slope 2 per log separation over the
  // refinement band. Everything is a closed-form quadratic form; no sampling.
  void calibrate() {
    const double d = spec.spacing;
    const double base_var = 0.5 * std::log(2.0);  // one octave of boundary noise
    double xc = spec.origin_x + 0.5 * (spec.nx - 1) * d;

    std::vector<double> seps;
    for (double s = 4 * d; s <= 2.0 * stride * d + 1e-12 && s <= 0.4 * (spec.nx - 1) * d;
         s *= 2)
      seps.push_back(s);
    double phi = 1.0;
    if (seps.size() >= 2) {
      std::vector<double> L, A, R;
      for (double s : seps) {
        double xa = xc - s / 2, xb = xc + s / 2;
        // coarse part: bilinear weights on boundary row of the coarse lattice
        double pc = stride * d;
        auto wts = [&](double x) {
          double g = (x - spec.origin_x) / pc;
          int k = std::min(std::max(static_cast<int>(std::floor(g)), 0), cx - 2);
          return std::tuple<int, double>(k, g - k);
        };
        auto [ka, fa] = wts(xa);
        auto [kb, fb] = wts(xb);
        // combined weight vector c = w(a) - w(b) over involved nodes
        std::vector<std::pair<int, double>> cw;
        auto add = [&](int k, double w) {
          for (auto& e : cw)
            if (e.first == k) {
              e.second += w;
              return;
            }
          cw.push_back({k, w});
        };
        add(ka, 1 - fa);
        add(ka + 1, fa);
        add(kb, -(1 - fb));
        add(kb + 1, -fb);
        double a_var = 0;
        for (auto& [ki, wi] : cw)
          for (auto& [kj, wj] : cw) {
            cplx pi(spec.origin_x + static_cast<double>(ki) * pc, 0.0);
            cplx pj(spec.origin_x + static_cast<double>(kj) * pc, 0.0);
            a_var += wi * wj * coarse_entry(pi, pj, pc / 2);
          }
        // refinement part at unit scale (phi = 1)
        double r_var = 0;
        double ua = (xa - spec.origin_x) / d, ub = (xb - spec.origin_x) / d;
        for (auto& lv : levels) {
          double ty = hat_overlap_1d(0, 0, lv.pitch, lv.offset);
          double taa = hat_overlap_1d(ua, ua, lv.pitch, lv.offset) * ty;
          double tbb = hat_overlap_1d(ub, ub, lv.pitch, lv.offset) * ty;
          double tab = hat_overlap_1d(ua, ub, lv.pitch, lv.offset) * ty;
          r_var += 4.0 * base_var * (taa - 2 * tab + tbb);
        }
        L.push_back(std::log(s));
        A.push_back(a_var);
        R.push_back(r_var);
      }
      auto slope = [&](const std::vector<double>& y) {
        double lm = 0, ym = 0;
        for (size_t i = 0; i < L.size(); ++i) lm += L[i], ym += y[i];
        lm /= L.size();
        ym /= L.size();
        double num = 0, den = 0;
        for (size_t i = 0; i < L.size(); ++i) {
          num += (L[i] - lm) * (y[i] - ym);
          den += (L[i] - lm) * (L[i] - lm);
        }
        return num / den;
      };
      double sa = slope(A), sr = slope(R);
      if (sr > 1e-9) phi = (2.0 - sa) / sr;
      phi = std::min(std::max(phi, 0.25), 4.0);
    }
    for (auto& lv : levels) lv.sigma = std::sqrt(base_var * phi);
  }

  FieldGrid draw(uint64_t seed) const {
    FieldGrid f;
    f.spacing = spec.spacing;
    f.nx = spec.nx;
    f.ny = spec.ny;
    f.origin_x = spec.origin_x;
    f.seed = seed;
    f.normalized = false;
    f.approximate_sampler = (method == SampleMethod::hierarchical);
    f.values.assign(static_cast<size_t>(spec.nx) * spec.ny, 0.0);

    Rng rng(seed);
    std::vector<double> base;
    factor.draw_into(rng, base);

    if (method == SampleMethod::exact) {
      f.values = std::move(base);
      return f;
    }

    // bilinear upsample of the coarse draw
    for (int j = 0; j < spec.ny; ++j) {
      double gy = static_cast<double>(j) / stride;
      int j0 = std::min(static_cast<int>(gy), cy - 2);
      double fy = gy - j0;
      for (int i = 0; i < spec.nx; ++i) {
        double gx = static_cast<double>(i) / stride;
        int i0 = std::min(static_cast<int>(gx), cx - 2);
        double fx = gx - i0;
        size_t c00 = static_cast<size_t>(j0) * cx + i0;
        f.values[f.idx(i, j)] = (1 - fx) * (1 - fy) * base[c00] + fx * (1 - fy) * base[c00 + 1] +
                                (1 - fx) * fy * base[c00 + cx] + fx * fy * base[c00 + cx + 1];
      }
    }

    // per-octave refinement noise, mirrored across the boundary row so the
    // near-boundary variance doubling of the free-boundary field is reproduced
    std::vector<double> z;
    for (const auto& lv : levels) {
      const double p = lv.pitch, off = lv.offset;
      int kx0 = static_cast<int>(std::floor((0 - off) / p)) - 1;
      int kx1 = static_cast<int>(std::ceil((spec.nx - 1 - off) / p)) + 1;
      int ky0 = static_cast<int>(std::floor((-(spec.ny - 1.0) - off) / p)) - 1;
      int ky1 = static_cast<int>(std::ceil((spec.ny - 1 - off) / p)) + 1;
      int nkx = kx1 - kx0 + 1, nky = ky1 - ky0 + 1;
      z.resize(static_cast<size_t>(nkx) * nky);
      for (auto& v : z) v = rng.gaussian();

      auto bil = [&](double ux, double uy) {
        double gx = (ux - off) / p, gy = (uy - off) / p;
        int ix = static_cast<int>(std::floor(gx)), iy = static_cast<int>(std::floor(gy));
        double fx = gx - ix, fy = gy - iy;
        size_t b = static_cast<size_t>(iy - ky0) * nkx + (ix - kx0);
        return (1 - fx) * (1 - fy) * z[b] + fx * (1 - fy) * z[b + 1] +
               (1 - fx) * fy * z[b + nkx] + fx * fy * z[b + nkx + 1];
      };
      for (int j = 0; j < spec.ny; ++j)
        for (int i = 0; i < spec.nx; ++i)
          f.values[f.idx(i, j)] +=
              lv.sigma * (bil(i, j) + bil(i, -static_cast<double>(j)));
    }
    return f;
  }
};

GridSampler::GridSampler(const GridSpec& spec, SampleMethod method) : impl_(new Impl) {
  validate_spec(spec);
  impl_->spec = spec;
  impl_->method = method;
  if (method == SampleMethod::exact) {
    if (static_cast<long>(spec.nx) * spec.ny > 4096)
      fail_arg("sample_grid: exact method requires nx*ny <= 4096");
    impl_->build_exact();
  } else {
    impl_->build_hierarchical();
  }
}

GridSampler::~GridSampler() = default;
GridSampler::GridSampler(GridSampler&&) noexcept = default;

FieldGrid GridSampler::draw(uint64_t seed) const { return impl_->draw(seed); }
SampleMethod GridSampler::method() const { return impl_->method; }

FieldGrid sample_grid(const GridSpec& spec, uint64_t seed, SampleMethod method) {
  return GridSampler(spec, method).draw(seed);
}

// ---------------------------------------------------------------------------
// circle averages / normalization / pointwise ops

namespace {

double arc_average(const FieldGrid& f, cplx center, double r, bool semicircle) {
  if (r < 2 * f.spacing) fail_domain("circle_average: r must be >= 2*spacing");
  int m = std::max(64, 4 * static_cast<int>(std::ceil(r / f.spacing)));
  double span = semicircle ? kPi : 2 * kPi;
  double s = 0;
  for (int k = 0; k < m; ++k) {
    double th = span * (k + 0.5) / m;
    cplx p = center + r * cplx(std::cos(th), std::sin(th));
    if (!f.contains(p.real(), p.imag()))
      fail_domain("circle_average: circle exits the grid");
    s += f.interp(p.real(), p.imag());
  }
  return s / m;
}

}  // namespace

double circle_average(const FieldGrid& field, double x, double r) {
  return arc_average(field, cplx(x, 0.0), r, true);
}

double circle_average_bulk(const FieldGrid& field, cplx center, double r) {
  if (center.imag() < r) fail_domain("circle_average_bulk: circle crosses the boundary");
  return arc_average(field, center, r, false);
}

FieldGrid normalize(FieldGrid field) {
  if (field.normalized) return field;
  double a = circle_average(field, 0.0, 1.0);
  for (auto& v : field.values) v -= a;
  field.normalized = true;
  return field;
}

FieldGrid add_function(FieldGrid field, const std::function<double(double, double)>& fn) {
  for (int j = 0; j < field.ny; ++j)
    for (int i = 0; i < field.nx; ++i) {
      double v = fn(field.x(i), field.y(j));
      if (!std::isfinite(v)) fail_arg("add_function: non-finite value");
      field.at(i, j) += v;
    }
  field.normalized = false;
  return field;
}

// ---------------------------------------------------------------------------
// field file I/O

namespace {

template <typename T>
void put(std::ofstream& o, T v) {
  o.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("field file truncated");
  return v;
}

}  // namespace

void save_field(const FieldGrid& f, const std::string& path) {
  std::ofstream o(path, std::ios::binary);
  if (!o) throw std::runtime_error("cannot open for writing: " + path);
  o.write("LQGF", 4);
  put<uint32_t>(o, 1);
  put<uint64_t>(o, static_cast<uint64_t>(f.nx));
  put<uint64_t>(o, static_cast<uint64_t>(f.ny));
  put<double>(o, f.spacing);
  put<double>(o, f.origin_x);
  put<uint64_t>(o, f.seed);
  put<uint8_t>(o, f.normalized ? 1 : 0);
  o.write(reinterpret_cast<const char*>(f.values.data()),
          static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!o) throw std::runtime_error("write failed: " + path);
}

FieldGrid load_field(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open: " + path);
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "LQGF", 4) != 0)
    throw std::runtime_error("not a field file (bad magic): " + path);
  uint32_t version = get<uint32_t>(in);
  if (version != 1) throw std::runtime_error("unsupported field file version");
  FieldGrid f;
  f.nx = static_cast<int>(get<uint64_t>(in));
  f.ny = static_cast<int>(get<uint64_t>(in));
  f.spacing = get<double>(in);
  f.origin_x = get<double>(in);
  f.seed = get<uint64_t>(in);
  f.normalized = get<uint8_t>(in) != 0;
  if (f.nx < 2 || f.ny < 2 || !(f.spacing > 0))
    throw std::runtime_error("field file has invalid geometry");
  f.values.resize(static_cast<size_t>(f.nx) * f.ny);
  in.read(reinterpret_cast<char*>(f.values.data()),
          static_cast<std::streamsize>(f.values.size() * sizeof(double)));
  if (!in) throw std::runtime_error("field file truncated: " + path);
  return f;
}

}  // namespace lqg

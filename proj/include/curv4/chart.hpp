#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <array>
#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "curv4/errors.hpp"
#include "curv4/numerics.hpp"
#include "curv4/parallel.hpp"
#include "curv4/tensor4.hpp"

namespace curv4 {

using MetricFn = std::function<Mat4(const Vec4&)>;
/// Four vector fields in coordinates, as the columns of a 4x4 matrix.
using FrameFn = std::function<Mat4(const Vec4&)>;

/// Inner stencil for metric derivatives, outer stencil for differentiating
/// curvature (third-derivative quantities).
struct PipelineConfig {
  StencilConfig inner{1e-3, 4};
  StencilConfig outer{5e-3, 4};

  static PipelineConfig from_step(double step, int order) {
    PipelineConfig c{{step, order}, {5.0 * step, order}};
    c.inner.validate();
    c.outer.validate();
    return c;
  }
};

/// Coordinate box with a metric evaluator and optional adapted frame.
class MetricChart {
 public:
  MetricChart(std::string name, Box4 domain, MetricFn eval,
              std::optional<FrameFn> adapted = std::nullopt,
              nlohmann::json params = nlohmann::json::object())
      : name_(std::move(name)),
        domain_(domain),
        eval_(std::move(eval)),
        adapted_(std::move(adapted)),
        params_(std::move(params)) {
    if (!((domain_.hi - domain_.lo).array() > 0.0).all())
      throw InputError("chart domain must have positive extent");
    validate_probes();
  }

  const std::string& name() const { return name_; }
  const Box4& domain() const { return domain_; }
  const nlohmann::json& params() const { return params_; }
  bool has_adapted_frame() const { return adapted_.has_value(); }

  Mat4 metric(const Vec4& x) const {
    if (!domain_.contains(x)) throw DomainError("point outside chart domain: " + name_);
    Mat4 g = eval_(x);
    return 0.5 * (g + g.transpose());
  }

  Mat4 adapted_frame(const Vec4& x) const {
    if (!adapted_) throw PreconditionError("chart has no adapted frame: " + name_);
    if (!domain_.contains(x)) throw DomainError("point outside chart domain: " + name_);
    return (*adapted_)(x);
  }

  /// Max difference between order-4 and order-6 first derivatives at probes.
  double smoothness_defect(double step = 1e-3) const {
    double worst = 0.0;
    for (const Vec4& p : probes()) {
      for (int a = 0; a < 4; ++a) {
        auto f = [&](const Vec4& y) { return metric(y); };
        const Mat4 d4 = central_diff(f, p, a, {step, 4}, domain_);
        const Mat4 d6 = central_diff(f, p, a, {step, 6}, domain_);
        worst = std::max(worst, (d4 - d6).cwiseAbs().maxCoeff());
      }
    }
    return worst;
  }

 private:
  std::vector<Vec4> probes() const {
    std::vector<Vec4> pts{domain_.center()};
    const Box4 in = domain_.shrunk(0.9);
    for (int m = 0; m < 16; ++m) {
      Vec4 p;
      for (int a = 0; a < 4; ++a) p[a] = (m >> a & 1) ? in.hi[a] : in.lo[a];
      pts.push_back(p);
    }
    return pts;
  }

  void validate_probes() const {
    for (const Vec4& p : probes()) {
      const Mat4 g = metric(p);
      if (!g.allFinite()) throw InputError("chart metric is not finite: " + name_);
      Eigen::SelfAdjointEigenSolver<Mat4> es(g);
      if (es.eigenvalues().minCoeff() < 1e-6)
        throw InputError("chart metric is degenerate (eigenvalue < 1e-6): " + name_);
    }
  }

  std::string name_;
  Box4 domain_;
  MetricFn eval_;
  std::optional<FrameFn> adapted_;
  nlohmann::json params_;
};

/// g, dg[a] = d_a g, ddg[a][b] = d_a d_b g at a point.
struct MetricJet {
  Mat4 g;
  std::array<Mat4, 4> dg;
  std::array<std::array<Mat4, 4>, 4> ddg;
};

inline MetricJet metric_jet(const MetricChart& chart, const Vec4& x, const StencilConfig& cfg) {
  cfg.validate();
  const double reach = cfg.half_width() * cfg.step;
  for (int a = 0; a < 4; ++a)
    for (double sa : {-1.0, 1.0})
      for (int b = 0; b < 4; ++b)
        for (double sb : {-1.0, 1.0}) {
          Vec4 y = x;
          y[a] += sa * reach;
          y[b] += sb * reach;
          if (!chart.domain().contains(y))
            throw DomainError("metric stencil leaves the domain of " + chart.name());
        }
  auto f = [&](const Vec4& y) { return chart.metric(y); };
  MetricJet j;
  j.g = chart.metric(x);
  for (int a = 0; a < 4; ++a) j.dg[a] = central_diff(f, x, a, cfg);
  for (int a = 0; a < 4; ++a)
    for (int b = a; b < 4; ++b) {
      j.ddg[a][b] = central_diff2(f, x, a, b, cfg);
      j.ddg[b][a] = j.ddg[a][b];
    }
  return j;
}

/// Gamma^k_ij stored at up[(k*4+i)*4+j]; first kind Gamma_{l,ij} at low.
struct Christoffel {
  std::array<double, 64> up{};
  std::array<double, 64> low{};
  static constexpr int idx(int k, int i, int j) { return (k * 4 + i) * 4 + j; }
  double operator()(int k, int i, int j) const { return up[idx(k, i, j)]; }
};

inline Christoffel christoffel_from_jet(const MetricJet& j, const Mat4& ginv) {
  Christoffel c;
  for (int l = 0; l < 4; ++l)
    for (int i = 0; i < 4; ++i)
      for (int k = 0; k < 4; ++k)
        c.low[Christoffel::idx(l, i, k)] =
            0.5 * (j.dg[i](k, l) + j.dg[k](i, l) - j.dg[l](i, k));
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < 4; ++i)
      for (int jj = 0; jj < 4; ++jj) {
        double acc = 0.0;
        for (int l = 0; l < 4; ++l) acc += ginv(k, l) * c.low[Christoffel::idx(l, i, jj)];
        c.up[Christoffel::idx(k, i, jj)] = acc;
      }
  return c;
}

inline Christoffel christoffel(const MetricChart& chart, const Vec4& x,
                               const StencilConfig& cfg = {}) {
  const MetricJet j = metric_jet(chart, x, cfg);
  return christoffel_from_jet(j, Metric4(j.g).inv());
}

/// max |d_k g_ij - Gamma_{j,ki} - Gamma_{i,kj}| with d g taken independently
/// at order 6.
inline double metric_compatibility_residual(const MetricChart& chart, const Vec4& x,
                                            const StencilConfig& cfg = {}) {
  const Christoffel c = christoffel(chart, x, cfg);
  auto f = [&](const Vec4& y) { return chart.metric(y); };
  double worst = 0.0;
  for (int k = 0; k < 4; ++k) {
    const Mat4 dg = central_diff(f, x, k, {cfg.step, 6}, chart.domain());
    for (int i = 0; i < 4; ++i)
      for (int jj = 0; jj < 4; ++jj)
        worst = std::max(worst, std::abs(dg(i, jj) - c.low[Christoffel::idx(jj, k, i)] -
                                         c.low[Christoffel::idx(i, k, jj)]));
  }
  return worst;
}

/// Curvature data at one point.
struct CurvaturePoint {
  Vec4 x = Vec4::Zero();
  Metric4 g;
  Christoffel gamma;
  Curv4 R;
  RicciResult ric;
  Curv4 W;
  double symmetrize_distance = 0.0;
};

inline CurvaturePoint curvature_from_jet(const MetricJet& j, const Vec4& x) {
  CurvaturePoint p;
  p.x = x;
  p.g = Metric4(j.g);
  p.gamma = christoffel_from_jet(j, p.g.inv());
  const auto& G = p.gamma;
  auto dlow = [&](int a, int l, int i, int k) {
    return 0.5 * (j.ddg[a][i](k, l) + j.ddg[a][k](i, l) - j.ddg[a][l](i, k));
  };
  Array4 raw{};
  for (int i = 0; i < 4; ++i)
    for (int jj = 0; jj < 4; ++jj)
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) {
          double v = dlow(i, l, jj, k) - dlow(jj, l, i, k);
          for (int m = 0; m < 4; ++m)
            v += G.low[Christoffel::idx(m, jj, l)] * G.up[Christoffel::idx(m, i, k)] -
                 G.low[Christoffel::idx(m, i, l)] * G.up[Christoffel::idx(m, jj, k)];
          raw[Curv4::idx(i, jj, k, l)] = -v;
        }
  const auto sym = curvature_symmetrize(raw);
  p.R = sym.R;
  p.symmetrize_distance = sym.distance;
  p.ric = ricci_contract(p.R, p.g);
  p.W = algebraic_weyl(p.R, p.g);
  return p;
}

inline CurvaturePoint curvature_at(const MetricChart& chart, const Vec4& x,
                                   const StencilConfig& cfg = {}) {
  return curvature_from_jet(metric_jet(chart, x, cfg), x);
}

/// Third-derivative residual norms at one point (orthonormal-frame Frobenius).
struct HarmonicityPoint {
  Vec4 x = Vec4::Zero();
  double d_ric = 0.0;
  double div_r = 0.0;
  double div_w = 0.0;
  double ds = 0.0;
  double bianchi = 0.0;
  double s = 0.0;
  double r_norm = 0.0;
};

namespace detail {

inline constexpr int kPacked = 256 + 16 + 1 + 256;

inline Eigen::VectorXd pack(const CurvaturePoint& p) {
  Eigen::VectorXd v(kPacked);
  for (int n = 0; n < 256; ++n) v[n] = p.R.data()[n];
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) v[256 + 4 * a + b] = p.ric.ric.b(a, b);
  v[272] = p.ric.s;
  for (int n = 0; n < 256; ++n) v[273 + n] = p.W.data()[n];
  return v;
}

// Frobenius norm of a covariant tensor with rank-many indices, raised by ginv.
inline double raised_norm(const std::vector<double>& t, int rank, const Mat4& E) {
  // Components in the orthonormal frame E: contract each slot with E.
  std::vector<double> cur = t, next(t.size());
  int stride = 1;
  for (int slot = rank - 1; slot >= 0; --slot, stride *= 4) {
    for (std::size_t n = 0; n < cur.size(); ++n) {
      const int ia = static_cast<int>(n / stride) % 4;
      const std::size_t base = n - static_cast<std::size_t>(ia) * stride;
      double acc = 0.0;
      for (int m = 0; m < 4; ++m) acc += cur[base + static_cast<std::size_t>(m) * stride] * E(m, ia);
      next[n] = acc;
    }
    std::swap(cur, next);
  }
  double s = 0.0;
  for (double v : cur) s += v * v;
  return std::sqrt(s);
}

}  // namespace detail

/// Covariant derivatives of Ric, R and W at x, from finite differences of
/// curvature at outer-stencil neighbours.
struct CovariantDerivatives {
  CurvaturePoint center;
  std::array<double, 64> nabla_ric{};    // [k][i][j] = (nabla_k Ric)_ij
  std::vector<double> nabla_r;            // [m][i][j][k][l]
  std::vector<double> nabla_w;
  Quad4 ds{};
};

inline CovariantDerivatives covariant_derivatives(const MetricChart& chart, const Vec4& x,
                                                  const PipelineConfig& cfg = {}) {
  cfg.outer.validate();
  const double reach = cfg.outer.half_width() * cfg.outer.step;
  for (int a = 0; a < 4; ++a)
    for (double s : {-1.0, 1.0}) {
      Vec4 y = x;
      y[a] += s * reach;
      if (!chart.domain().contains(y))
        throw DomainError("third-derivative stencil leaves the domain of " + chart.name());
    }
  CovariantDerivatives out;
  out.center = curvature_at(chart, x, cfg.inner);
  auto packed = [&](const Vec4& y) -> Eigen::VectorXd {
    return detail::pack(curvature_at(chart, y, cfg.inner));
  };
  std::array<Eigen::VectorXd, 4> d;
  for (int m = 0; m < 4; ++m) d[m] = central_diff(packed, x, m, cfg.outer);

  const auto& G = out.center.gamma;
  const auto& ric = out.center.ric.ric.b;
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double v = d[k][256 + 4 * i + j];
        for (int p = 0; p < 4; ++p)
          v -= G(p, k, i) * ric(p, j) + G(p, k, j) * ric(i, p);
        out.nabla_ric[(k * 4 + i) * 4 + j] = v;
      }
  for (int m = 0; m < 4; ++m) out.ds[m] = d[m][272];

  auto nabla4 = [&](const Curv4& T, int offset) {
    std::vector<double> res(1024);
    for (int m = 0; m < 4; ++m)
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          for (int k = 0; k < 4; ++k)
            for (int l = 0; l < 4; ++l) {
              double v = d[m][offset + Curv4::idx(i, j, k, l)];
              for (int p = 0; p < 4; ++p)
                v -= G(p, m, i) * T(p, j, k, l) + G(p, m, j) * T(i, p, k, l) +
                     G(p, m, k) * T(i, j, p, l) + G(p, m, l) * T(i, j, k, p);
              res[m * 256 + Curv4::idx(i, j, k, l)] = v;
            }
    return res;
  };
  out.nabla_r = nabla4(out.center.R, 0);
  out.nabla_w = nabla4(out.center.W, 273);
  return out;
}

inline HarmonicityPoint harmonicity_at(const MetricChart& chart, const Vec4& x,
                                       const PipelineConfig& cfg = {}) {
  const CovariantDerivatives cd = covariant_derivatives(chart, x, cfg);
  const Mat4& gi = cd.center.g.inv();
  const Mat4 E = cd.center.g.orthonormal_frame();
  HarmonicityPoint h;
  h.x = x;
  h.s = cd.center.ric.s;
  h.r_norm = cd.center.R.in_frame(E).norm();

  // Codazzi defect C_kij = nabla_j Ric_ki - nabla_i Ric_kj.
  std::vector<double> C(64);
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        C[(k * 4 + i) * 4 + j] =
            cd.nabla_ric[(j * 4 + k) * 4 + i] - cd.nabla_ric[(i * 4 + k) * 4 + j];
  h.d_ric = detail::raised_norm(C, 3, E);

  auto divergence = [&](const std::vector<double>& nab) {
    std::vector<double> dv(64);
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) {
          double acc = 0.0;
          for (int i = 0; i < 4; ++i)
            for (int m = 0; m < 4; ++m) acc += gi(i, m) * nab[m * 256 + Curv4::idx(i, j, k, l)];
          dv[(j * 4 + k) * 4 + l] = acc;
        }
    return dv;
  };
  h.div_r = detail::raised_norm(divergence(cd.nabla_r), 3, E);
  h.div_w = detail::raised_norm(divergence(cd.nabla_w), 3, E);

  std::vector<double> ds(cd.ds.begin(), cd.ds.end());
  h.ds = detail::raised_norm(ds, 1, E);

  std::vector<double> bianchi(4);
  for (int i = 0; i < 4; ++i) {
    double acc = 0.0;
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) acc += gi(j, k) * cd.nabla_ric[(k * 4 + i) * 4 + j];
    bianchi[i] = 2.0 * acc - cd.ds[i];
  }
  h.bianchi = detail::raised_norm(bianchi, 1, E);
  return h;
}

/// Tolerance tiers: algebraic identities, second-derivative quantities,
/// third-derivative residuals.
struct Tolerances {
  double algebraic = 1e-8;
  double second = 1e-5;
  double third = 1e-4;
};

struct HarmonicityReport {
  std::vector<HarmonicityPoint> points;
  double max_d_ric = 0.0;
  double max_div_w = 0.0;
  double max_ds = 0.0;
  double max_bianchi = 0.0;
  double scalar_spread = 0.0;
  bool harmonic = false;
};

inline HarmonicityReport harmonicity_report(const MetricChart& chart,
                                            const std::vector<Vec4>& points,
                                            const PipelineConfig& cfg, double tol) {
  HarmonicityReport rep;
  rep.points.resize(points.size());
  parallel_for(points.size(),
               [&](std::size_t i) { rep.points[i] = harmonicity_at(chart, points[i], cfg); });
  double smin = std::numeric_limits<double>::infinity(), smax = -smin;
  for (const auto& p : rep.points) {
    rep.max_d_ric = std::max(rep.max_d_ric, p.d_ric);
    rep.max_div_w = std::max(rep.max_div_w, p.div_w);
    rep.max_ds = std::max(rep.max_ds, p.ds);
    rep.max_bianchi = std::max(rep.max_bianchi, p.bianchi);
    smin = std::min(smin, p.s);
    smax = std::max(smax, p.s);
  }
  rep.scalar_spread = points.empty() ? 0.0 : smax - smin;
  rep.harmonic = rep.max_d_ric <= tol && rep.max_div_w <= tol && rep.max_ds <= tol;
  return rep;
}

/// Halton points (bases 2,3,5,7) with a seeded Cranley-Patterson shift, inside
/// the domain shrunk by 10%.
inline std::vector<Vec4> sample_points(const Box4& domain, int count, std::uint64_t seed) {
  if (count < 1) throw InputError("sample count must be >= 1");
  static constexpr std::array<int, 4> bases{2, 3, 5, 7};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vec4 shift;
  for (int a = 0; a < 4; ++a) shift[a] = u(rng);
  const Box4 box = domain.shrunk(0.9);
  std::vector<Vec4> pts;
  pts.reserve(count);
  for (int n = 1; n <= count; ++n) {
    Vec4 p;
    for (int a = 0; a < 4; ++a) {
      double f = 1.0, r = 0.0;
      for (int i = n; i > 0; i /= bases[a]) {
        f /= bases[a];
        r += f * (i % bases[a]);
      }
      const double v = std::fmod(r + shift[a], 1.0);
      p[a] = box.lo[a] + v * (box.hi[a] - box.lo[a]);
    }
    pts.push_back(p);
  }
  return pts;
}

}  // namespace curv4

#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "curv4/chart.hpp"
#include "curv4/errors.hpp"
#include "curv4/numerics.hpp"

namespace curv4::examples {

/// cs_k(t): cos(sqrt(k) t), 1, or cosh(sqrt(-k) t); the warp of a
/// curvature-k surface dt^2 + cs_k(t)^2 dphi^2.
inline double cs(double k, double t) {
  if (k > 0.0) return std::cos(std::sqrt(k) * t);
  if (k < 0.0) return std::cosh(std::sqrt(-k) * t);
  return 1.0;
}

/// Half-width of a t-interval on which cs_k stays comfortably positive.
inline double surface_half_width(double k) {
  return k > 0.0 ? std::min(1.0, 0.6 / std::sqrt(k)) : 1.0;
}

inline Mat4 normalized_coordinate_frame(const Mat4& g) {
  Mat4 e = Mat4::Zero();
  for (int a = 0; a < 4; ++a) e(a, a) = 1.0 / std::sqrt(g(a, a));
  return e;
}

/// Conformally flat chart (1 + K0|x|^2/4)^{-2} I of constant curvature K0.
inline MetricChart make_constant_curvature(double K0, std::string name = "") {
  const double a = K0 == 0.0 ? 1.0 : std::min(1.0, 0.5 / std::sqrt(std::abs(K0)));
  auto eval = [K0](const Vec4& x) -> Mat4 {
    const double q = 1.0 + 0.25 * K0 * x.squaredNorm();
    return Mat4::Identity() / (q * q);
  };
  if (name.empty()) name = "constant_curvature:" + std::to_string(K0);
  return MetricChart(std::move(name), Box4{Vec4::Constant(-a), Vec4::Constant(a)}, eval,
                     std::nullopt,
                     {{"kind", "constant_curvature"}, {"K0", K0}});
}

/// Product of two constant-curvature surfaces in coordinates (t1, phi1, t2,
/// phi2), each factor dt^2 + cs_k(t)^2 dphi^2 centred at t = 0.
inline MetricChart make_product_surfaces(double k1, double k2, std::string name = "") {
  auto eval = [k1, k2](const Vec4& x) -> Mat4 {
    Mat4 g = Mat4::Zero();
    const double c1 = cs(k1, x[0]), c2 = cs(k2, x[2]);
    g(0, 0) = 1.0;
    g(1, 1) = c1 * c1;
    g(2, 2) = 1.0;
    g(3, 3) = c2 * c2;
    return g;
  };
  auto frame = [eval](const Vec4& x) { return normalized_coordinate_frame(eval(x)); };
  const double a1 = surface_half_width(k1), a2 = surface_half_width(k2);
  if (name.empty()) name = "product_surfaces:" + std::to_string(k1) + "," + std::to_string(k2);
  return MetricChart(std::move(name), Box4{Vec4(-a1, -1, -a2, -1), Vec4(a1, 1, a2, 1)}, eval,
                     FrameFn(frame),
                     {{"kind", "product_surfaces"}, {"k1", k1}, {"k2", k2}});
}

/// R x S^3(c): dt^2 + (dchi^2 + sin^2 chi (dth^2 + sin^2 th dph^2)) / c.
inline MetricChart make_line_cross_space(double c, std::string name = "") {
  if (!(c > 0.0)) throw InputError("line_cross_space needs c > 0");
  auto eval = [c](const Vec4& x) -> Mat4 {
    const double s1 = std::sin(x[1]), s2 = std::sin(x[2]);
    Mat4 g = Mat4::Zero();
    g(0, 0) = 1.0;
    g(1, 1) = 1.0 / c;
    g(2, 2) = s1 * s1 / c;
    g(3, 3) = s1 * s1 * s2 * s2 / c;
    return g;
  };
  auto frame = [eval](const Vec4& x) { return normalized_coordinate_frame(eval(x)); };
  const double h = std::numbers::pi / 2.0;
  if (name.empty()) name = "line_cross_space:" + std::to_string(c);
  return MetricChart(std::move(name), Box4{Vec4(-1, h - 0.5, h - 0.5, -1), Vec4(1, h + 0.5, h + 0.5, 1)},
                     eval, FrameFn(frame), {{"kind", "line_cross_space"}, {"c", c}});
}

/// Conformally flat negative control e^{2 a x1^3} I.
inline MetricChart make_bump_nonharmonic(double amplitude, std::string name = "") {
  if (amplitude < 0.0 || amplitude >= 0.5) throw InputError("bump amplitude must lie in [0, 0.5)");
  auto eval = [amplitude](const Vec4& x) -> Mat4 {
    return Mat4::Identity() * std::exp(2.0 * amplitude * x[0] * x[0] * x[0]);
  };
  auto frame = [eval](const Vec4& x) { return normalized_coordinate_frame(eval(x)); };
  if (name.empty()) name = "bump:" + std::to_string(amplitude);
  return MetricChart(std::move(name), Box4{Vec4::Constant(-1.25), Vec4::Constant(1.25)}, eval,
                     FrameFn(frame), {{"kind", "bump_nonharmonic"}, {"amplitude", amplitude}});
}

/// Seeded analytic perturbation of the flat metric, I + eps * sum A sin(k.x + p).
inline MetricChart make_perturbed_flat(std::uint64_t seed, double eps = 0.1, std::string name = "") {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  struct Mode {
    Mat4 A;
    Vec4 k;
    double phase;
  };
  std::vector<Mode> modes(3);
  for (auto& m : modes) {
    Mat4 A;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) A(i, j) = u(rng);
    m.A = 0.125 * (A + A.transpose());
    for (int a = 0; a < 4; ++a) m.k[a] = 1.5 * u(rng);
    m.phase = std::numbers::pi * u(rng);
  }
  auto eval = [modes, eps](const Vec4& x) -> Mat4 {
    Mat4 g = Mat4::Identity();
    for (const auto& m : modes) g += eps * std::sin(m.k.dot(x) + m.phase) * m.A;
    return g;
  };
  if (name.empty()) name = "perturbed_flat:" + std::to_string(seed);
  return MetricChart(std::move(name),
                     Box4{Vec4::Constant(-1), Vec4::Constant(1)}, eval, std::nullopt,
                     {{"kind", "perturbed_flat"}, {"seed", seed}, {"eps", eps}});
}

inline MetricChart make_flat() {
  return MetricChart("flat", Box4{Vec4::Constant(-1), Vec4::Constant(1)},
                     [](const Vec4&) -> Mat4 { return Mat4::Identity(); },
                     FrameFn([](const Vec4&) -> Mat4 { return Mat4::Identity(); }),
                     {{"kind", "flat"}});
}

inline constexpr double kFMin = 1e-3;
inline constexpr double kKappaMin = 1e-3;

/// Rotationally symmetric surface dt^2 + f(t)^2 dtheta^2 with curvature K(t)
/// solving (K+c)^3 + 3(K+c) Lap K - 6|dK|^2 = r^3, even in t.
struct SurfaceProfile {
  std::vector<double> t, f, df, K, dK;
  double c = 0.0, r = 0.0, K0 = 0.0;
  bool truncated = false;

  double t_lo() const { return t.front(); }
  double t_hi() const { return t.back(); }
};

/// Integrates (f, f', K, K') from (1, 0, K0, 0) on [0, T] and mirrors to
/// [-T, 0]. Halts early when f <= f_min or |K + c| <= kappa_min.
inline SurfaceProfile solve_kpc_profile(double c, double r, double K0, double T, int steps) {
  if (std::abs(K0 + c) <= kKappaMin) throw InputError("kpc: K0 + c must be nonzero");
  if (!(T > 0.0)) throw InputError("kpc: t_span must be positive");
  using State = Eigen::Vector4d;
  const double r3 = r * r * r;
  auto rhs = [c, r3](double, const State& y) -> State {
    const double f = y[0], fp = y[1], K = y[2], Kp = y[3];
    const double kc = K + c;
    State d;
    d[0] = fp;
    d[1] = -K * f;
    d[2] = Kp;
    d[3] = (r3 - kc * kc * kc + 6.0 * Kp * Kp) / (3.0 * kc) - (fp / f) * Kp;
    return d;
  };
  auto stop = [c](double, const State& y) {
    return y[0] <= kFMin || std::abs(y[2] + c) <= kKappaMin;
  };
  const auto traj = rk4_integrate(rhs, State(1.0, 0.0, K0, 0.0), 0.0, T, steps, stop);
  const std::size_t n = traj.t.size();
  if (n < 4) throw IntegrationError("kpc: profile truncated before four grid nodes", traj.t.back());

  SurfaceProfile p;
  p.c = c;
  p.r = r;
  p.K0 = K0;
  p.truncated = traj.truncated;
  const std::size_t total = 2 * n - 1;
  for (auto* v : {&p.t, &p.f, &p.df, &p.K, &p.dK}) v->reserve(total);
  for (std::size_t i = n - 1; i >= 1; --i) {
    const auto& y = traj.y[i];
    p.t.push_back(-traj.t[i]);
    p.f.push_back(y[0]);
    p.df.push_back(-y[1]);
    p.K.push_back(y[2]);
    p.dK.push_back(-y[3]);
  }
  for (std::size_t i = 0; i < n; ++i) {
    const auto& y = traj.y[i];
    p.t.push_back(traj.t[i]);
    p.f.push_back(y[0]);
    p.df.push_back(y[1]);
    p.K.push_back(y[2]);
    p.dK.push_back(y[3]);
  }
  return p;
}

/// Back-substitution of a profile into the original equation using
/// independent fourth-order differences on the grid (interior nodes).
inline std::vector<double> kpc_residual(const SurfaceProfile& p) {
  const std::size_t n = p.t.size();
  std::vector<double> res;
  if (n < 5) return res;
  const double r3 = p.r * p.r * p.r;
  for (std::size_t i = 2; i + 2 < n; ++i) {
    const double h = p.t[i + 1] - p.t[i];
    const auto& K = p.K;
    const auto& f = p.f;
    const double Kp = (-K[i + 2] + 8 * K[i + 1] - 8 * K[i - 1] + K[i - 2]) / (12 * h);
    const double Kpp =
        (-K[i + 2] + 16 * K[i + 1] - 30 * K[i] + 16 * K[i - 1] - K[i - 2]) / (12 * h * h);
    const double fp = (-f[i + 2] + 8 * f[i + 1] - 8 * f[i - 1] + f[i - 2]) / (12 * h);
    const double kc = K[i] + p.c;
    const double lap = Kpp + fp / f[i] * Kp;
    res.push_back(kc * kc * kc + 3.0 * kc * lap - 6.0 * Kp * Kp - r3);
  }
  return res;
}

/// Max |K + f''/f| on interior grid nodes, f'' by fourth-order differences.
inline double profile_gauss_defect(const SurfaceProfile& p) {
  double worst = 0.0;
  const auto& f = p.f;
  for (std::size_t i = 2; i + 2 < p.t.size(); ++i) {
    const double h = p.t[i + 1] - p.t[i];
    const double fpp =
        (-f[i + 2] + 16 * f[i + 1] - 30 * f[i] + 16 * f[i - 1] - f[i - 2]) / (12 * h * h);
    worst = std::max(worst, std::abs(p.K[i] + fpp / f[i]));
  }
  return worst;
}

/// (t, theta, u, v) chart of [dt^2 + f^2 dtheta^2 + du^2 + sc_c(u)^2 dv^2] /
/// (K(t) + c)^2 with sc_c(u) = sin(sqrt(c) u)/sqrt(c), centred on the
/// equator u = pi / (2 sqrt(c)).
inline MetricChart make_kpc_warped(const SurfaceProfile& profile, double c,
                                   std::string name = "") {
  if (!(c > 0.0)) throw InputError("kpc_warped needs c > 0");
  auto fs = std::make_shared<const CubicSpline>(profile.t, profile.f);
  auto Ks = std::make_shared<const CubicSpline>(profile.t, profile.K);
  const double sq = std::sqrt(c);
  const double u0 = std::numbers::pi / (2.0 * sq);
  const double tb = 0.85 * std::min(-profile.t_lo(), profile.t_hi());
  const double ub = std::min(0.6, 0.5 * u0);
  for (std::size_t i = 0; i < profile.t.size(); ++i)
    if (std::abs(profile.t[i]) <= tb && std::abs(profile.K[i] + c) <= kKappaMin)
      throw DomainError("kpc_warped: K + c vanishes on the requested box");
  auto eval = [fs, Ks, c, sq](const Vec4& x) -> Mat4 {
    const double f = (*fs)(x[0]);
    const double kc = (*Ks)(x[0]) + c;
    const double sc = std::sin(sq * x[2]) / sq;
    const double w = 1.0 / (kc * kc);
    Mat4 g = Mat4::Zero();
    g(0, 0) = w;
    g(1, 1) = w * f * f;
    g(2, 2) = w;
    g(3, 3) = w * sc * sc;
    return g;
  };
  auto frame = [eval](const Vec4& x) { return normalized_coordinate_frame(eval(x)); };
  if (name.empty())
    name = "kpc:" + std::to_string(c) + "," + std::to_string(profile.r) + "," +
           std::to_string(profile.K0);
  nlohmann::json params{{"kind", "kpc_warped"},
                        {"c", c},
                        {"r", profile.r},
                        {"K0", profile.K0},
                        {"t_span", profile.t_hi()},
                        {"grid_nodes", profile.t.size()},
                        {"truncated", profile.truncated}};
  return MetricChart(std::move(name), Box4{Vec4(-tb, -1, u0 - ub, -1), Vec4(tb, 1, u0 + ub, 1)},
                     eval, FrameFn(frame), std::move(params));
}

/// Pointwise conformal factor (K(t)+c)^{-2} of the warped chart.
inline double kpc_conformal_factor(const SurfaceProfile& profile, double c, double t) {
  const CubicSpline Ks(profile.t, profile.K);
  const double kc = Ks(t) + c;
  return 1.0 / (kc * kc);
}

}  // namespace curv4::examples

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <array>
#include <cmath>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "curv4/errors.hpp"

namespace curv4 {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;

/// Finite-difference stencil: step size and accuracy order (2, 4 or 6).
struct StencilConfig {
  double step = 1e-3;
  int order = 4;

  void validate() const {
    if (!(step > 0.0) || !std::isfinite(step))
      throw InputError("stencil step must be positive and finite");
    if (order != 2 && order != 4 && order != 6)
      throw InputError("stencil order must be 2, 4 or 6");
  }
  int half_width() const { return order / 2; }
};

/// Axis-aligned box in R^4.
struct Box4 {
  Vec4 lo = Vec4::Constant(-1.0);
  Vec4 hi = Vec4::Constant(1.0);

  bool contains(const Vec4& x) const {
    return (x.array() >= lo.array()).all() && (x.array() <= hi.array()).all();
  }
  Vec4 center() const { return 0.5 * (lo + hi); }
  Box4 shrunk(double factor) const {
    const Vec4 c = center();
    const Vec4 half = 0.5 * factor * (hi - lo);
    return {c - half, c + half};
  }
};

namespace detail {

// Weights for offsets 1..half_width; first derivative is antisymmetric.
inline std::span<const double> first_weights(int order) {
  static constexpr std::array<double, 1> w2{0.5};
  static constexpr std::array<double, 2> w4{2.0 / 3.0, -1.0 / 12.0};
  static constexpr std::array<double, 3> w6{3.0 / 4.0, -3.0 / 20.0, 1.0 / 60.0};
  switch (order) {
    case 2: return w2;
    case 4: return w4;
    case 6: return w6;
  }
  throw InputError("stencil order must be 2, 4 or 6");
}

// Weights for offsets 0..half_width; second derivative is symmetric.
inline std::span<const double> second_weights(int order) {
  static constexpr std::array<double, 2> w2{-2.0, 1.0};
  static constexpr std::array<double, 3> w4{-5.0 / 2.0, 4.0 / 3.0, -1.0 / 12.0};
  static constexpr std::array<double, 4> w6{-49.0 / 18.0, 3.0 / 2.0, -3.0 / 20.0,
                                            1.0 / 90.0};
  switch (order) {
    case 2: return w2;
    case 4: return w4;
    case 6: return w6;
  }
  throw InputError("stencil order must be 2, 4 or 6");
}

template <class Vec>
Vec shifted(const Vec& x, int dir, double delta) {
  Vec y = x;
  y[dir] += delta;
  return y;
}

inline void check_footprint(const Box4& domain, const Vec4& x, int dir, double reach) {
  if (!domain.contains(shifted(x, dir, reach)) || !domain.contains(shifted(x, dir, -reach)))
    throw DomainError("finite-difference stencil leaves the chart domain");
}

}  // namespace detail

/// First derivative of f along axis dir (0-based) at x. Works for scalar and
/// Eigen-valued f.
template <class F, class Vec>
auto central_diff(F&& f, const Vec& x, int dir, const StencilConfig& cfg) {
  using T = std::decay_t<std::invoke_result_t<F&, const Vec&>>;
  cfg.validate();
  const auto w = detail::first_weights(cfg.order);
  T acc = w[0] * (f(detail::shifted(x, dir, cfg.step)) - f(detail::shifted(x, dir, -cfg.step)));
  for (std::size_t m = 1; m < w.size(); ++m) {
    const double d = static_cast<double>(m + 1) * cfg.step;
    acc += w[m] * (f(detail::shifted(x, dir, d)) - f(detail::shifted(x, dir, -d)));
  }
  acc /= cfg.step;
  return acc;
}

/// Domain-checked variant: throws DomainError if the footprint leaves the box.
template <class F>
auto central_diff(F&& f, const Vec4& x, int dir, const StencilConfig& cfg,
                  const Box4& domain) {
  cfg.validate();
  detail::check_footprint(domain, x, dir, cfg.half_width() * cfg.step);
  return central_diff(std::forward<F>(f), x, dir, cfg);
}

/// Second derivative of f along axes (a, b); pure when a == b.
template <class F, class Vec>
auto central_diff2(F&& f, const Vec& x, int a, int b, const StencilConfig& cfg) {
  using T = std::decay_t<std::invoke_result_t<F&, const Vec&>>;
  cfg.validate();
  const double h = cfg.step;
  if (a == b) {
    const auto w = detail::second_weights(cfg.order);
    T acc = w[0] * f(x);
    for (std::size_t m = 1; m < w.size(); ++m) {
      const double d = static_cast<double>(m) * h;
      acc += w[m] * (f(detail::shifted(x, a, d)) + f(detail::shifted(x, a, -d)));
    }
    acc /= h * h;
    return acc;
  }
  auto inner = [&](const Vec& y) { return central_diff(f, y, b, cfg); };
  return central_diff(inner, x, a, cfg);
}

/// Eigen decomposition with ascending values and sign-fixed vectors.
struct EigenResult {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
};

/// Flip v so its largest-magnitude component is positive; ties go to the
/// lowest index.
template <class Derived>
void fix_sign(Eigen::MatrixBase<Derived>&& v) {
  const double mx = v.cwiseAbs().maxCoeff();
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    if (std::abs(v[k]) >= mx * (1.0 - 1e-10)) {
      if (v[k] < 0.0) v = -v;
      return;
    }
  }
}

inline EigenResult sym_eigen(const Eigen::MatrixXd& A) {
  const auto n = A.rows();
  if (A.cols() != n || (n != 3 && n != 4 && n != 6))
    throw InputError("sym_eigen expects a square matrix of dimension 3, 4 or 6");
  if (!A.allFinite()) throw InputError("sym_eigen: non-finite entry");
  const double scale = std::max(A.norm(), 1e-300);
  if ((A - A.transpose()).norm() > 1e-12 * scale)
    throw InputError("sym_eigen: matrix is not symmetric");
  const Eigen::MatrixXd S = 0.5 * (A + A.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  EigenResult r{es.eigenvalues(), es.eigenvectors()};
  for (Eigen::Index k = 0; k < n; ++k) fix_sign(r.vectors.col(k));
  return r;
}

/// Singular values, thresholds and the resulting numerical rank.
struct RankResult {
  Eigen::VectorXd singular_values;
  int rank = 0;
  double rtol = 1e-8;
  double atol = 1e-12;
};

inline RankResult numerical_rank(const Eigen::MatrixXd& A, double rtol = 1e-8,
                                 double atol = 1e-12) {
  if (!A.allFinite()) throw InputError("numerical_rank: non-finite entry");
  RankResult r;
  r.rtol = rtol;
  r.atol = atol;
  if (A.size() == 0) return r;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
  r.singular_values = svd.singularValues();
  const double s1 = r.singular_values.size() ? r.singular_values[0] : 0.0;
  const double thr = std::max(atol, rtol * s1);
  r.rank = static_cast<int>((r.singular_values.array() > thr).count());
  return r;
}

/// Fixed-step RK4 output: nodes and states (possibly truncated by a stop rule).
template <class State>
struct Trajectory {
  std::vector<double> t;
  std::vector<State> y;
  bool truncated = false;
};

namespace detail {
template <class State>
bool all_finite(const State& s) {
  if constexpr (std::is_arithmetic_v<State>) {
    return std::isfinite(s);
  } else {
    return s.allFinite();
  }
}
}  // namespace detail

/// Classical RK4. `stop(t, y)` returning true ends integration before that
/// node is appended.
template <class Rhs, class State, class Stop>
Trajectory<State> rk4_integrate(Rhs&& rhs, const State& y0, double t0, double t1,
                                int steps, Stop&& stop) {
  if (steps < 1) throw InputError("rk4_integrate: steps must be >= 1");
  const double h = (t1 - t0) / steps;
  Trajectory<State> out;
  out.t.reserve(steps + 1);
  out.y.reserve(steps + 1);
  out.t.push_back(t0);
  out.y.push_back(y0);
  State y = y0;
  double t = t0;
  auto eval = [&](double tt, const State& yy) {
    State k = rhs(tt, yy);
    if (!detail::all_finite(k))
      throw IntegrationError("rk4_integrate: non-finite right-hand side", t);
    return k;
  };
  for (int n = 0; n < steps; ++n) {
    const State k1 = eval(t, y);
    const State k2 = eval(t + 0.5 * h, State(y + 0.5 * h * k1));
    const State k3 = eval(t + 0.5 * h, State(y + 0.5 * h * k2));
    const State k4 = eval(t + h, State(y + h * k3));
    State next = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    const double tn = t0 + (n + 1) * h;
    if (!detail::all_finite(next))
      throw IntegrationError("rk4_integrate: non-finite state", t);
    if (stop(tn, next)) {
      out.truncated = true;
      break;
    }
    y = std::move(next);
    t = tn;
    out.t.push_back(t);
    out.y.push_back(y);
  }
  return out;
}

template <class Rhs, class State>
Trajectory<State> rk4_integrate(Rhs&& rhs, const State& y0, double t0, double t1,
                                int steps) {
  return rk4_integrate(std::forward<Rhs>(rhs), y0, t0, t1, steps,
                       [](double, const State&) { return false; });
}

/// Cubic interpolating spline with not-a-knot end conditions.
class CubicSpline {
 public:
  CubicSpline() = default;

  CubicSpline(std::vector<double> x, std::vector<double> y)
      : x_(std::move(x)), y_(std::move(y)) {
    const auto n = static_cast<Eigen::Index>(x_.size());
    if (n < 4 || y_.size() != x_.size())
      throw InputError("CubicSpline needs at least 4 matching nodes");
    for (Eigen::Index i = 1; i < n; ++i)
      if (!(x_[i] > x_[i - 1])) throw InputError("CubicSpline nodes must increase");

    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    auto h = [&](Eigen::Index i) { return x_[i + 1] - x_[i]; };
    trip.emplace_back(0, 0, h(1));
    trip.emplace_back(0, 1, -(h(0) + h(1)));
    trip.emplace_back(0, 2, h(0));
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
      trip.emplace_back(i, i - 1, h(i - 1));
      trip.emplace_back(i, i, 2.0 * (h(i - 1) + h(i)));
      trip.emplace_back(i, i + 1, h(i));
      rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / h(i) - (y_[i] - y_[i - 1]) / h(i - 1));
    }
    trip.emplace_back(n - 1, n - 3, h(n - 2));
    trip.emplace_back(n - 1, n - 2, -(h(n - 3) + h(n - 2)));
    trip.emplace_back(n - 1, n - 1, h(n - 3));

    Eigen::SparseMatrix<double> A(n, n);
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(A);
    if (lu.info() != Eigen::Success) throw InputError("CubicSpline: singular system");
    Eigen::VectorXd m = lu.solve(rhs);
    m_.assign(m.data(), m.data() + n);
  }

  double lo() const { return x_.front(); }
  double hi() const { return x_.back(); }

  /// Value (k = 0) or derivative of order k <= 3.
  double operator()(double t, int k = 0) const {
    if (x_.empty()) throw PreconditionError("CubicSpline is empty");
    if (t < x_.front() || t > x_.back()) throw DomainError("spline evaluated outside its grid");
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    i = std::min(i, x_.size() - 2);
    const double h = x_[i + 1] - x_[i];
    const double a = (x_[i + 1] - t) / h;
    const double b = (t - x_[i]) / h;
    const double m0 = m_[i], m1 = m_[i + 1];
    switch (k) {
      case 0:
        return a * y_[i] + b * y_[i + 1] +
               ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
      case 1:
        return (y_[i + 1] - y_[i]) / h +
               (-(3 * a * a - 1) * m0 + (3 * b * b - 1) * m1) * h / 6.0;
      case 2:
        return a * m0 + b * m1;
      case 3:
        return (m1 - m0) / h;
    }
    throw InputError("CubicSpline: derivative order must be 0..3");
  }

 private:
  std::vector<double> x_, y_, m_;
};

}  // namespace curv4

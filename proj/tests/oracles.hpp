#pragma once

// Independent reference evaluators used by the unit and acceptance tests.
// Nothing here calls into the library's curvature or variety code paths.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <stdexcept>
#include <type_traits>

namespace oracle {

using Vec4 = Eigen::Vector4d;
using Mat4 = Eigen::Matrix4d;
using Metric = std::function<Mat4(const Vec4&)>;
using Quartic = std::array<double, 256>;

inline int at(int i, int j, int k, int l) { return ((i * 4 + j) * 4 + k) * 4 + l; }

inline int parity(const std::array<int, 4>& p) {
  int inv = 0;
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b)
      if (p[a] > p[b]) ++inv;
  return inv % 2 == 0 ? 1 : -1;
}

/// H_ij by looping over all 24 orderings (i,j,k,l); each unordered {k,l} is
/// visited twice and both visits must agree.
inline std::array<double, 16> brute_h(const std::array<double, 16>& F) {
  auto f = [&](int j, int i) { return F[j * 4 + i]; };
  std::array<double, 16> H{};
  std::array<int, 16> seen{};
  std::array<int, 4> p{0, 1, 2, 3};
  do {
    const int i = p[0], j = p[1], k = p[2], l = p[3];
    const double v = f(k, l) * f(l, j) + f(l, k) * f(k, j) - f(k, j) * f(l, j);
    if (seen[i * 4 + j] && std::abs(H[i * 4 + j] - v) > 1e-12 * (1 + std::abs(v)))
      throw std::logic_error("H_ij depends on the order of k, l");
    H[i * 4 + j] = v;
    seen[i * 4 + j] = 1;
  } while (std::next_permutation(p.begin(), p.end()));
  return H;
}

/// Z_l from every even permutation (i,j,k,l); the three cyclic variants must
/// agree.
inline std::array<double, 4> brute_z(const std::array<double, 6>& sigma,
                                     const std::array<double, 4>& lambda) {
  auto s = [&](int a, int b) {
    if (a > b) std::swap(a, b);
    static const int table[4][4] = {{-1, 0, 1, 2}, {0, -1, 3, 4}, {1, 3, -1, 5}, {2, 4, 5, -1}};
    return sigma[table[a][b]];
  };
  std::array<double, 4> Z{};
  std::array<int, 4> hits{};
  std::array<int, 4> p{0, 1, 2, 3};
  do {
    if (parity(p) != 1) continue;
    const int i = p[0], j = p[1], k = p[2], l = p[3];
    const double v = (lambda[i] - lambda[j]) * s(i, j) + (lambda[j] - lambda[k]) * s(j, k) +
                     (lambda[k] - lambda[i]) * s(k, i);
    if (hits[l] && std::abs(Z[l] - v) > 1e-12 * (1 + std::abs(v)))
      throw std::logic_error("Z_l depends on the cyclic representative");
    Z[l] = v;
    ++hits[l];
  } while (std::next_permutation(p.begin(), p.end()));
  for (int h : hits)
    if (h != 3) throw std::logic_error("each l should have three even representatives");
  return Z;
}

/// Sixth-order central first derivative of a matrix-valued map.
template <class Fn>
auto d6(const Fn& fn, const Vec4& x, int a, double h) {
  using Value = std::decay_t<decltype(fn(x))>;
  Vec4 e = Vec4::Zero();
  e[a] = h;
  return Value((45.0 * (fn(x + e) - fn(x - e)) - 9.0 * (fn(x + 2 * e) - fn(x - 2 * e)) +
          (fn(x + 3 * e) - fn(x - 3 * e))) /
         (60.0 * h));
}

/// Gamma^k_ij at index (k*4+i)*4+j from sixth-order differences of g.
inline std::array<double, 64> christoffel(const Metric& g, const Vec4& x, double h) {
  std::array<Mat4, 4> dg;
  for (int a = 0; a < 4; ++a) dg[a] = d6(g, x, a, h);
  const Mat4 ginv = g(x).inverse();
  std::array<double, 64> G{};
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        double acc = 0.0;
        for (int m = 0; m < 4; ++m)
          acc += 0.5 * ginv(k, m) * (dg[i](m, j) + dg[j](m, i) - dg[m](i, j));
        G[(k * 4 + i) * 4 + j] = acc;
      }
  return G;
}

/// Curvature by differencing Christoffel symbols (nested differences), in the
/// convention where the round sphere has R_ijij = g_ii g_jj > 0:
/// R_ijkl = -g(R(d_i, d_j) d_k, d_l), R(X,Y) = [nabla_X, nabla_Y] - nabla_[X,Y].
inline Quartic riemann(const Metric& g, const Vec4& x, double h_outer = 2e-3,
                       double h_inner = 1e-3) {
  auto gam = [&](const Vec4& y) {
    const auto G = christoffel(g, y, h_inner);
    Eigen::Matrix<double, 64, 1> v;
    for (int n = 0; n < 64; ++n) v[n] = G[n];
    return v;
  };
  std::array<Eigen::Matrix<double, 64, 1>, 4> dG;
  for (int a = 0; a < 4; ++a) dG[a] = d6(gam, x, a, h_outer);
  const auto G0 = christoffel(g, x, h_inner);
  auto G = [&](int k, int i, int j) { return G0[(k * 4 + i) * 4 + j]; };
  auto DG = [&](int a, int k, int i, int j) { return dG[a][(k * 4 + i) * 4 + j]; };
  const Mat4 gx = g(x);
  Quartic R{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) {
        // (R(d_i, d_j) d_k)^m
        Vec4 v = Vec4::Zero();
        for (int m = 0; m < 4; ++m) {
          double acc = DG(i, m, j, k) - DG(j, m, i, k);
          for (int p = 0; p < 4; ++p) acc += G(m, i, p) * G(p, j, k) - G(m, j, p) * G(p, i, k);
          v[m] = acc;
        }
        for (int l = 0; l < 4; ++l) R[at(i, j, k, l)] = -(gx.row(l) * v)(0);
      }
  return R;
}

/// Ricci tensor and scalar curvature of e^{2 phi} delta in dimension four from
/// the gradient and Hessian of phi.
struct ConformalFlat {
  Mat4 ric;
  double s;
};

inline ConformalFlat conformally_flat_ricci(double phi, const Vec4& dphi, const Mat4& hess) {
  const double lap = hess.trace();
  const double grad2 = dphi.squaredNorm();
  ConformalFlat out;
  out.ric = -2.0 * (hess - dphi * dphi.transpose()) - (lap + 2.0 * grad2) * Mat4::Identity();
  out.s = -6.0 * std::exp(-2.0 * phi) * (lap + grad2);
  return out;
}

/// Random 18-tuple data (F, sigma, lambda) with no constraints imposed.
struct RawPoint {
  std::array<double, 16> F{};
  std::array<double, 6> sigma{};
  std::array<double, 4> lambda{};
};

inline RawPoint random_point(std::mt19937_64& rng) {
  std::normal_distribution<double> N(0.0, 1.0);
  RawPoint p;
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) p.F[j * 4 + i] = i == j ? 0.0 : N(rng);
  for (double& v : p.sigma) v = N(rng);
  for (double& v : p.lambda) v = N(rng);
  return p;
}

}  // namespace oracle

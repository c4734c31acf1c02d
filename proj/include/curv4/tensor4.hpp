#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <utility>

#include "curv4/errors.hpp"
#include "curv4/numerics.hpp"

namespace curv4 {

using Mat3 = Eigen::Matrix3d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using Array4 = std::array<double, 256>;

/// Positive-definite metric at a point, with cached inverse.
class Metric4 {
 public:
  Metric4() : g_(Mat4::Identity()), g_inv_(Mat4::Identity()) {}
  explicit Metric4(const Mat4& g) : g_(g) {
    if (!g.allFinite()) throw InputError("metric has non-finite entries");
    if ((g - g.transpose()).norm() > 1e-12 * std::max(1.0, g.norm()))
      throw InputError("metric is not symmetric");
    g_ = 0.5 * (g + g.transpose());
    Eigen::LLT<Mat4> llt(g_);
    if (llt.info() != Eigen::Success) throw InputError("metric is not positive definite");
    g_inv_ = llt.solve(Mat4::Identity());
    g_inv_ = 0.5 * (g_inv_ + g_inv_.transpose());
  }
  const Mat4& g() const { return g_; }
  const Mat4& inv() const { return g_inv_; }
  double operator()(int i, int j) const { return g_(i, j); }

  /// Orthonormal frame E (columns) with E^T g E = I, from the Cholesky factor.
  Mat4 orthonormal_frame() const {
    Eigen::LLT<Mat4> llt(g_);
    Mat4 L = llt.matrixL();
    return L.transpose().inverse();
  }

 private:
  Mat4 g_;
  Mat4 g_inv_;
};

/// Symmetric 2-tensor (Ric, traceless Ricci, Schouten, ...).
struct SymBilinear4 {
  Mat4 b = Mat4::Zero();
  double operator()(int i, int j) const { return b(i, j); }
};

/// Covariant 4-tensor R_ijkl with curvature symmetries.
class Curv4 {
 public:
  Curv4() { c_.fill(0.0); }
  explicit Curv4(const Array4& a) : c_(a) {}

  static constexpr int idx(int i, int j, int k, int l) { return ((i * 4 + j) * 4 + k) * 4 + l; }
  double& operator()(int i, int j, int k, int l) { return c_[idx(i, j, k, l)]; }
  double operator()(int i, int j, int k, int l) const { return c_[idx(i, j, k, l)]; }
  const Array4& data() const { return c_; }

  double norm() const {
    double s = 0.0;
    for (double v : c_) s += v * v;
    return std::sqrt(s);
  }

  Curv4& operator+=(const Curv4& o) {
    for (int n = 0; n < 256; ++n) c_[n] += o.c_[n];
    return *this;
  }
  Curv4& operator-=(const Curv4& o) {
    for (int n = 0; n < 256; ++n) c_[n] -= o.c_[n];
    return *this;
  }
  Curv4& operator*=(double a) {
    for (double& v : c_) v *= a;
    return *this;
  }
  friend Curv4 operator+(Curv4 a, const Curv4& b) { return a += b; }
  friend Curv4 operator-(Curv4 a, const Curv4& b) { return a -= b; }
  friend Curv4 operator*(double s, Curv4 a) { return a *= s; }

  /// Components A(E_a, E_b, E_c, E_d) for the columns of E.
  Curv4 in_frame(const Mat4& E) const {
    Array4 t1{}, t2{};
    auto contract = [&](const Array4& src, Array4& dst, int slot) {
      dst.fill(0.0);
      for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
          for (int k = 0; k < 4; ++k)
            for (int l = 0; l < 4; ++l) {
              int id[4] = {i, j, k, l};
              double acc = 0.0;
              for (int m = 0; m < 4; ++m) {
                int src_id[4] = {i, j, k, l};
                src_id[slot] = m;
                acc += src[idx(src_id[0], src_id[1], src_id[2], src_id[3])] * E(m, id[slot]);
              }
              dst[idx(i, j, k, l)] = acc;
            }
    };
    contract(c_, t1, 0);
    contract(t1, t2, 1);
    contract(t2, t1, 2);
    contract(t1, t2, 3);
    return Curv4(t2);
  }

 private:
  Array4 c_;
};

/// Residuals of the algebraic curvature symmetries and first Bianchi identity.
struct SymmetryResiduals {
  double antisym_ij = 0.0;
  double antisym_kl = 0.0;
  double pair_exchange = 0.0;
  double bianchi = 0.0;
  double max() const { return std::max({antisym_ij, antisym_kl, pair_exchange, bianchi}); }
};

inline SymmetryResiduals symmetry_residuals(const Curv4& R) {
  SymmetryResiduals r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) {
          const double v = R(i, j, k, l);
          r.antisym_ij = std::max(r.antisym_ij, std::abs(v + R(j, i, k, l)));
          r.antisym_kl = std::max(r.antisym_kl, std::abs(v + R(i, j, l, k)));
          r.pair_exchange = std::max(r.pair_exchange, std::abs(v - R(k, l, i, j)));
          r.bianchi = std::max(r.bianchi, std::abs(v + R(j, k, i, l) + R(k, i, j, l)));
        }
  return r;
}

struct SymmetrizeResult {
  Curv4 R;
  double distance = 0.0;
};

/// Orthogonal projection onto algebraic curvature tensors.
inline SymmetrizeResult curvature_symmetrize(const Array4& raw) {
  const Curv4 in(raw);
  Curv4 p;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l) {
          auto a = [&](int a0, int a1, int a2, int a3) {
            return in(a0, a1, a2, a3) - in(a1, a0, a2, a3) - in(a0, a1, a3, a2) +
                   in(a1, a0, a3, a2);
          };
          p(i, j, k, l) = (a(i, j, k, l) + a(k, l, i, j)) / 8.0;
        }
  // Remove the totally antisymmetric part; on Sym^2(Lambda^2) it is the
  // cyclic average over (j,k,l).
  Curv4 q;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l)
          q(i, j, k, l) = p(i, j, k, l) - (p(i, j, k, l) + p(i, k, l, j) + p(i, l, j, k)) / 3.0;
  SymmetrizeResult out{q, (in - q).norm()};
  if (out.distance > 1e-3 * in.norm())
    throw InconsistencyError("curvature array is far from the curvature symmetry class");
  return out;
}

struct RicciResult {
  SymBilinear4 ric;
  double s = 0.0;
};

/// ric_jl = sum g^{ik} R_ijkl, s = sum g^{jl} ric_jl.
inline RicciResult ricci_contract(const Curv4& R, const Metric4& g) {
  RicciResult r;
  for (int j = 0; j < 4; ++j)
    for (int l = 0; l < 4; ++l) {
      double acc = 0.0;
      for (int i = 0; i < 4; ++i)
        for (int k = 0; k < 4; ++k) acc += g.inv()(i, k) * R(i, j, k, l);
      r.ric.b(j, l) = acc;
    }
  r.ric.b = 0.5 * (r.ric.b + r.ric.b.transpose());
  r.s = (g.inv().cwiseProduct(r.ric.b)).sum();
  return r;
}

/// (a wedge b)_ijkl = a_ik b_jl + a_jl b_ik - a_jk b_il - a_il b_jk.
inline Curv4 kulkarni_nomizu(const SymBilinear4& a, const SymBilinear4& b) {
  Curv4 r;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l)
          r(i, j, k, l) = a(i, k) * b(j, l) + a(j, l) * b(i, k) - a(j, k) * b(i, l) -
                          a(i, l) * b(j, k);
  return r;
}

/// Weyl tensor W = R - (n-2)^{-1} g wedge Sch. The dimension n is kept as a
/// parameter of the formula only; contractions assume the 4x4 metric.
inline Curv4 weyl_from_curv(const Curv4& R, const Metric4& g, int n = 4) {
  const auto rc = ricci_contract(R, g);
  SymBilinear4 sch{rc.ric.b - rc.s / (2.0 * (n - 1)) * g.g()};
  SymBilinear4 gg{g.g()};
  return R - (1.0 / (n - 2)) * kulkarni_nomizu(gg, sch);
}

/// Weyl part re-projected onto algebraic Weyl tensors, so that trace and
/// Bianchi defects stay at roundoff relative to |W| even when W is tiny.
inline Curv4 algebraic_weyl(const Curv4& R, const Metric4& g) {
  const Curv4 W1 = weyl_from_curv(R, g);
  if (W1.norm() == 0.0) return W1;
  return weyl_from_curv(curvature_symmetrize(W1.data()).R, g);
}

/// Index of the unordered pair {i,j} in the basis 12,13,14,23,24,34.
constexpr int pair_index(int i, int j) {
  if (i > j) std::swap(i, j);
  constexpr int table[4][4] = {{-1, 0, 1, 2}, {0, -1, 3, 4}, {1, 3, -1, 5}, {2, 4, 5, -1}};
  return table[i][j];
}

inline constexpr std::array<std::pair<int, int>, 6> kPairs{
    {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}}};

/// Sign of the permutation (i,j,k,l) of (0,1,2,3); 0 if indices repeat.
constexpr int levi_civita(int i, int j, int k, int l) {
  const int p[4] = {i, j, k, l};
  int sign = 1;
  for (int a = 0; a < 4; ++a)
    for (int b = a + 1; b < 4; ++b) {
      if (p[a] == p[b]) return 0;
      if (p[a] > p[b]) sign = -sign;
    }
  return sign;
}

/// Hodge star on bivectors of an orthonormal frame with the given orientation.
inline Mat6 hodge_star(int orientation = 1) {
  Mat6 H = Mat6::Zero();
  for (int a = 0; a < 6; ++a) {
    const auto [i, j] = kPairs[a];
    for (int b = 0; b < 6; ++b) {
      const auto [k, l] = kPairs[b];
      H(b, a) = orientation * levi_civita(i, j, k, l);
    }
  }
  return H;
}

/// Bivector operator M_{(ij),(kl)} = A_ijkl of a tensor given in an
/// orthonormal frame.
inline Mat6 to_bivector(const Curv4& A) {
  Mat6 M;
  for (int a = 0; a < 6; ++a)
    for (int b = 0; b < 6; ++b)
      M(a, b) = A(kPairs[a].first, kPairs[a].second, kPairs[b].first, kPairs[b].second);
  return M;
}

/// Orthonormal bases of L+ (sign = +1) and L- (sign = -1) as 6x3 columns.
inline Eigen::Matrix<double, 6, 3> sd_basis(int sign, int orientation = 1) {
  const double h = 1.0 / std::sqrt(2.0);
  const double o = sign * orientation;
  Eigen::Matrix<double, 6, 3> U = Eigen::Matrix<double, 6, 3>::Zero();
  // e12 + o e34, e13 + o e42, e14 + o e23
  U(pair_index(0, 1), 0) = h;
  U(pair_index(2, 3), 0) = o * h;
  U(pair_index(0, 2), 1) = h;
  U(pair_index(1, 3), 1) = -o * h;
  U(pair_index(0, 3), 2) = h;
  U(pair_index(1, 2), 2) = o * h;
  return U;
}

struct WeylSplit {
  Mat3 Wp = Mat3::Zero();
  Mat3 Wm = Mat3::Zero();
  std::array<double, 6> sigma{};
  double commutator = 0.0;
  int orientation = 1;
};

/// Self-dual / anti-self-dual restrictions of an algebraic Weyl tensor A in
/// the orthonormal frame E (columns). Orientation follows sign(det E).
/// noise_floor is an absolute allowance added to both relative checks, for
/// callers whose A is itself at roundoff level.
inline WeylSplit sd_split(const Curv4& A, const Metric4& g, const Mat4& E,
                          double noise_floor = 0.0) {
  const double nA = A.norm();
  const auto rc = ricci_contract(A, g);
  if (rc.ric.b.norm() > 1e-8 * nA + noise_floor)
    throw PreconditionError("sd_split: tensor has a nonzero Ricci contraction");
  if ((E.transpose() * g.g() * E - Mat4::Identity()).norm() > 1e-8)
    throw PreconditionError("sd_split: frame is not orthonormal");
  WeylSplit out;
  out.orientation = E.determinant() > 0 ? 1 : -1;
  const Mat6 M = to_bivector(A.in_frame(E));
  const Mat6 H = hodge_star(out.orientation);
  out.commutator = (M * H - H * M).norm();
  if (out.commutator > 1e-9 * M.norm() + noise_floor)
    throw InconsistencyError("sd_split: operator does not commute with the Hodge star");
  const auto Up = sd_basis(+1, out.orientation);
  const auto Um = sd_basis(-1, out.orientation);
  out.Wp = Up.transpose() * M * Up;
  out.Wm = Um.transpose() * M * Um;
  out.Wp = 0.5 * (out.Wp + out.Wp.transpose()).eval();
  out.Wm = 0.5 * (out.Wm + out.Wm.transpose()).eval();
  for (int a = 0; a < 6; ++a) out.sigma[a] = M(a, a);
  return out;
}

/// Six R_ijij in pair order.
using Pair6 = std::array<double, 6>;
using Quad4 = std::array<double, 4>;

inline Pair6 sectional_from_weyl(const Pair6& sigma, const Quad4& lambda, double s) {
  Pair6 R{};
  for (int a = 0; a < 6; ++a) {
    const auto [i, j] = kPairs[a];
    R[a] = sigma[a] + 0.5 * (lambda[i] + lambda[j]) + s / 12.0;
  }
  return R;
}

struct WeylData {
  Pair6 sigma{};
  Quad4 lambda{};
  double s = 0.0;
};

/// Inverse of sectional_from_weyl with Ric_ii = sum_{j != i} R_ijij.
inline WeylData weyl_from_sectional(const Pair6& R) {
  WeylData d;
  Quad4 ric{};
  for (int a = 0; a < 6; ++a) {
    ric[kPairs[a].first] += R[a];
    ric[kPairs[a].second] += R[a];
  }
  d.s = ric[0] + ric[1] + ric[2] + ric[3];
  for (int i = 0; i < 4; ++i) d.lambda[i] = ric[i] - d.s / 4.0;
  for (int a = 0; a < 6; ++a) {
    const auto [i, j] = kPairs[a];
    d.sigma[a] = R[a] - 0.5 * (d.lambda[i] + d.lambda[j]) - d.s / 12.0;
  }
  return d;
}

/// |sigma_ij - sigma_kl| for the pairings (12|34, 13|24, 14|23), then the four
/// row sums |sigma_ij + sigma_ik + sigma_il|.
inline std::array<double, 7> check_weyl_frame_identities(const Pair6& sigma) {
  auto s = [&](int i, int j) { return sigma[pair_index(i, j)]; };
  std::array<double, 7> r{};
  r[0] = std::abs(s(0, 1) - s(2, 3));
  r[1] = std::abs(s(0, 2) - s(1, 3));
  r[2] = std::abs(s(0, 3) - s(1, 2));
  for (int i = 0; i < 4; ++i) {
    double acc = 0.0;
    for (int j = 0; j < 4; ++j)
      if (j != i) acc += s(i, j);
    r[3 + i] = std::abs(acc);
  }
  return r;
}

}  // namespace curv4

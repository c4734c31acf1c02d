#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "curv4/errors.hpp"
#include "curv4/frames.hpp"
#include "curv4/numerics.hpp"
#include "curv4/parallel.hpp"
#include "curv4/tensor4.hpp"

namespace curv4 {

/// (F, sigma) plus lambda and s. F_ji stored at [j*4+i]; diagonal unused.
struct VarietyPoint {
  std::array<double, 16> F{};
  Pair6 sigma{};
  Quad4 lambda{};
  double s = 0.0;

  double Fji(int j, int i) const { return F[j * 4 + i]; }
  double& Fji(int j, int i) { return F[j * 4 + i]; }
  double sig(int i, int j) const { return sigma[pair_index(i, j)]; }

  /// Norm of the 18-tuple (twelve F_ji, six sigma_ij).
  double norm18() const {
    double acc = 0.0;
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 4; ++i)
        if (i != j) acc += Fji(j, i) * Fji(j, i);
    for (double v : sigma) acc += v * v;
    return std::sqrt(acc);
  }

  VarietyPoint scaled(double t) const {
    VarietyPoint q = *this;
    for (double& v : q.F) v *= t;
    for (double& v : q.sigma) v *= t;
    for (double& v : q.lambda) v *= t;
    q.s *= t;
    return q;
  }

  /// Relabel indices: new index p[i] carries old index i.
  VarietyPoint permuted(const std::array<int, 4>& p) const {
    VarietyPoint q;
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 4; ++i)
        if (i != j) q.Fji(p[j], p[i]) = Fji(j, i);
    for (int a = 0; a < 6; ++a) {
      const auto [i, j] = kPairs[a];
      q.sigma[pair_index(p[i], p[j])] = sigma[a];
    }
    for (int i = 0; i < 4; ++i) q.lambda[p[i]] = lambda[i];
    q.s = s;
    return q;
  }

  static VarietyPoint from_frame(const RicciFrame& fr) {
    VarietyPoint p;
    p.F = fr.F;
    for (int i = 0; i < 4; ++i) p.F[i * 4 + i] = 0.0;
    p.sigma = fr.sigma;
    p.lambda = fr.lambda;
    p.s = fr.s;
    return p;
  }
};

/// The other two indices of {0,1,2,3} \ {i,j}, ascending.
inline std::pair<int, int> complement(int i, int j) {
  int k = -1, l = -1;
  for (int m = 0; m < 4; ++m)
    if (m != i && m != j) (k < 0 ? k : l) = m;
  return {k, l};
}

/// H_ij = F_kl F_lj + F_lk F_kj - F_kj F_lj at [i*4+j].
inline std::array<double, 16> h_components(const std::array<double, 16>& F) {
  auto f = [&](int j, int i) { return F[j * 4 + i]; };
  std::array<double, 16> H{};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (i == j) continue;
      const auto [k, l] = complement(i, j);
      H[i * 4 + j] = f(k, l) * f(l, j) + f(l, k) * f(k, j) - f(k, j) * f(l, j);
    }
  return H;
}

/// The twelve even permutations of (0,1,2,3).
inline constexpr std::array<std::array<int, 4>, 12> kEvenPermutations{{
    {0, 1, 2, 3}, {0, 2, 3, 1}, {0, 3, 1, 2}, {1, 0, 3, 2}, {1, 2, 0, 3}, {1, 3, 2, 0},
    {2, 0, 1, 3}, {2, 1, 3, 0}, {2, 3, 0, 1}, {3, 0, 2, 1}, {3, 1, 0, 2}, {3, 2, 1, 0},
}};

/// Z_l = (lam_i - lam_j) s_ij + (lam_j - lam_k) s_jk + (lam_k - lam_i) s_ki for
/// (i,j,k,l) even.
inline Quad4 z_components(const Pair6& sigma, const Quad4& lambda) {
  auto s = [&](int i, int j) { return sigma[pair_index(i, j)]; };
  Quad4 Z{};
  std::array<bool, 4> done{};
  for (const auto& p : kEvenPermutations) {
    const int i = p[0], j = p[1], k = p[2], l = p[3];
    if (done[l]) continue;
    Z[l] = (lambda[i] - lambda[j]) * s(i, j) + (lambda[j] - lambda[k]) * s(j, k) +
           (lambda[k] - lambda[i]) * s(k, i);
    done[l] = true;
  }
  return Z;
}

/// The 4x7 matrix whose rank is bounded by 3.
inline Eigen::Matrix<double, 4, 7> fsp_matrix(const std::array<double, 16>& H) {
  auto h = [&](int i, int j) { return H[i * 4 + j]; };
  Eigen::Matrix<double, 4, 7> M = Eigen::Matrix<double, 4, 7>::Zero();
  M.col(6).setOnes();
  for (int a = 0; a < 6; ++a) {
    const auto [i, j] = kPairs[a];
    M(i, a) = h(i, j);
    M(j, a) = h(j, i);
  }
  return M;
}

struct RawResiduals {
  double eq1 = 0.0;
  double fsi = 0.0;
  double bracket = 0.0;
};

/// Unnormalized residuals. eq1 covers the linear equalities (trace and Weyl
/// frame identities); fsi the pairing H_ji Z_j + H_ij Z_i = 0; bracket the
/// same pairing written with cyclic sums over the complementary indices.
inline RawResiduals raw_residuals(const VarietyPoint& p) {
  RawResiduals r;
  r.eq1 = std::abs(p.lambda[0] + p.lambda[1] + p.lambda[2] + p.lambda[3]);
  const auto id = check_weyl_frame_identities(p.sigma);
  for (double v : id) r.eq1 = std::max(r.eq1, v);

  const auto H = h_components(p.F);
  const Quad4 Z = z_components(p.sigma, p.lambda);
  auto cyc = [&](int a, int b, int c) {
    return (p.lambda[a] - p.lambda[b]) * p.sig(a, b) + (p.lambda[b] - p.lambda[c]) * p.sig(b, c) +
           (p.lambda[c] - p.lambda[a]) * p.sig(c, a);
  };
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      r.fsi = std::max(r.fsi, std::abs(H[j * 4 + i] * Z[j] + H[i * 4 + j] * Z[i]));
      const auto [k, l] = complement(i, j);
      r.bracket = std::max(r.bracket,
                           std::abs(cyc(k, l, i) * H[j * 4 + i] - cyc(k, l, j) * H[i * 4 + j]));
    }
  return r;
}

struct MembershipOptions {
  double tol = 1e-6;
  double rank_rtol = 1e-8;
  double rank_atol = 1e-12;
};

struct MembershipReport {
  double eq1_residual = 0.0;
  double fsi_residual = 0.0;
  double bracket_residual = 0.0;
  RankResult fsp_rank;
  double total = 0.0;
  bool pass = false;
  double scale = 1.0;
  Quad4 Z{};
  std::array<double, 16> H{};
};

/// Residuals of the normalized point (|(F, sigma)| = 1, lambda scaled alike).
inline MembershipReport system_residuals(const VarietyPoint& p, const MembershipOptions& opt = {}) {
  MembershipReport rep;
  const double n = p.norm18();
  rep.scale = n > 0.0 ? n : 1.0;
  const VarietyPoint q = p.scaled(1.0 / rep.scale);
  const RawResiduals raw = raw_residuals(q);
  rep.eq1_residual = raw.eq1;
  rep.fsi_residual = raw.fsi;
  rep.bracket_residual = raw.bracket;
  rep.H = h_components(q.F);
  rep.Z = z_components(q.sigma, q.lambda);
  rep.fsp_rank = numerical_rank(fsp_matrix(rep.H), opt.rank_rtol, opt.rank_atol);
  const auto& sv = rep.fsp_rank.singular_values;
  const double rank_excess = rep.fsp_rank.rank > 3 ? sv[3] / sv[0] : 0.0;
  rep.total = rep.eq1_residual + rep.fsi_residual + rank_excess;
  rep.pass = rep.eq1_residual <= opt.tol && rep.fsi_residual <= opt.tol && rep.fsp_rank.rank <= 3;
  return rep;
}

enum class SampleMode { linear, full, zero_f };

inline SampleMode parse_sample_mode(const std::string& s) {
  if (s == "linear") return SampleMode::linear;
  if (s == "full") return SampleMode::full;
  if (s == "zero-f" || s == "zero_f") return SampleMode::zero_f;
  throw InputError("unknown sample mode: " + s);
}

struct SampledPoint {
  std::size_t index = 0;
  VarietyPoint point;
  MembershipReport report;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline void project_linear(VarietyPoint& p) {
  const double a = 0.5 * (p.sig(0, 1) + p.sig(2, 3));
  const double b = 0.5 * (p.sig(0, 2) + p.sig(1, 3));
  const double c = 0.5 * (p.sig(0, 3) + p.sig(1, 2));
  const double m = (a + b + c) / 3.0;
  p.sigma[pair_index(0, 1)] = p.sigma[pair_index(2, 3)] = a - m;
  p.sigma[pair_index(0, 2)] = p.sigma[pair_index(1, 3)] = b - m;
  p.sigma[pair_index(0, 3)] = p.sigma[pair_index(1, 2)] = c - m;
  const double lm = 0.25 * (p.lambda[0] + p.lambda[1] + p.lambda[2] + p.lambda[3]);
  for (double& v : p.lambda) v -= lm;
}

inline constexpr std::array<std::pair<int, int>, 12> kOrdered{{
    {0, 1}, {0, 2}, {0, 3}, {1, 0}, {1, 2}, {1, 3}, {2, 0}, {2, 1}, {2, 3}, {3, 0}, {3, 1}, {3, 2},
}};

inline Eigen::Matrix<double, 6, 1> fsi_vector(const VarietyPoint& p) {
  const auto H = h_components(p.F);
  const Quad4 Z = z_components(p.sigma, p.lambda);
  Eigen::Matrix<double, 6, 1> r;
  for (int a = 0; a < 6; ++a) {
    const auto [i, j] = kPairs[a];
    r[a] = H[j * 4 + i] * Z[j] + H[i * 4 + j] * Z[i];
  }
  return r;
}

/// Gauss-Newton with minimum-norm steps on the pairing equations in F.
inline void polish_fsi(VarietyPoint& p) {
  for (int it = 0; it < 60; ++it) {
    const Eigen::Matrix<double, 6, 1> r = fsi_vector(p);
    if (r.norm() <= 1e-15 * std::max(1.0, p.norm18())) return;
    Eigen::Matrix<double, 6, 12> J;
    for (int c = 0; c < 12; ++c) {
      const auto [j, i] = kOrdered[c];
      auto f = [&](double t) {
        VarietyPoint q = p;
        q.Fji(j, i) += t;
        return fsi_vector(q);
      };
      J.col(c) = (f(1e-4) - f(-1e-4)) / 2e-4;
    }
    const Eigen::Matrix<double, 12, 1> step =
        J.completeOrthogonalDecomposition().solve(r);
    for (int c = 0; c < 12; ++c) {
      const auto [j, i] = kOrdered[c];
      p.Fji(j, i) -= step[c];
    }
  }
}

}  // namespace detail

/// Draws seeded points, projects (sigma, lambda) onto the linear constraints
/// and, in full mode, polishes the pairing equations in F. Full mode emits
/// only points within tol; output is ordered by draw index.
inline std::vector<SampledPoint> sample_variety(std::uint64_t seed, int count, SampleMode mode,
                                                const MembershipOptions& opt = {}) {
  if (count < 1) throw InputError("sample count must be >= 1");
  std::vector<SampledPoint> all(static_cast<std::size_t>(count));
  std::vector<char> keep(all.size(), 0);
  parallel_for(all.size(), [&](std::size_t n) {
    std::mt19937_64 rng(detail::splitmix64(seed ^ detail::splitmix64(n)));
    std::normal_distribution<double> N(0.0, 1.0);
    VarietyPoint p;
    for (int j = 0; j < 4; ++j)
      for (int i = 0; i < 4; ++i)
        if (i != j) p.Fji(j, i) = mode == SampleMode::zero_f ? 0.0 : N(rng);
    for (double& v : p.sigma) v = N(rng);
    for (double& v : p.lambda) v = N(rng);
    detail::project_linear(p);
    p.s = 0.0;
    if (mode == SampleMode::full) detail::polish_fsi(p);
    MembershipReport rep = system_residuals(p, opt);
    keep[n] = mode == SampleMode::full ? (rep.total <= opt.tol && rep.pass) : 1;
    all[n] = SampledPoint{n, p, rep};
  });
  std::vector<SampledPoint> out;
  for (std::size_t n = 0; n < all.size(); ++n)
    if (keep[n]) out.push_back(std::move(all[n]));
  return out;
}

inline std::string f_label(int j, int i) {
  return "F_" + std::to_string(j + 1) + std::to_string(i + 1);
}

/// CSV with a commented header describing the columns.
inline void write_variety_csv(std::ostream& os, const std::vector<SampledPoint>& pts,
                              const std::string& provenance) {
  os << "# curv4 variety sample\n";
  os << "# source: " << provenance << "\n";
  os << "# columns: twelve F_ji (ordered j!=i), six sigma_ij, four lambda_i,\n";
  os << "#          normalized residuals eq1 and fsi, fsp numerical rank, total\n";
  os << "index";
  for (const auto& [j, i] : detail::kOrdered) os << ',' << f_label(j, i);
  for (const auto& [i, j] : kPairs) os << ",sigma_" << i + 1 << j + 1;
  for (int i = 0; i < 4; ++i) os << ",lambda_" << i + 1;
  os << ",eq1,fsi,fsp_rank,total\n";
  const auto old = os.precision(17);
  for (const auto& sp : pts) {
    os << sp.index;
    for (const auto& [j, i] : detail::kOrdered) os << ',' << sp.point.Fji(j, i);
    for (double v : sp.point.sigma) os << ',' << v;
    for (double v : sp.point.lambda) os << ',' << v;
    os << ',' << sp.report.eq1_residual << ',' << sp.report.fsi_residual << ','
       << sp.report.fsp_rank.rank << ',' << sp.report.total << '\n';
  }
  os.precision(old);
}

}  // namespace curv4

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "curv4/chart.hpp"
#include "curv4/errors.hpp"
#include "curv4/numerics.hpp"
#include "curv4/tensor4.hpp"

namespace curv4 {

enum class FrameSource { numeric_eigen, adapted };

inline const char* to_string(FrameSource s) {
  return s == FrameSource::adapted ? "adapted" : "numeric-eigen";
}

/// Eigenvalue clustering: gap <= max(rel * spread, abs * max(1, scale)).
struct ClusterPolicy {
  double rel = 1e-5;
  double abs = 1e-7;

  double tolerance(double spread, double scale) const {
    return std::max(rel * spread, abs * std::max(1.0, scale));
  }
};

/// Labels for ascending values; consecutive values within tol share a label.
inline std::vector<int> cluster_labels(const std::vector<double>& ascending, double tol) {
  std::vector<int> lab(ascending.size(), 0);
  for (std::size_t i = 1; i < ascending.size(); ++i)
    lab[i] = lab[i - 1] + (ascending[i] - ascending[i - 1] > tol ? 1 : 0);
  return lab;
}

inline int distinct_count(std::vector<double> v, const ClusterPolicy& p, double scale) {
  if (v.empty()) return 0;
  std::sort(v.begin(), v.end());
  const auto lab = cluster_labels(v, p.tolerance(v.back() - v.front(), scale));
  return lab.back() + 1;
}

struct FrameOptions {
  bool prefer_adapted = true;
  ClusterPolicy cluster;
};

/// Orthonormal Ricci eigenframe at x with the frame invariants.
struct RicciFrame {
  Vec4 x = Vec4::Zero();
  Mat4 e = Mat4::Identity();
  Quad4 lambda{};
  Pair6 sigma{};
  double s = 0.0;
  std::array<double, 16> F{};       // F_ji at [j*4+i]
  std::array<double, 64> Gamma{};   // Gamma^k_ij at [(k*4+i)*4+j]
  Mat4 d_lambda = Mat4::Zero();     // (i, j) -> D_i lambda_j
  std::array<Pair6, 4> d_sigma{};   // [k][pair(i,j)] -> D_k sigma_ij
  Curv4 R_frame;                    // R in the frame
  FrameSource source = FrameSource::numeric_eigen;
  int orientation = 1;
  std::array<int, 4> cluster{};
  int ricci_clusters = 4;
  std::array<double, 3> wp_spectrum{};
  std::array<double, 3> wm_spectrum{};
  double orthonormality_defect = 0.0;
  double ric_offdiag = 0.0;
  double bracket_defect = 0.0;
  std::vector<std::string> warnings;

  double Fji(int j, int i) const { return F[j * 4 + i]; }
  double G(int k, int i, int j) const { return Gamma[(k * 4 + i) * 4 + j]; }
  double sig(int i, int j) const { return sigma[pair_index(i, j)]; }
  /// Largest |Gamma^k_ij| over pairwise distinct i, j, k.
  double distinct_gamma() const {
    double m = 0.0;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k)
          if (i != j && j != k && i != k) m = std::max(m, std::abs(G(k, i, j)));
    return m;
  }
};

namespace detail {

struct Recipe {
  FrameSource source = FrameSource::numeric_eigen;
  std::array<int, 4> perm{0, 1, 2, 3};
  std::array<int, 4> cluster{0, 1, 2, 3};
  int clusters = 4;
  bool w_rotate = false;
};

struct LocalFrame {
  CurvaturePoint cp;
  Mat4 e;
  Quad4 lambda{};
  Pair6 sigma{};
};

inline Mat4 traceless_ricci(const CurvaturePoint& cp) {
  return cp.ric.ric.b - 0.25 * cp.ric.s * cp.g.g();
}

inline LocalFrame finish_local(CurvaturePoint cp, const Mat4& e) {
  LocalFrame lf{std::move(cp), e, {}, {}};
  const Mat4 b = traceless_ricci(lf.cp);
  for (int i = 0; i < 4; ++i) lf.lambda[i] = e.col(i).dot(b * e.col(i));
  const Curv4 Wf = lf.cp.W.in_frame(e);
  for (int a = 0; a < 6; ++a) {
    const auto [i, j] = kPairs[a];
    lf.sigma[a] = Wf(i, j, i, j);
  }
  return lf;
}

/// Eigenvalues mu (ascending) and g-orthonormal eigenvectors of Ric.
inline std::pair<Vec4, Mat4> ricci_eigen(const CurvaturePoint& cp) {
  const Mat4 E0 = cp.g.orthonormal_frame();
  Mat4 B = E0.transpose() * cp.ric.ric.b * E0;
  B = 0.5 * (B + B.transpose()).eval();
  const EigenResult er = sym_eigen(B);
  return {er.values, E0 * er.vectors};
}

inline Mat4 normalize_columns(const Mat4& A, const Mat4& g) {
  Mat4 e = A;
  for (int i = 0; i < 4; ++i) e.col(i) /= std::sqrt(A.col(i).dot(g * A.col(i)));
  return e;
}

inline double w_offdiag(const Curv4& W, const Mat4& e) {
  const Mat6 M = to_bivector(W.in_frame(e));
  return M.squaredNorm() - M.diagonal().squaredNorm();
}

inline Mat4 rotated(const Mat4& e, int a, int b, double th) {
  Mat4 r = e;
  const double c = std::cos(th), s = std::sin(th);
  r.col(a) = c * e.col(a) + s * e.col(b);
  r.col(b) = -s * e.col(a) + c * e.col(b);
  return r;
}

inline double golden_min(const std::function<double(double)>& f, double lo, double hi) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 60; ++it) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

/// Jacobi rotations inside Ricci clusters minimising the off-diagonal part of
/// the Weyl bivector operator. Global search at the centre, local elsewhere.
inline Mat4 w_rotate(Mat4 e, const Curv4& W, const std::array<int, 4>& cluster, bool global) {
  for (int sweep = 0; sweep < 8; ++sweep) {
    const double before = w_offdiag(W, e);
    for (int a = 0; a < 4; ++a)
      for (int b = a + 1; b < 4; ++b) {
        if (cluster[a] != cluster[b]) continue;
        auto f = [&](double th) { return w_offdiag(W, rotated(e, a, b, th)); };
        double best = 0.0;
        if (global) {
          double fb = f(0.0);
          constexpr int kGrid = 90;
          for (int n = 1; n < kGrid; ++n) {
            const double th = std::numbers::pi * n / kGrid;
            const double v = f(th);
            if (v < fb) {
              fb = v;
              best = th;
            }
          }
          const double w = std::numbers::pi / kGrid;
          best = golden_min(f, best - w, best + w);
        } else {
          best = golden_min(f, -0.2, 0.2);
        }
        if (f(best) < f(0.0)) e = rotated(e, a, b, best);
      }
    if (before - w_offdiag(W, e) <= 1e-14 * std::max(1.0, before)) break;
  }
  return e;
}

/// Per-cluster orthogonal Procrustes alignment of raw eigenvectors to ref.
inline Mat4 align_to(const Mat4& raw, const Mat4& g, const Mat4& ref,
                     const std::array<int, 4>& cluster, int clusters) {
  Mat4 e = raw;
  for (int c = 0; c < clusters; ++c) {
    std::vector<int> idx;
    for (int i = 0; i < 4; ++i)
      if (cluster[i] == c) idx.push_back(i);
    const int m = static_cast<int>(idx.size());
    Eigen::MatrixXd S(4, m), R(4, m);
    for (int k = 0; k < m; ++k) {
      S.col(k) = raw.col(idx[k]);
      R.col(k) = ref.col(idx[k]);
    }
    const Eigen::MatrixXd P = S.transpose() * g * R;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(P, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::MatrixXd U = svd.matrixU() * svd.matrixV().transpose();
    const Eigen::MatrixXd A = S * U;
    for (int k = 0; k < m; ++k) e.col(idx[k]) = A.col(k);
  }
  return e;
}

inline double weyl_scale(const CurvaturePoint& cp) {
  return cp.R.in_frame(cp.g.orthonormal_frame()).norm();
}

/// Frame at the centre point; decides the recipe.
inline LocalFrame centre_frame(const MetricChart& chart, const Vec4& x, const PipelineConfig& cfg,
                               const FrameOptions& opt, Recipe& recipe) {
  CurvaturePoint cp = curvature_at(chart, x, cfg.inner);
  auto [mu, raw] = ricci_eigen(cp);
  const double scale = weyl_scale(cp);
  const double tol = opt.cluster.tolerance(mu[3] - mu[0], scale);
  const auto lab = cluster_labels({mu[0], mu[1], mu[2], mu[3]}, tol);
  for (int i = 0; i < 4; ++i) recipe.cluster[i] = lab[i];
  recipe.clusters = lab.back() + 1;

  if (recipe.clusters == 1) {
    const double wn = cp.W.in_frame(cp.g.orthonormal_frame()).norm();
    if (wn <= opt.cluster.abs * std::max(1.0, scale))
      throw DegenerateFrameError("Ricci tensor is a multiple of g and W vanishes at this point");
  }

  if (recipe.clusters < 4 && opt.prefer_adapted && chart.has_adapted_frame()) {
    recipe.source = FrameSource::adapted;
    const Mat4 A = normalize_columns(chart.adapted_frame(x), cp.g.g());
    const Mat4 b = traceless_ricci(cp);
    std::array<double, 4> lam{};
    for (int i = 0; i < 4; ++i) lam[i] = A.col(i).dot(b * A.col(i));
    std::array<int, 4> perm{0, 1, 2, 3};
    std::stable_sort(perm.begin(), perm.end(), [&](int p, int q) { return lam[p] < lam[q]; });
    recipe.perm = perm;
    Mat4 e;
    for (int i = 0; i < 4; ++i) e.col(i) = A.col(perm[i]);
    std::vector<double> sorted(4);
    for (int i = 0; i < 4; ++i) sorted[i] = lam[perm[i]];
    const auto lab2 = cluster_labels(sorted, opt.cluster.tolerance(sorted[3] - sorted[0], scale));
    for (int i = 0; i < 4; ++i) recipe.cluster[i] = lab2[i];
    recipe.clusters = lab2.back() + 1;
    return finish_local(std::move(cp), e);
  }
  recipe.source = FrameSource::numeric_eigen;
  recipe.w_rotate = recipe.clusters < 4;
  Mat4 e = raw;
  if (recipe.w_rotate) e = w_rotate(e, cp.W, recipe.cluster, true);
  return finish_local(std::move(cp), e);
}

/// Frame at a point near a reference frame, following the recipe.
inline LocalFrame follow_frame(const MetricChart& chart, const Vec4& y, const PipelineConfig& cfg,
                               const Recipe& recipe, const Mat4& ref) {
  CurvaturePoint cp = curvature_at(chart, y, cfg.inner);
  if (recipe.source == FrameSource::adapted) {
    const Mat4 A = normalize_columns(chart.adapted_frame(y), cp.g.g());
    Mat4 e;
    for (int i = 0; i < 4; ++i) e.col(i) = A.col(recipe.perm[i]);
    return finish_local(std::move(cp), e);
  }
  auto [mu, raw] = ricci_eigen(cp);
  Mat4 e = align_to(raw, cp.g.g(), ref, recipe.cluster, recipe.clusters);
  if (recipe.w_rotate) e = w_rotate(e, cp.W, recipe.cluster, false);
  return finish_local(std::move(cp), e);
}

inline Eigen::VectorXd pack_frame(const LocalFrame& lf) {
  Eigen::VectorXd v(26);
  for (int n = 0; n < 16; ++n) v[n] = lf.e.data()[n];
  for (int i = 0; i < 4; ++i) v[16 + i] = lf.lambda[i];
  for (int a = 0; a < 6; ++a) v[20 + a] = lf.sigma[a];
  return v;
}

inline RicciFrame assemble(const MetricChart& chart, const Vec4& x, const PipelineConfig& cfg,
                           const Recipe& recipe, LocalFrame centre) {
  auto packed = [&](const Vec4& y) -> Eigen::VectorXd {
    return pack_frame(follow_frame(chart, y, cfg, recipe, centre.e));
  };
  std::array<Eigen::VectorXd, 4> d;
  for (int a = 0; a < 4; ++a) d[a] = central_diff(packed, x, a, cfg.inner, chart.domain());

  RicciFrame fr;
  fr.x = x;
  fr.e = centre.e;
  fr.lambda = centre.lambda;
  fr.sigma = centre.sigma;
  fr.s = centre.cp.ric.s;
  fr.source = recipe.source;
  fr.cluster = recipe.cluster;
  fr.ricci_clusters = recipe.clusters;
  fr.orientation = fr.e.determinant() > 0 ? 1 : -1;
  fr.R_frame = centre.cp.R.in_frame(fr.e);
  const Mat4& g = centre.cp.g.g();
  fr.orthonormality_defect = (fr.e.transpose() * g * fr.e - Mat4::Identity()).cwiseAbs().maxCoeff();
  const Mat4 bf = fr.e.transpose() * traceless_ricci(centre.cp) * fr.e;
  fr.ric_offdiag = (bf - Mat4(bf.diagonal().asDiagonal())).cwiseAbs().maxCoeff();

  // De[j](mu, nu) = d_nu e_j^mu
  std::array<Mat4, 4> De;
  for (int j = 0; j < 4; ++j)
    for (int mu = 0; mu < 4; ++mu)
      for (int nu = 0; nu < 4; ++nu) De[j](mu, nu) = d[nu][j * 4 + mu];

  const auto& Gc = centre.cp.gamma;
  std::array<std::array<Vec4, 4>, 4> nab;  // nab[i][j] = nabla_{e_i} e_j
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      Vec4 v = De[j] * fr.e.col(i);
      for (int mu = 0; mu < 4; ++mu)
        for (int nu = 0; nu < 4; ++nu)
          for (int rho = 0; rho < 4; ++rho) v[mu] += Gc(mu, nu, rho) * fr.e(nu, i) * fr.e(rho, j);
      nab[i][j] = v;
    }
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        fr.Gamma[(k * 4 + i) * 4 + j] = fr.e.col(k).dot(g * nab[i][j]);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) fr.F[j * 4 + i] = fr.G(i, i, j);

  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j) {
      const Vec4 br = De[j] * fr.e.col(i) - De[i] * fr.e.col(j);
      for (int k = 0; k < 4; ++k)
        if (k != i && k != j)
          fr.bracket_defect = std::max(fr.bracket_defect, std::abs(fr.e.col(k).dot(g * br)));
    }
  if (fr.bracket_defect > 1e-4)
    fr.warnings.push_back("non-D0: Lie brackets have components outside span(e_i, e_j)");

  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      double acc = 0.0;
      for (int nu = 0; nu < 4; ++nu) acc += fr.e(nu, i) * d[nu][16 + j];
      fr.d_lambda(i, j) = acc;
    }
  for (int k = 0; k < 4; ++k)
    for (int a = 0; a < 6; ++a) {
      double acc = 0.0;
      for (int nu = 0; nu < 4; ++nu) acc += fr.e(nu, k) * d[nu][20 + a];
      fr.d_sigma[k][a] = acc;
    }

  const WeylSplit ws = sd_split(centre.cp.W, centre.cp.g, fr.e, 1e-12 * fr.R_frame.norm());
  Eigen::SelfAdjointEigenSolver<Mat3> ep(ws.Wp), em(ws.Wm);
  for (int a = 0; a < 3; ++a) {
    fr.wp_spectrum[a] = ep.eigenvalues()[a];
    fr.wm_spectrum[a] = em.eigenvalues()[a];
  }
  return fr;
}

inline RicciFrame extract_with(const MetricChart& chart, const Vec4& x, const PipelineConfig& cfg,
                               const FrameOptions& opt, Recipe& recipe,
                               const std::optional<Mat4>& reference) {
  LocalFrame centre = reference ? follow_frame(chart, x, cfg, recipe, *reference)
                                : centre_frame(chart, x, cfg, opt, recipe);
  return assemble(chart, x, cfg, recipe, std::move(centre));
}

}  // namespace detail

/// Ricci eigenframe at x with F, Gamma and derivatives of lambda and sigma.
inline RicciFrame extract_frame(const MetricChart& chart, const Vec4& x,
                                const PipelineConfig& cfg = {}, const FrameOptions& opt = {}) {
  detail::Recipe recipe;
  return detail::extract_with(chart, x, cfg, opt, recipe, std::nullopt);
}

/// F_ji and D_i F_jk (DF at [(i*4+j)*4+k]).
struct StructureData {
  std::array<double, 16> F{};
  std::array<double, 64> DF{};
  double Fji(int j, int i) const { return F[j * 4 + i]; }
  double D(int i, int j, int k) const { return DF[(i * 4 + j) * 4 + k]; }
};

/// Structure data at x; D_i F_jk from frames extracted on the outer stencil
/// and aligned to the centre frame.
inline StructureData structure_data(const MetricChart& chart, const Vec4& x,
                                    const PipelineConfig& cfg = {},
                                    const FrameOptions& opt = {}) {
  detail::Recipe recipe;
  const RicciFrame centre = detail::extract_with(chart, x, cfg, opt, recipe, std::nullopt);
  auto Fvec = [&](const Vec4& y) -> Eigen::VectorXd {
    const RicciFrame f = detail::extract_with(chart, y, cfg, opt, recipe, centre.e);
    return Eigen::Map<const Eigen::VectorXd>(f.F.data(), 16);
  };
  StructureData sd;
  sd.F = centre.F;
  std::array<Eigen::VectorXd, 4> d;
  for (int a = 0; a < 4; ++a) d[a] = central_diff(Fvec, x, a, cfg.outer, chart.domain());
  for (int i = 0; i < 4; ++i)
    for (int jk = 0; jk < 16; ++jk) {
      double acc = 0.0;
      for (int nu = 0; nu < 4; ++nu) acc += centre.e(nu, i) * d[nu][jk];
      sd.DF[i * 16 + jk] = acc;
    }
  return sd;
}

/// Curvature predicted from structure functions: six R_ijij (pair order) and
/// R_kijk at [(k*4+i)*4+j] for distinct i, j, k.
struct StructureCurvature {
  Pair6 Rijij{};
  std::array<double, 64> Rkijk{};
  double kijk(int k, int i, int j) const { return Rkijk[(k * 4 + i) * 4 + j]; }
};

inline StructureCurvature curvature_from_structure(const StructureData& sd, const RicciFrame& frame) {
  if (frame.distinct_gamma() > 1e-4)
    throw PreconditionError("curvature_from_structure requires a D0 frame");
  StructureCurvature out;
  auto F = [&](int j, int i) { return sd.Fji(j, i); };
  for (int a = 0; a < 6; ++a) {
    const auto [i, j] = kPairs[a];
    int k = -1, l = -1;
    for (int m = 0; m < 4; ++m)
      if (m != i && m != j) (k < 0 ? k : l) = m;
    out.Rijij[a] = -(sd.D(i, i, j) + sd.D(j, j, i) + F(i, j) * F(i, j) + F(j, i) * F(j, i) +
                     F(k, i) * F(k, j) + F(l, i) * F(l, j));
  }
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (i != j && j != k && i != k)
          out.Rkijk[(k * 4 + i) * 4 + j] = sd.D(i, j, k) - (F(j, i) - F(j, k)) * F(i, k);
  return out;
}

/// Max componentwise difference between structure-predicted and frame curvature.
inline double structure_curvature_error(const StructureCurvature& sc, const RicciFrame& frame) {
  double worst = 0.0;
  for (int a = 0; a < 6; ++a) {
    const auto [i, j] = kPairs[a];
    worst = std::max(worst, std::abs(sc.Rijij[a] - frame.R_frame(i, j, i, j)));
  }
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        if (i != j && j != k && i != k)
          worst = std::max(worst, std::abs(sc.kijk(k, i, j) - frame.R_frame(k, i, j, k)));
  return worst;
}

/// Residuals of the six frame relations a) - f).
struct SkwResiduals {
  double a = 0.0, b = 0.0, c = 0.0, d = 0.0, e = 0.0, f = 0.0;
  double max() const { return std::max({a, b, c, d, e, f}); }
};

inline SkwResiduals skw_residuals(const RicciFrame& fr) {
  SkwResiduals r;
  const auto& L = fr.lambda;
  auto spread3 = [](double p, double q, double s) {
    return std::max({std::abs(p - q), std::abs(q - s), std::abs(p - s)});
  };
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) {
        if (i == j || j == k || i == k) continue;
        r.a = std::max(r.a, std::abs(fr.G(k, i, j) + fr.G(j, i, k)));
        r.c = std::max(r.c, spread3((L[j] - L[k]) * fr.G(k, i, j), (L[k] - L[i]) * fr.G(i, j, k),
                                    (L[i] - L[j]) * fr.G(j, k, i)));
        r.d = std::max(r.d, spread3((fr.sig(i, j) - fr.sig(i, k)) * fr.G(k, i, j),
                                    (fr.sig(j, k) - fr.sig(j, i)) * fr.G(i, j, k),
                                    (fr.sig(k, i) - fr.sig(k, j)) * fr.G(j, k, i)));
      }
  const auto id = check_weyl_frame_identities(fr.sigma);
  r.b = *std::max_element(id.begin(), id.end());
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      if (i == j) continue;
      r.e = std::max(r.e, std::abs(fr.d_lambda(i, j) - (L[j] - L[i]) * fr.G(i, j, j)));
      int k = -1, l = -1;
      for (int m = 0; m < 4; ++m)
        if (m != i && m != j) (k < 0 ? k : l) = m;
      const double rhs = (fr.sig(i, j) - fr.sig(i, k)) * fr.G(j, k, k) +
                         (fr.sig(i, j) - fr.sig(i, l)) * fr.G(j, l, l);
      r.f = std::max(r.f, std::abs(fr.d_sigma[j][pair_index(i, j)] - rhs));
    }
  return r;
}

/// S_l, y_l from the sorted remaining indices, cross-checked against every
/// other ordering of (i, j, k).
struct SYInvariants {
  Quad4 S{};
  Quad4 y{};
  std::array<std::optional<double>, 4> alpha{};
  double crosscheck = 0.0;
  bool consistent = true;
};

inline SYInvariants sy_invariants(const RicciFrame& fr, double cross_tol = 1e-4,
                                  double y_floor = 1e-6) {
  SYInvariants out;
  for (int l = 0; l < 4; ++l) {
    std::array<int, 3> idx{};
    int n = 0;
    for (int m = 0; m < 4; ++m)
      if (m != l) idx[n++] = m;
    auto S_of = [&](int i, int j, int k) { return (fr.sig(i, j) - fr.sig(i, k)) * fr.G(k, i, j); };
    auto y_of = [&](int i, int j, int k) { return (fr.lambda[j] - fr.lambda[k]) * fr.G(k, i, j); };
    out.S[l] = S_of(idx[0], idx[1], idx[2]);
    out.y[l] = y_of(idx[0], idx[1], idx[2]);
    std::array<int, 3> p = idx;
    do {
      out.crosscheck = std::max({out.crosscheck, std::abs(S_of(p[0], p[1], p[2]) - out.S[l]),
                                 std::abs(y_of(p[0], p[1], p[2]) - out.y[l])});
    } while (std::next_permutation(p.begin(), p.end()));
    if (std::abs(out.y[l]) > y_floor) out.alpha[l] = out.S[l] / out.y[l];
  }
  out.consistent = out.crosscheck <= cross_tol;
  return out;
}

/// Spectral data at one point: Ricci eigenvalues, W+/W- spectra, optional S_l.
struct SpectralSample {
  Quad4 ricci{};
  std::array<double, 3> wp{};
  std::array<double, 3> wm{};
  std::optional<Quad4> S;
  double scale = 0.0;
};

/// Frame-free spectral sample (works where no canonical frame exists).
inline SpectralSample spectral_sample(const CurvaturePoint& cp) {
  SpectralSample s;
  const auto [mu, e] = detail::ricci_eigen(cp);
  for (int i = 0; i < 4; ++i) s.ricci[i] = mu[i];
  const WeylSplit ws = sd_split(cp.W, cp.g, e, 1e-12 * detail::weyl_scale(cp));
  Eigen::SelfAdjointEigenSolver<Mat3> ep(ws.Wp), em(ws.Wm);
  for (int a = 0; a < 3; ++a) {
    s.wp[a] = ep.eigenvalues()[a];
    s.wm[a] = em.eigenvalues()[a];
  }
  s.scale = detail::weyl_scale(cp);
  return s;
}

inline SpectralSample spectral_sample(const RicciFrame& fr) {
  SpectralSample s;
  s.ricci = fr.lambda;
  s.wp = fr.wp_spectrum;
  s.wm = fr.wm_spectrum;
  s.S = sy_invariants(fr).S;
  s.scale = fr.R_frame.norm();
  return s;
}

struct InvariantCounts {
  int r = 0;
  int w = 0;
  int w_minus = 0;
  int d = 0;
  std::string case_label;
};

/// Maxima over samples of distinct-eigenvalue counts and of zeta. d is a
/// lower bound for the maximum over the manifold.
inline InvariantCounts invariant_counts(const std::vector<SpectralSample>& samples,
                                        const ClusterPolicy& policy = {}, double s_tol = 1e-6) {
  if (samples.empty()) throw InputError("invariant_counts needs at least one sample");
  InvariantCounts c;
  for (const auto& sm : samples) {
    c.r = std::max(c.r, distinct_count({sm.ricci.begin(), sm.ricci.end()}, policy, sm.scale));
    c.w = std::max(c.w, distinct_count({sm.wp.begin(), sm.wp.end()}, policy, sm.scale));
    c.w_minus = std::max(c.w_minus, distinct_count({sm.wm.begin(), sm.wm.end()}, policy, sm.scale));
    if (sm.S) {
      const double unit = std::pow(std::max(1.0, sm.scale), 1.5);
      int zeta = 0;
      for (double v : *sm.S)
        if (std::abs(v) / unit > s_tol) ++zeta;
      c.d = std::max(c.d, zeta);
    }
  }
  if (c.r == 1)
    c.case_label = "A";
  else if (c.w == 1)
    c.case_label = "B";
  else if (c.w == 2)
    c.case_label = "C";
  else if (c.d == 0)
    c.case_label = "D0";
  else if (c.d == 1)
    c.case_label = "D1";
  else
    c.case_label = "D2-excluded";
  return c;
}

}  // namespace curv4

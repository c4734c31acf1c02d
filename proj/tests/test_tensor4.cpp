#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "curv4/numerics.hpp"
#include "curv4/tensor4.hpp"

using namespace curv4;

namespace {

/// Sums of Kulkarni-Nomizu products of random symmetric forms span the
/// algebraic curvature tensors.
Curv4 random_curvature(std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  auto sym = [&] {
    Mat4 B;
    for (int i = 0; i < 16; ++i) B.data()[i] = N(rng);
    return SymBilinear4{B + B.transpose()};
  };
  Curv4 R;
  for (int t = 0; t < 4; ++t) R += kulkarni_nomizu(sym(), sym());
  return R;
}

Curv4 constant_curvature(const Metric4& g, double K) {
  SymBilinear4 gg{g.g()};
  return (0.5 * K) * kulkarni_nomizu(gg, gg);
}

/// Orthonormal-frame tensor with R_1212 = k1, R_3434 = k2 and nothing else.
Curv4 product_tensor(double k1, double k2) {
  Curv4 R;
  auto put = [&](int i, int j, double k) {
    R(i, j, i, j) = k;
    R(j, i, j, i) = k;
    R(i, j, j, i) = -k;
    R(j, i, i, j) = -k;
  };
  put(0, 1, k1);
  put(2, 3, k2);
  return R;
}

std::array<double, 3> sorted_eigen(const Mat3& m) {
  Eigen::SelfAdjointEigenSolver<Mat3> es(m);
  return {es.eigenvalues()[0], es.eigenvalues()[1], es.eigenvalues()[2]};
}

Metric4 random_metric(std::mt19937_64& rng) {
  std::normal_distribution<double> N(0.0, 0.3);
  Mat4 B;
  for (int i = 0; i < 16; ++i) B.data()[i] = N(rng);
  return Metric4(Mat4::Identity() + B * B.transpose());
}

}  // namespace

TEST(Metric4, RejectsInvalidMatrices) {
  EXPECT_THROW(Metric4(-Mat4::Identity()), InputError);
  Mat4 a = Mat4::Identity();
  a(0, 1) = 0.5;
  EXPECT_THROW(Metric4{a}, InputError);
  Mat4 n = Mat4::Identity();
  n(2, 2) = std::nan("");
  EXPECT_THROW(Metric4{n}, InputError);
}

TEST(Metric4, OrthonormalFrame) {
  std::mt19937_64 rng(1);
  const Metric4 g = random_metric(rng);
  const Mat4 E = g.orthonormal_frame();
  EXPECT_LE((E.transpose() * g.g() * E - Mat4::Identity()).norm(), 1e-12);
  EXPECT_LE((g.g() * g.inv() - Mat4::Identity()).norm(), 1e-12);
}

TEST(Curv4Algebra, ConstantCurvatureFromKulkarniNomizu) {
  std::mt19937_64 rng(2);
  const Metric4 g = random_metric(rng);
  const Curv4 R = constant_curvature(g, 1.0);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k)
        for (int l = 0; l < 4; ++l)
          EXPECT_NEAR(R(i, j, k, l), g(i, k) * g(j, l) - g(i, l) * g(j, k), 1e-13);
  EXPECT_LE(symmetry_residuals(R).max(), 1e-13);
  const auto rc = ricci_contract(R, g);
  EXPECT_LE((rc.ric.b - 3.0 * g.g()).norm(), 1e-12);
  EXPECT_NEAR(rc.s, 12.0, 1e-12);
  EXPECT_LE(weyl_from_curv(R, g).norm(), 1e-12);
}

TEST(Curv4Algebra, SymmetrizeProjectsOntoCurvatureClass) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> N;
  for (int trial = 0; trial < 20; ++trial) {
    const Curv4 R = random_curvature(rng);
    EXPECT_LE(symmetry_residuals(R).max(), 1e-13 * R.norm());
    const auto again = curvature_symmetrize(R.data());
    EXPECT_LE(again.distance, 1e-13 * R.norm());
    // A small perturbation is removed and the defect reported.
    Array4 noisy = R.data();
    for (double& v : noisy) v += 1e-6 * N(rng);
    const auto proj = curvature_symmetrize(noisy);
    EXPECT_LE(symmetry_residuals(proj.R).max(), 1e-13 * R.norm());
    EXPECT_GT(proj.distance, 0.0);
    EXPECT_LE((proj.R - R).norm(), 1e-4);
  }
  Array4 junk{};
  for (double& v : junk) v = N(rng);
  EXPECT_THROW(curvature_symmetrize(junk), InconsistencyError);
}

TEST(Curv4Algebra, InFrameTransformsCovariantly) {
  std::mt19937_64 rng(4);
  const Metric4 g = random_metric(rng);
  const Curv4 R = constant_curvature(g, 2.0);
  const Curv4 Rf = R.in_frame(g.orthonormal_frame());
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (i != j) {
        EXPECT_NEAR(Rf(i, j, i, j), 2.0, 1e-12);
      }
}

TEST(Weyl, TracelessAndIdempotent) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    const Metric4 g = random_metric(rng);
    const Curv4 R = random_curvature(rng);
    const Curv4 W = weyl_from_curv(R, g);
    EXPECT_LE(ricci_contract(W, g).ric.b.norm(), 1e-12 * R.norm());
    EXPECT_LE(symmetry_residuals(W).max(), 1e-12 * R.norm());
    EXPECT_LE((weyl_from_curv(W, g) - W).norm(), 1e-12 * R.norm());
    EXPECT_LE((algebraic_weyl(R, g) - W).norm(), 1e-12 * R.norm());
  }
}

TEST(Hodge, InvolutionWithOrthonormalEigenbases) {
  for (int o : {1, -1}) {
    const Mat6 H = hodge_star(o);
    EXPECT_LE((H * H - Mat6::Identity()).norm(), 1e-15);
    EXPECT_LE((H - H.transpose()).norm(), 1e-15);
    for (int sign : {1, -1}) {
      const auto U = sd_basis(sign, o);
      EXPECT_LE((U.transpose() * U - Mat3::Identity()).norm(), 1e-15);
      EXPECT_LE((H * U - sign * U).norm(), 1e-15);
    }
  }
  EXPECT_EQ(levi_civita(0, 1, 2, 3), 1);
  EXPECT_EQ(levi_civita(1, 0, 2, 3), -1);
  EXPECT_EQ(levi_civita(0, 0, 2, 3), 0);
}

TEST(SdSplit, ProductOfSurfacesSpectra) {
  const Metric4 g;
  // S2(1) x S2(1): Einstein product.
  {
    const Curv4 W = weyl_from_curv(product_tensor(1.0, 1.0), g);
    const auto sp = sd_split(W, g, Mat4::Identity());
    const auto e = sorted_eigen(sp.Wp);
    EXPECT_NEAR(e[0], -1.0 / 3.0, 1e-13);
    EXPECT_NEAR(e[1], -1.0 / 3.0, 1e-13);
    EXPECT_NEAR(e[2], 2.0 / 3.0, 1e-13);
  }
  // S2(1) x S2(2): sigma data and spectra (k1 + k2)/3 * {1, -1/2, -1/2}.
  {
    const Curv4 W = weyl_from_curv(product_tensor(1.0, 2.0), g);
    const auto sp = sd_split(W, g, Mat4::Identity());
    const Pair6 expect{1.0, -0.5, -0.5, -0.5, -0.5, 1.0};
    for (int a = 0; a < 6; ++a) EXPECT_NEAR(sp.sigma[a], expect[a], 1e-13);
    const auto ep = sorted_eigen(sp.Wp), em = sorted_eigen(sp.Wm);
    for (int a = 0; a < 3; ++a) EXPECT_NEAR(ep[a], em[a], 1e-13);
    EXPECT_NEAR(ep[2], 1.0, 1e-13);
    for (double v : check_weyl_frame_identities(sp.sigma)) EXPECT_LE(v, 1e-13);
  }
  // Opposite curvatures: conformally flat.
  EXPECT_LE(weyl_from_curv(product_tensor(1.0, -1.0), g).norm(), 1e-14);
}

TEST(SdSplit, TracelessRandomWeylAndOrientation) {
  std::mt19937_64 rng(6);
  const Mat4 P = Eigen::Vector4d(-1, 1, 1, 1).asDiagonal();
  for (int trial = 0; trial < 20; ++trial) {
    const Metric4 g = random_metric(rng);
    const Curv4 W = weyl_from_curv(random_curvature(rng), g);
    const Mat4 E = g.orthonormal_frame();
    const auto a = sd_split(W, g, E);
    const double nw = W.in_frame(E).norm();
    EXPECT_LE(std::abs(a.Wp.trace()), 1e-10 * nw);
    EXPECT_LE(std::abs(a.Wm.trace()), 1e-10 * nw);
    EXPECT_LE(a.commutator, 1e-10 * nw);
    const auto pa = sorted_eigen(a.Wp), ma = sorted_eigen(a.Wm);

    // Reversing one frame vector keeps the chart orientation: no change.
    Mat4 F = E;
    F.col(0) *= -1.0;
    const auto b = sd_split(W, g, F);
    EXPECT_EQ(b.orientation, -a.orientation);
    const auto pb = sorted_eigen(b.Wp);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(pa[k], pb[k], 1e-10 * nw);

    // Reflecting the chart reverses orientation and swaps W+ with W-.
    const auto c = sd_split(W.in_frame(P), Metric4(P * g.g() * P), P * E);
    const auto pc = sorted_eigen(c.Wp), mc = sorted_eigen(c.Wm);
    for (int k = 0; k < 3; ++k) {
      EXPECT_NEAR(pa[k], mc[k], 1e-10 * nw);
      EXPECT_NEAR(ma[k], pc[k], 1e-10 * nw);
    }
  }
}

TEST(SdSplit, Preconditions) {
  const Metric4 g;
  EXPECT_THROW(sd_split(product_tensor(1.0, 2.0), g, Mat4::Identity()), PreconditionError);
  const Curv4 W = weyl_from_curv(product_tensor(1.0, 2.0), g);
  EXPECT_THROW(sd_split(W, g, 2.0 * Mat4::Identity()), PreconditionError);
}

TEST(Sectional, RoundTripAndFrameIdentities) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> N;
  for (int trial = 0; trial < 50; ++trial) {
    Pair6 R;
    for (double& v : R) v = N(rng);
    const WeylData d = weyl_from_sectional(R);
    const Pair6 back = sectional_from_weyl(d.sigma, d.lambda, d.s);
    for (int a = 0; a < 6; ++a) EXPECT_NEAR(back[a], R[a], 1e-13);
    EXPECT_NEAR(d.lambda[0] + d.lambda[1] + d.lambda[2] + d.lambda[3], 0.0, 1e-13);
    // Row sums of sigma vanish for any sectional data.
    const auto id = check_weyl_frame_identities(d.sigma);
    for (int k = 3; k < 7; ++k) EXPECT_LE(id[k], 1e-13);
  }
  // S2(1) x S2(2) sectional data.
  const WeylData p = weyl_from_sectional({1.0, 0.0, 0.0, 0.0, 0.0, 2.0});
  EXPECT_NEAR(p.s, 6.0, 1e-15);
  EXPECT_NEAR(p.sigma[0], 1.0, 1e-15);
  EXPECT_NEAR(p.sigma[1], -0.5, 1e-15);
  EXPECT_NEAR(p.lambda[0], -0.5, 1e-15);
  EXPECT_NEAR(p.lambda[3], 0.5, 1e-15);
}

TEST(Sectional, SigmaMatchesWeylDiagonalInFrame) {
  // For a curvature tensor diagonal in the bivector basis, sigma from the
  // sectional bijection equals the Weyl diagonal.
  std::mt19937_64 rng(8);
  std::normal_distribution<double> N;
  Pair6 sec;
  for (double& v : sec) v = N(rng);
  Curv4 R;
  for (int a = 0; a < 6; ++a) {
    const auto [i, j] = kPairs[a];
    R(i, j, i, j) = R(j, i, j, i) = sec[a];
    R(i, j, j, i) = R(j, i, i, j) = -sec[a];
  }
  const Metric4 g;
  const Curv4 W = weyl_from_curv(R, g);
  const WeylData d = weyl_from_sectional(sec);
  for (int a = 0; a < 6; ++a) {
    const auto [i, j] = kPairs[a];
    EXPECT_NEAR(W(i, j, i, j), d.sigma[a], 1e-13);
  }
}

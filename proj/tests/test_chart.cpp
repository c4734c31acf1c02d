#include <gtest/gtest.h>

#include <cmath>

#include "curv4/chart.hpp"
#include "curv4/example_metrics.hpp"
#include "oracles.hpp"

using namespace curv4;

namespace {

MetricFn metric_of(const MetricChart& c) {
  return [&c](const Vec4& x) { return c.metric(x); };
}

/// Coordinate Ricci and scalar curvature of e^{2 a x1^3} I.
oracle::ConformalFlat bump_ricci(double a, const Vec4& x) {
  const double phi = a * std::pow(x[0], 3);
  Vec4 d = Vec4::Zero();
  d[0] = 3 * a * x[0] * x[0];
  Mat4 h = Mat4::Zero();
  h(0, 0) = 6 * a * x[0];
  return oracle::conformally_flat_ricci(phi, d, h);
}

}  // namespace

TEST(MetricChart, RejectsBadMetricsAndDomains) {
  const Box4 box;
  EXPECT_THROW(MetricChart("neg", box, [](const Vec4&) -> Mat4 { return -Mat4::Identity(); }),
               InputError);
  EXPECT_THROW(MetricChart("nan", box,
                           [](const Vec4&) -> Mat4 { return Mat4::Constant(std::nan("")); }),
               InputError);
  EXPECT_THROW(MetricChart("flatbox", Box4{Vec4::Zero(), Vec4(1, 1, 0, 1)},
                           [](const Vec4&) -> Mat4 { return Mat4::Identity(); }),
               InputError);
  const MetricChart c = examples::make_constant_curvature(1.0);
  EXPECT_THROW(c.metric(Vec4::Constant(5.0)), DomainError);
  EXPECT_THROW(c.adapted_frame(Vec4::Zero()), PreconditionError);
  EXPECT_LE(c.smoothness_defect(), 1e-8);
}

TEST(MetricJet, FootprintMustStayInDomain) {
  const MetricChart c = examples::make_flat();
  EXPECT_THROW(metric_jet(c, Vec4(0.9995, 0, 0, 0), {1e-3, 4}), DomainError);
  EXPECT_NO_THROW(metric_jet(c, Vec4(0.99, 0, 0, 0), {1e-3, 4}));
}

TEST(Christoffel, MatchesConformalClosedForm) {
  const double K0 = 1.0;
  const MetricChart c = examples::make_constant_curvature(K0);
  const Vec4 x(0.1, -0.2, 0.3, 0.05);
  const Christoffel G = christoffel(c, x);
  const double q = 1.0 + 0.25 * K0 * x.squaredNorm();
  const Vec4 dphi = -(0.5 * K0 / q) * x;
  for (int k = 0; k < 4; ++k)
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const double expect = (k == i) * dphi[j] + (k == j) * dphi[i] - (i == j) * dphi[k];
        EXPECT_NEAR(G(k, i, j), expect, 1e-10);
      }
}

TEST(Christoffel, MetricCompatibility) {
  for (std::uint64_t seed : {1, 2, 3}) {
    const MetricChart c = examples::make_perturbed_flat(seed);
    EXPECT_LE(metric_compatibility_residual(c, Vec4(0.2, -0.1, 0.3, 0.0)), 1e-9);
  }
}

TEST(Curvature, SpaceFormsInClosedForm) {
  for (double K0 : {1.0, -1.0, 0.0}) {
    const MetricChart c = examples::make_constant_curvature(K0);
    const Vec4 x(0.1, 0.2, -0.15, 0.05);
    const CurvaturePoint p = curvature_at(c, x);
    const Mat4 g = p.g.g();
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j)
        for (int k = 0; k < 4; ++k)
          for (int l = 0; l < 4; ++l)
            EXPECT_NEAR(p.R(i, j, k, l), K0 * (g(i, k) * g(j, l) - g(i, l) * g(j, k)), 1e-7);
    EXPECT_NEAR(p.ric.s, 12.0 * K0, 1e-6);
    EXPECT_LE(p.W.norm(), 1e-6);
  }
}

TEST(Curvature, AgreesWithNestedDifferenceOracle) {
  for (std::uint64_t seed : {11, 12, 13}) {
    const MetricChart c = examples::make_perturbed_flat(seed);
    for (const Vec4& x : {Vec4(0, 0, 0, 0), Vec4(0.3, -0.2, 0.1, 0.4), Vec4(-0.5, 0.5, -0.4, 0.2)}) {
      const CurvaturePoint p = curvature_at(c, x);
      const auto R = oracle::riemann(metric_of(c), x);
      double worst = 0.0;
      for (int n = 0; n < 256; ++n) worst = std::max(worst, std::abs(p.R.data()[n] - R[n]));
      EXPECT_LE(worst, 1e-6 * std::max(1.0, p.R.norm())) << "seed " << seed;
      EXPECT_GT(p.R.norm(), 1e-3);
    }
  }
}

TEST(Curvature, ConformallyFlatRicciClosedForm) {
  const double a = 0.1;
  const MetricChart c = examples::make_bump_nonharmonic(a);
  for (const Vec4& x : {Vec4(1.0, 0.1, 0.2, 0.3), Vec4(-0.6, 0, 0.4, -0.2), Vec4(0.3, 0.5, 0.5, 0.5)}) {
    const CurvaturePoint p = curvature_at(c, x);
    const auto ref = bump_ricci(a, x);
    EXPECT_LE((p.ric.ric.b - ref.ric).cwiseAbs().maxCoeff(), 1e-7);
    EXPECT_NEAR(p.ric.s, ref.s, 1e-7);
    EXPECT_LE(p.W.norm(), 1e-7);
  }
}

TEST(Curvature, FourthOrderStepConvergence) {
  const MetricChart c = examples::make_constant_curvature(1.0);
  const Vec4 x(0.2, 0.1, -0.1, 0.1);
  auto err = [&](double h) {
    const CurvaturePoint p = curvature_at(c, x, {h, 4});
    return std::abs(p.ric.s - 12.0);
  };
  EXPECT_GT(std::log2(err(0.04) / err(0.02)), 3.5);
  for (int order : {2, 6}) EXPECT_NEAR(curvature_at(c, x, {1e-3, order}).ric.s, 12.0, 1e-5);
}

TEST(Harmonicity, SpaceFormIsHarmonic) {
  const MetricChart c = examples::make_constant_curvature(1.0);
  const auto pts = sample_points(c.domain(), 6, 3);
  const HarmonicityReport r = harmonicity_report(c, pts, {}, 1e-4);
  EXPECT_TRUE(r.harmonic);
  EXPECT_LE(r.max_d_ric, 1e-4);
  EXPECT_LE(r.max_bianchi, 1e-5);
  EXPECT_LE(r.scalar_spread, 1e-6);
  for (const auto& p : r.points) EXPECT_LE(p.div_r, 1e-4);
}

TEST(Harmonicity, BumpScalarGradientMatchesClosedForm) {
  const double a = 0.1;
  const MetricChart c = examples::make_bump_nonharmonic(a);
  const Vec4 x(1.0, 0.1, 0.2, 0.3);
  const HarmonicityPoint hp = harmonicity_at(c, x, {});
  // s(x1) = -6 e^{-2 phi} (6 a x1 + 9 a^2 x1^4), |ds|_g = e^{-phi} |s'(x1)|.
  auto s = [a](double t) { return -6 * std::exp(-2 * a * t * t * t) * (6 * a * t + 9 * a * a * std::pow(t, 4)); };
  const double h = 1e-5;
  const double ds = std::exp(-a) * std::abs((s(1 + h) - s(1 - h)) / (2 * h));
  EXPECT_NEAR(hp.ds, ds, 1e-4 * ds);
  EXPECT_GT(hp.ds, 1e-2);
  EXPECT_LE(hp.bianchi, 1e-5);
  EXPECT_FALSE(harmonicity_report(c, {x}, {}, 1e-4).harmonic);
}

TEST(Harmonicity, ContractedBianchiHoldsForAnyMetric) {
  for (std::uint64_t seed : {21, 22}) {
    const MetricChart c = examples::make_perturbed_flat(seed);
    const auto pts = sample_points(c.domain(), 4, seed);
    const HarmonicityReport r = harmonicity_report(c, pts, {}, 1e-4);
    EXPECT_LE(r.max_bianchi, 1e-5);
    EXPECT_GT(r.max_d_ric, 1e-3);
  }
}

TEST(SamplePoints, DeterministicAndInsideShrunkBox) {
  const Box4 box{Vec4(-1, -2, 0, 3), Vec4(1, 2, 1, 4)};
  const auto a = sample_points(box, 16, 7);
  const auto b = sample_points(box, 16, 7);
  const auto c = sample_points(box, 16, 8);
  ASSERT_EQ(a.size(), 16u);
  const Box4 in = box.shrunk(0.9);
  bool differs = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_TRUE(in.contains(a[i]));
    EXPECT_EQ(a[i], b[i]);
    differs = differs || a[i] != c[i];
  }
  EXPECT_TRUE(differs);
  EXPECT_THROW(sample_points(box, 0, 1), InputError);
}

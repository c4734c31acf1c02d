#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "curv4/example_metrics.hpp"
#include "curv4/variety.hpp"
#include "oracles.hpp"

using namespace curv4;

namespace {

VarietyPoint from_raw(const oracle::RawPoint& r) {
  VarietyPoint p;
  p.F = r.F;
  p.sigma = r.sigma;
  p.lambda = r.lambda;
  return p;
}

VarietyPoint product_point(double k1, double k2) {
  const WeylData w = weyl_from_sectional({k1, 0.0, 0.0, 0.0, 0.0, k2});
  VarietyPoint p;
  p.sigma = w.sigma;
  p.lambda = w.lambda;
  p.s = w.s;
  return p;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(Components, AgreeWithBruteForce) {
  std::mt19937_64 rng(2024);
  for (int n = 0; n < 1000; ++n) {
    const auto r = oracle::random_point(rng);
    const auto H = h_components(r.F);
    const auto Hb = oracle::brute_h(r.F);
    for (int a = 0; a < 16; ++a) ASSERT_LE(rel(H[a], Hb[a]), 1e-12);
    const Quad4 Z = z_components(r.sigma, r.lambda);
    const auto Zb = oracle::brute_z(r.sigma, r.lambda);
    for (int l = 0; l < 4; ++l) ASSERT_LE(rel(Z[l], Zb[l]), 1e-12);
  }
}

TEST(Components, FspMatrixLayout) {
  std::mt19937_64 rng(5);
  const auto H = h_components(oracle::random_point(rng).F);
  const auto M = fsp_matrix(H);
  for (int r = 0; r < 4; ++r) EXPECT_EQ(M(r, 6), 1.0);
  for (int a = 0; a < 6; ++a) {
    const auto [i, j] = kPairs[a];
    const auto [k, l] = complement(i, j);
    EXPECT_EQ(M(i, a), H[i * 4 + j]);
    EXPECT_EQ(M(j, a), H[j * 4 + i]);
    EXPECT_EQ(M(k, a), 0.0);
    EXPECT_EQ(M(l, a), 0.0);
  }
  EXPECT_EQ(complement(1, 3), (std::pair<int, int>{0, 2}));
}

TEST(Membership, ProductSurfacePointPasses) {
  const VarietyPoint p = product_point(1.0, 2.0);
  for (double z : z_components(p.sigma, p.lambda)) EXPECT_NEAR(z, 0.0, 1e-14);
  const MembershipReport r = system_residuals(p);
  EXPECT_TRUE(r.pass);
  EXPECT_EQ(r.fsp_rank.rank, 1);
  EXPECT_LE(r.eq1_residual, 1e-14);
  EXPECT_LE(r.total, 1e-14);
}

TEST(Membership, BrokenWeylIdentityFails) {
  VarietyPoint p = product_point(1.0, 2.0);
  p.sigma[pair_index(0, 1)] += 0.01;
  const MembershipReport r = system_residuals(p);
  EXPECT_GE(r.eq1_residual, 0.005);
  EXPECT_FALSE(r.pass);
}

TEST(Membership, NonzeroTraceFails) {
  VarietyPoint p = product_point(1.0, 2.0);
  p.lambda[0] += 0.1;
  EXPECT_FALSE(system_residuals(p).pass);
}

TEST(Membership, ZSumVanishesOnLinearSubspace) {
  std::mt19937_64 rng(9);
  for (int n = 0; n < 200; ++n) {
    VarietyPoint p = from_raw(oracle::random_point(rng));
    detail::project_linear(p);
    EXPECT_LE(raw_residuals(p).eq1, 1e-14);
    const Quad4 Z = z_components(p.sigma, p.lambda);
    EXPECT_NEAR(Z[0] + Z[1] + Z[2] + Z[3], 0.0, 1e-12);
  }
}

TEST(Membership, InvariantUnderIndexPermutations) {
  std::mt19937_64 rng(17);
  for (int n = 0; n < 20; ++n) {
    VarietyPoint p = from_raw(oracle::random_point(rng));
    detail::project_linear(p);
    const MembershipReport base = system_residuals(p);
    std::array<int, 4> perm{0, 1, 2, 3};
    do {
      const MembershipReport r = system_residuals(p.permuted(perm));
      EXPECT_NEAR(r.eq1_residual, base.eq1_residual, 1e-12);
      EXPECT_NEAR(r.fsi_residual, base.fsi_residual, 1e-12);
      EXPECT_EQ(r.fsp_rank.rank, base.fsp_rank.rank);
      for (int a = 0; a < 4; ++a)
        EXPECT_NEAR(r.fsp_rank.singular_values[a], base.fsp_rank.singular_values[a], 1e-12);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
}

TEST(Membership, HomogeneityDegrees) {
  std::mt19937_64 rng(31);
  for (int n = 0; n < 20; ++n) {
    const VarietyPoint p = from_raw(oracle::random_point(rng));
    const RawResiduals r1 = raw_residuals(p);
    for (double t : {0.5, 2.0, 3.0}) {
      const RawResiduals rt = raw_residuals(p.scaled(t));
      EXPECT_LE(rel(rt.eq1, t * r1.eq1), 1e-12);
      // H is quadratic in F and Z bilinear in (sigma, lambda).
      EXPECT_LE(rel(rt.fsi, std::pow(t, 4) * r1.fsi), 1e-12);
      const MembershipReport a = system_residuals(p), b = system_residuals(p.scaled(t));
      EXPECT_NEAR(a.total, b.total, 1e-12 * std::max(1.0, a.total));
      EXPECT_EQ(a.fsp_rank.rank, b.fsp_rank.rank);
      EXPECT_EQ(a.pass, b.pass);
    }
  }
}

TEST(Membership, BracketFormMatchesPairing) {
  std::mt19937_64 rng(41);
  for (int n = 0; n < 200; ++n) {
    VarietyPoint p = from_raw(oracle::random_point(rng));
    detail::project_linear(p);
    const RawResiduals r = raw_residuals(p);
    EXPECT_LE(rel(r.bracket, r.fsi), 1e-12);
  }
}

TEST(Membership, HarvestedFramesSatisfySystem) {
  const MetricChart c =
      examples::make_kpc_warped(examples::solve_kpc_profile(1.0, 1.2, 0.5, 1.5, 6000), 1.0);
  const MembershipOptions opt{1e-3, 1e-3};
  for (const Vec4& x : {Vec4(0.3, 0.1, 1.7, 0.2), Vec4(-0.5, 0.3, 1.3, -0.2)}) {
    const VarietyPoint p = VarietyPoint::from_frame(extract_frame(c, x));
    EXPECT_GT(p.norm18(), 0.1);
    const MembershipReport r = system_residuals(p, opt);
    EXPECT_TRUE(r.pass) << r.eq1_residual << ' ' << r.fsi_residual << ' ' << r.fsp_rank.rank;
  }
}

TEST(Sampler, ModesBehaveAsDocumented) {
  const auto full = sample_variety(3, 30, SampleMode::full);
  ASSERT_FALSE(full.empty());
  for (const auto& sp : full) {
    EXPECT_TRUE(sp.report.pass);
    EXPECT_LE(sp.report.fsi_residual, 1e-6);
    EXPECT_LE(sp.report.fsp_rank.rank, 3);
    double fmax = 0.0;
    for (double v : sp.point.F) fmax = std::max(fmax, std::abs(v));
    EXPECT_GT(fmax, 1e-3);
  }
  const auto lin = sample_variety(3, 30, SampleMode::linear);
  ASSERT_EQ(lin.size(), 30u);
  int failing = 0;
  for (const auto& sp : lin) {
    EXPECT_LE(sp.report.eq1_residual, 1e-12);
    failing += !sp.report.pass;
  }
  EXPECT_GT(failing, 0);
  for (const auto& sp : sample_variety(3, 10, SampleMode::zero_f)) {
    for (double v : sp.point.F) EXPECT_EQ(v, 0.0);
    EXPECT_TRUE(sp.report.pass);
    EXPECT_LE(sp.report.fsp_rank.rank, 1);
  }
}

TEST(Sampler, DeterministicPerSeed) {
  const auto a = sample_variety(7, 12, SampleMode::full);
  const auto b = sample_variety(7, 12, SampleMode::full);
  const auto c = sample_variety(8, 12, SampleMode::full);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t n = 0; n < a.size(); ++n) {
    EXPECT_EQ(a[n].index, b[n].index);
    EXPECT_EQ(a[n].point.F, b[n].point.F);
    EXPECT_EQ(a[n].point.sigma, b[n].point.sigma);
  }
  EXPECT_NE(a.front().point.sigma, c.front().point.sigma);
  EXPECT_THROW(sample_variety(1, 0, SampleMode::full), InputError);
  EXPECT_EQ(parse_sample_mode("zero-f"), SampleMode::zero_f);
  EXPECT_THROW(parse_sample_mode("half"), InputError);
}

TEST(VarietyCsv, ColumnsAndValues) {
  const auto pts = sample_variety(5, 4, SampleMode::linear);
  std::ostringstream os;
  write_variety_csv(os, pts, "unit test");
  std::istringstream in(os.str());
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') rows.push_back(line);
  ASSERT_EQ(rows.size(), pts.size() + 1);
  EXPECT_EQ(std::count(rows[0].begin(), rows[0].end(), ','), 26);
  EXPECT_EQ(rows[0].rfind("index,F_12,F_13,F_14,F_21", 0), 0u);
  EXPECT_NE(rows[0].find(",sigma_34,lambda_1,"), std::string::npos);
  for (std::size_t n = 0; n < pts.size(); ++n) {
    std::stringstream ss(rows[n + 1]);
    std::string cell;
    std::vector<double> v;
    while (std::getline(ss, cell, ',')) v.push_back(std::stod(cell));
    ASSERT_EQ(v.size(), 27u);
    EXPECT_EQ(v[1], pts[n].point.Fji(0, 1));
    EXPECT_EQ(v[13], pts[n].point.sigma[0]);
    EXPECT_EQ(v[19], pts[n].point.lambda[0]);
  }
}

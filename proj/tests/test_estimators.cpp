#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "qslab/errors.hpp"
#include "qslab/estimators.hpp"
#include "qslab/proximity.hpp"

using namespace qslab;
using qslab::testing::line3;
using qslab::testing::rug100;
using qslab::testing::sphere2000;

namespace {

DiscreteSpace points_on_line(const std::vector<double>& xs, Eigen::VectorXd w) {
  const auto n = static_cast<Index>(xs.size());
  Eigen::MatrixXd d(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) d(i, j) = std::abs(xs[i] - xs[j]);
  }
  return gen_explicit(d, std::move(w));
}

Index farthest_from(const DiscreteSpace& s, Index x) {
  Index far = x;
  for (Index i = 0; i < s.size(); ++i) {
    if (s.distance(x, i) > s.distance(x, far)) far = i;
  }
  return far;
}

const std::vector<double> kLambdas{1.0, 1.5, 2.0, 3.0, 4.0};

}  // namespace

TEST(Scales, ClampedToResolutionBand) {
  const auto& s = sphere2000();
  const auto r = clamp_scales(s, {0.0, 10.0});
  EXPECT_EQ(r.lo, s.mesh_scale());
  EXPECT_EQ(r.hi, s.diameter() / 4.0);
}

// The module example quotes 4 +- 1; the max over samples carries lattice
// noise from balls of a handful of points, so the acceptance band is used.
TEST(Doubling, Sphere) {
  const auto e = estimate_doubling(sphere2000(), 400, {0.1, 0.5}, 1);
  EXPECT_GE(e.C_D, 3.0);
  EXPECT_LE(e.C_D, 6.0);
  EXPECT_GT(e.growth_alpha, 1.0);
  EXPECT_GE(e.growth_C, 1.0);
  EXPECT_EQ(e.skipped, 0);
}

TEST(Doubling, Rug) {
  const auto e = estimate_doubling(rug100(), 300, {0.1, 0.2}, 1);
  EXPECT_NEAR(e.C_D, 8.0, 3.0);
}

TEST(Doubling, SkipsEmptyBalls) {
  std::vector<double> xs;
  for (int i = 0; i < 20; ++i) xs.push_back(i);
  // Balls of radius < 2 around 6, 7, 8 see only massless points.
  Eigen::VectorXd w = Eigen::VectorXd::Ones(20);
  w.segment(5, 5).setZero();
  const auto e = estimate_doubling(points_on_line(xs, w), 400, {1.0, 2.0}, 3);
  EXPECT_GT(e.skipped, 0);
  EXPECT_EQ(e.samples + e.skipped, 400);

  Eigen::VectorXd single = Eigen::VectorXd::Zero(20);
  single(0) = 1.0;
  EXPECT_THROW(estimate_doubling(points_on_line(xs, single), 100, {1.0, 2.0}, 3), ComputationError);
}

TEST(Ahlfors, Sphere) {
  const auto e = estimate_ahlfors(sphere2000(), 400, {0.1, 0.5}, 1);
  EXPECT_NEAR(e.s_fit, 2.0, 0.15);
  EXPECT_GE(e.A, 2.0);
  EXPECT_LE(e.A, 8.0);
}

TEST(Llc, SphereAndRug) {
  const auto a = check_llc(sphere2000(), kLambdas, 30, 1);
  ASSERT_TRUE(a.lambda.has_value());
  EXPECT_LE(*a.lambda, 2.0);
  const auto& rug = rug100();
  const auto b = check_llc(rug, kLambdas, 20, 1, 2.0 * connectivity_scale(rug));
  ASSERT_TRUE(b.lambda.has_value());
  EXPECT_LE(*b.lambda, 3.0);
}

// Two runs of unit-spaced points with a gap wider than the link.
TEST(Llc, TwoClustersFail) {
  std::vector<double> xs;
  for (int i = 0; i <= 10; ++i) xs.push_back(i);
  for (int i = 13; i <= 23; ++i) xs.push_back(i);
  const auto s = points_on_line(xs, Eigen::VectorXd::Ones(22));
  const auto r = check_llc(s, kLambdas, 200, 1);
  EXPECT_FALSE(r.lambda.has_value());
  EXPECT_THROW(check_llc(s, std::vector<double>{0.5}, 10, 1), InputError);
}

TEST(Wmdm, Sphere) {
  const auto b = estimate_wmdm_bounds(sphere2000(), 0.1, 2.0, 100, 0.4, 1);
  EXPECT_EQ(b.pairs, 100);
  EXPECT_LE(b.C_W_hat, 10.0);
  EXPECT_LE(b.C_S_hat, 10.0);
  EXPECT_GE(b.C_S_hat, 1.0);
  EXPECT_FALSE(b.vacuous_regime);
  EXPECT_TRUE(estimate_wmdm_bounds(sphere2000(), 0.1, 3.0, 5, 0.4, 1).vacuous_regime);
}

TEST(Wmdm, TwoPointIsExact) {
  const auto b = estimate_wmdm_bounds(qslab::testing::two_point(), 1.0, 2.0, 5, 1.0, 1);
  EXPECT_EQ(b.C_W_hat, 1.0);
  EXPECT_EQ(b.C_S_hat, 1.0);
}

TEST(Wmdm, Preconditions) {
  const auto& s = sphere2000();
  EXPECT_THROW(estimate_wmdm_bounds(s, 0.2, 2.0, 5, 0.4, 1), InputError);
  EXPECT_THROW(estimate_wmdm_bounds(s, 0.01, 2.0, 5, s.mesh_scale(), 1), InputError);
}

TEST(Stability, LineSchedule) {
  const auto r = delta_stability_check(line3(), 2.0, 0, 2, std::vector<double>{2.0, 1.0});
  ASSERT_EQ(r.entries.size(), 2u);
  EXPECT_NEAR(r.entries[0].chain_weight, std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(r.entries[0].ratio, 1.0, 1e-12);
  EXPECT_NEAR(r.entries[1].ratio, std::sqrt(3.0) / (2.0 * std::sqrt(2.0)), 1e-12);
  EXPECT_FALSE(r.stabilized);
}

TEST(Stability, SphereDimensionTwo) {
  const auto& s = sphere2000();
  const auto r = delta_stability_check(s, 2.0, 0, farthest_from(s, 0), std::vector<double>{0.4, 0.2, 0.1});
  EXPECT_TRUE(r.stabilized);
}

TEST(QsProfile, IdentityHasUnitConstant) {
  const auto& s = sphere2000();
  const auto p = qs_profile_of(s, 200, 0.1, 2.0, 4,
                               [&](Index a, Index b) -> std::optional<double> { return s.distance(a, b); });
  ASSERT_EQ(p.samples.size(), 200u);
  for (const auto& q : p.samples) EXPECT_NEAR(q.ratio, q.t, 1e-12 * q.t);
  EXPECT_EQ(p.C, 1.0);
}

TEST(QsProfile, EquilateralTriple) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Ones(3, 3) - Eigen::MatrixXd::Identity(3, 3);
  const auto s = gen_explicit(m, Eigen::VectorXd::Ones(3));
  const auto g = build_delta_graph(s, 1.0, 2.0);
  const auto w = estimate_wmdm_bounds(s, g, 3, 1.0, 1);
  const double c = std::max(w.C_W_hat, w.C_S_hat);
  const auto p = qs_profile_of(s, 5, 1.0, 2.0, 1, [&](Index a, Index b) -> std::optional<double> {
    return chain_distance(g, a, b).total_weight;
  });
  for (const auto& q : p.samples) {
    EXPECT_EQ(q.t, 1.0);
    EXPECT_GE(q.ratio, 1.0 / (c * c));
    EXPECT_LE(q.ratio, c * c);
  }
}

TEST(QsProfile, SphereEnvelope) {
  const auto p = qs_profile(sphere2000(), 2.0, 0.1, 300, 1);
  EXPECT_LE(p.C, 20.0);
  for (const auto& q : p.samples) EXPECT_LE(q.ratio, p.eta(q.t) * (1.0 + 1e-12));
}

TEST(Envelope, FitIsTight) {
  std::vector<QSSample> samples{{0, 1, 2, 4.0, 6.0}, {0, 1, 2, 0.25, 0.9}};
  const double c = fit_envelope_constant(samples, 2.0);
  EXPECT_NEAR(c, std::max(6.0 / 4.0, 0.9 / std::pow(0.25, 0.25)), 1e-12);
}

TEST(Blowup, DimensionTwoReproducesProfile) {
  const auto& s = sphere2000();
  const Index y = farthest_from(s, 0);
  const auto b = dimension_blowup_probe(s, 2.0, 0, y, 2, 0.4);
  const auto p = chain_profile(s, 0, y, std::vector<double>{0.4, 0.2, 0.1}, 2.0);
  ASSERT_EQ(b.entries.size(), p.entries.size());
  for (std::size_t k = 0; k < p.entries.size(); ++k) EXPECT_EQ(b.entries[k].chain_weight, p.entries[k].total_weight);
  EXPECT_EQ(b.verdict, BlowupVerdict::stable);
  EXPECT_THROW(dimension_blowup_probe(s, 2.5, 0, y, 2, 0.4), InputError);
}

TEST(Blowup, FlagsBelowMesh) {
  const auto& s = sphere2000();
  const auto b = dimension_blowup_probe(s, 2.0, 0, farthest_from(s, 0), 4, 0.4);
  EXPECT_TRUE(b.below_mesh || b.truncated);
}

TEST(RugProbe, Distortion) {
  const auto rows = rug_qs_failure_probe(rug100(), std::vector<double>{0.1, 0.01, 0.9});
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_NEAR(rows[0].t, 1.0, 1e-9);
  EXPECT_NEAR(rows[0].distortion, 10.0, 1e-6);
  EXPECT_NEAR(rows[1].t, 1.0, 1e-9);
  EXPECT_NEAR(rows[1].distortion, 100.0, 1e-6);
  EXPECT_TRUE(rows[2].skipped);
  EXPECT_THROW(rug_qs_failure_probe(sphere2000(), std::vector<double>{0.1}), InputError);
}

TEST(Constants, SphereReport) {
  ConstantsConfig cfg;
  cfg.n_samples = 100;
  cfg.n_pairs = 20;
  cfg.seed = 3;
  const auto r = estimate_constants(sphere2000(), cfg);
  EXPECT_GT(r.doubling.C_D, 1.0);
  EXPECT_NEAR(r.ahlfors.s_fit, 2.0, 0.3);
  EXPECT_TRUE(r.llc.lambda.has_value());
  EXPECT_EQ(r.wmdm.pairs, 20);
  EXPECT_FALSE(r.zero_weights);
  EXPECT_EQ(r.config.min_separation, std::max(0.4, 4.0 * sphere2000().mesh_scale()));
}

TEST(Determinism, SameSeedSameEstimates) {
  const auto& s = sphere2000();
  const auto a = estimate_doubling(s, 100, {0.1, 0.5}, 8);
  const auto b = estimate_doubling(s, 100, {0.1, 0.5}, 8);
  EXPECT_EQ(a.C_D, b.C_D);
  EXPECT_EQ(a.growth_C, b.growth_C);
  const auto c = qs_profile(s, 2.0, 0.1, 50, 8);
  const auto d = qs_profile(s, 2.0, 0.1, 50, 8);
  EXPECT_EQ(c.C, d.C);
  ASSERT_EQ(c.samples.size(), d.samples.size());
  for (std::size_t k = 0; k < c.samples.size(); ++k) EXPECT_EQ(c.samples[k].ratio, d.samples[k].ratio);
}

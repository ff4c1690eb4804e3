#include <gtest/gtest.h>

#include <cmath>

#include "fixtures.hpp"
#include "oracle.hpp"
#include "qslab/chain_metric.hpp"
#include "qslab/errors.hpp"
#include "qslab/random.hpp"

using namespace qslab;
using qslab::testing::line3;
using qslab::testing::sphere2000;

TEST(DeltaGraph, LineEdges) {
  const auto s = line3();
  const auto g1 = build_delta_graph(s, 1.0, 2.0);
  EXPECT_EQ(g1.edge_count(), 2u);
  ASSERT_NE(g1.find_edge(0, 1), nullptr);
  EXPECT_EQ(g1.find_edge(0, 2), nullptr);
  EXPECT_NEAR(g1.find_edge(0, 1)->weight, std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(g1.find_edge(1, 2)->weight, std::sqrt(2.0), 1e-15);
  const auto g2 = build_delta_graph(s, 2.0, 2.0);
  EXPECT_EQ(g2.edge_count(), 3u);
  EXPECT_NEAR(g2.find_edge(2, 0)->weight, std::sqrt(3.0), 1e-15);
  EXPECT_EQ(g2.find_edge(0, 2)->measure, 3.0);
}

TEST(DeltaGraph, BelowMinimumDistanceIsEmpty) {
  const auto s = line3();
  const auto g = build_delta_graph(s, 0.5, 2.0);
  EXPECT_EQ(g.edge_count(), 0u);
  EXPECT_TRUE(g.below_mesh_scale);
  EXPECT_FALSE(chain_distance(g, 0, 1).reachable);
  EXPECT_FALSE(chain_distance(g, 0, 2).reachable);
  EXPECT_TRUE(std::isinf(chain_distance(g, 0, 2).total_weight));
  EXPECT_THROW(build_delta_graph(s, 0.0, 2.0), InputError);
  EXPECT_THROW(build_delta_graph(s, 1.0, 0.0), InputError);
}

TEST(ChainDistance, LineValues) {
  const auto s = line3();
  const auto r1 = chain_distance(build_delta_graph(s, 1.0, 2.0), 0, 2);
  EXPECT_NEAR(r1.total_weight, 2.0 * std::sqrt(2.0), 1e-12);
  EXPECT_EQ(r1.path, (std::vector<Index>{0, 1, 2}));
  const auto r2 = chain_distance(build_delta_graph(s, 2.0, 2.0), 0, 2);
  EXPECT_NEAR(r2.total_weight, std::sqrt(3.0), 1e-12);
  EXPECT_EQ(r2.path, (std::vector<Index>{0, 2}));
  const auto r0 = chain_distance(build_delta_graph(s, 2.0, 2.0), 1, 1);
  EXPECT_EQ(r0.total_weight, 0.0);
  EXPECT_EQ(r0.path, (std::vector<Index>{1}));
}

TEST(ChainDistance, TwoPointIsExactlyOne) {
  const auto s = qslab::testing::two_point();
  EXPECT_EQ(chain_distance(build_delta_graph(s, 1.0, 2.0), 0, 1).total_weight, 1.0);
}

TEST(ChainDistance, MatchesExhaustiveSearch) {
  Stream rng(2024);
  for (int trial = 0; trial < 60; ++trial) {
    const Index n = 3 + static_cast<Index>(rng.below(6));
    const Eigen::MatrixXd d = qslab::testing::random_metric(n, rng);
    Eigen::VectorXd w(n);
    for (Index i = 0; i < n; ++i) w(i) = rng.uniform(0.0, 2.0);
    const auto space = gen_explicit(d, w);
    const double delta = rng.uniform(0.3, 2.0);
    const double s = rng.uniform(1.0, 3.0);
    const auto g = build_delta_graph(space, delta, s);
    qslab::testing::BruteForce brute(d, w, delta, s, g.tick);
    for (Index x = 0; x < n; ++x) {
      for (Index y = 0; y < n; ++y) {
        const auto want = brute.solve(x, y);
        const auto got = chain_distance(g, x, y);
        ASSERT_EQ(got.reachable, !want.path.empty());
        if (!got.reachable) continue;
        EXPECT_EQ(got.total_weight, g.to_weight(want.ticks));
        EXPECT_EQ(got.path, want.path);
      }
    }
  }
}

TEST(ChainDistance, ReportedWeightIsPathWeight) {
  const auto& s = sphere2000();
  const auto g = build_delta_graph(s, 0.12, 2.0);
  const auto r = chain_distance(g, 0, 1234);
  ASSERT_TRUE(r.reachable);
  EXPECT_NEAR(chain_weight(s, r.path, 2.0), r.total_weight, 1e-9 * r.total_weight);
  for (std::size_t k = 1; k < r.path.size(); ++k) EXPECT_LE(s.distance(r.path[k - 1], r.path[k]), 0.12);
}

TEST(ChainDistance, AgreesWithSingleSource) {
  const auto& s = sphere2000();
  const auto g = build_delta_graph(s, 0.1, 2.0);
  const auto all = chain_distances_from(g, 17);
  for (Index y : {0, 17, 400, 1999}) {
    ASSERT_TRUE(all[y].has_value());
    EXPECT_EQ(*all[y], chain_distance(g, 17, y).total_weight);
  }
}

TEST(ChainDistance, WithinRestriction) {
  const auto s = line3();
  const auto g = build_delta_graph(s, 2.0, 2.0);
  std::vector<char> none(3, 0);
  EXPECT_NEAR(chain_distance_within(g, 0, 2, none).total_weight, std::sqrt(3.0), 1e-12);
  const auto g1 = build_delta_graph(s, 1.0, 2.0);
  EXPECT_FALSE(chain_distance_within(g1, 0, 2, none).reachable);
}

TEST(Reweight, MatchesFreshBuild) {
  const auto& s = sphere2000();
  const auto g2 = build_delta_graph(s, 0.1, 2.0);
  const auto a = reweight(s, g2, 1.5);
  const auto b = build_delta_graph(s, 0.1, 1.5);
  EXPECT_EQ(a.tick, b.tick);
  EXPECT_EQ(chain_distance(a, 5, 900).total_weight, chain_distance(b, 5, 900).total_weight);
}

TEST(ChainProfile, LineSchedule) {
  const auto s = line3();
  const std::vector<double> schedule{2.0, 1.0};
  const auto p = chain_profile(s, 0, 2, schedule, 2.0);
  ASSERT_EQ(p.entries.size(), 2u);
  EXPECT_NEAR(p.entries[0].total_weight, std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(p.entries[1].total_weight, 2.0 * std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(p.q_estimate, 2.0 * std::sqrt(2.0), 1e-12);
  EXPECT_FALSE(p.truncated);
}

TEST(ChainProfile, TruncatesWhenUnreachable) {
  const auto s = line3();
  const std::vector<double> schedule{2.0, 1.0, 0.5, 0.25};
  const auto p = chain_profile(s, 0, 2, schedule, 2.0);
  EXPECT_TRUE(p.truncated);
  ASSERT_EQ(p.entries.size(), 3u);
  EXPECT_FALSE(p.entries.back().reachable);
  EXPECT_THROW(chain_profile(s, 0, 2, std::vector<double>{1.0, 2.0}, 2.0), InputError);
}

TEST(ChainProfile, SphereAntipodes) {
  const auto& s = sphere2000();
  Index far = 0;
  for (Index i = 1; i < s.size(); ++i) {
    if (s.distance(0, i) > s.distance(0, far)) far = i;
  }
  const auto p = chain_profile(s, 0, far, std::vector<double>{0.4, 0.2, 0.1}, 2.0);
  ASSERT_EQ(p.entries.size(), 3u);
  EXPECT_LE(p.entries[0].total_weight, p.entries[1].total_weight);
  EXPECT_LE(p.entries[1].total_weight, p.entries[2].total_weight);
  const double mu = std::sqrt(s.pair_ball_measure(0, far));
  EXPECT_GE(p.entries[2].total_weight, mu);
  EXPECT_LE(p.entries[2].total_weight, 10.0 * mu);
}

// Exact properties on the tick grid.
TEST(ChainMetricProperties, SphereQueries) {
  const auto& s = sphere2000();
  const auto g = build_delta_graph(s, 0.12, 2.0);
  const auto g_fine = build_delta_graph(s, 0.1, 2.0);
  Stream rng(99);
  for (int k = 0; k < 60; ++k) {
    const Index x = static_cast<Index>(rng.below(s.size()));
    const Index y = static_cast<Index>(rng.below(s.size()));
    const Index z = static_cast<Index>(rng.below(s.size()));
    const double xy = chain_distance(g, x, y).total_weight;
    EXPECT_EQ(xy, chain_distance(g, y, x).total_weight);
    EXPECT_EQ(chain_distance(g, x, x).total_weight, 0.0);
    EXPECT_LE(xy, chain_distance(g, x, z).total_weight + chain_distance(g, z, y).total_weight);
    EXPECT_LE(xy, chain_distance(g_fine, x, y).total_weight);
  }
}

// Scaling every weight by c scales q by c^(1/s).
TEST(ChainMetricProperties, MeasureScaling) {
  Stream rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 4 + static_cast<Index>(rng.below(5));
    const Eigen::MatrixXd d = qslab::testing::random_metric(n, rng);
    Eigen::VectorXd w(n);
    for (Index i = 0; i < n; ++i) w(i) = rng.uniform(0.5, 2.0);
    const double c = 8.0, s = 3.0;
    const auto a = build_delta_graph(gen_explicit(d, w), 1.5, s);
    const auto b = build_delta_graph(gen_explicit(d, c * w), 1.5, s);
    const auto ra = chain_distance(a, 0, n - 1);
    const auto rb = chain_distance(b, 0, n - 1);
    ASSERT_EQ(ra.reachable, rb.reachable);
    if (ra.reachable) EXPECT_NEAR(rb.total_weight, 2.0 * ra.total_weight, 1e-12 * rb.total_weight);
  }
}

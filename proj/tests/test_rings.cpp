#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "fixtures.hpp"
#include "qslab/errors.hpp"
#include "qslab/random.hpp"
#include "qslab/report.hpp"
#include "qslab/rings.hpp"

using namespace qslab;
using qslab::testing::sphere2000;

namespace {

const RingContext& ctx12() {
  static const RingContext c = make_ring_context(sphere2000(), 0.12);
  return c;
}

RingChain ring(Index center, double r, RingMultipliers m = {}, double eps_factor = 20.0) {
  RingParams p;
  p.center = center;
  p.r = r;
  p.delta = 0.12;
  p.epsilon = RingParams::epsilon_for(sphere2000(), eps_factor);
  p.multipliers = m;
  return cheapest_level_ring(ctx12(), p);
}

Index farthest_from(const DiscreteSpace& s, Index x) {
  Index far = x;
  for (Index i = 0; i < s.size(); ++i) {
    if (s.distance(x, i) > s.distance(x, far)) far = i;
  }
  return far;
}

Index point_at_distance(const DiscreteSpace& s, Index x, double lo, double hi) {
  for (Index i = 0; i < s.size(); ++i) {
    const double d = s.distance(x, i);
    if (d >= lo && d <= hi) return i;
  }
  return -1;
}

void expect_delta_chain(const DiscreteSpace& s, const std::vector<Index>& chain, double delta) {
  for (std::size_t k = 1; k < chain.size(); ++k) EXPECT_LE(s.distance(chain[k - 1], chain[k]), delta);
}

}  // namespace

TEST(Multipliers, Strict) {
  EXPECT_EQ(smallest_k(1.0), 1);
  EXPECT_EQ(smallest_k(1.5), 1);
  EXPECT_EQ(smallest_k(2.0), 2);
  const auto m = RingMultipliers::strict(1.5);
  EXPECT_EQ(m.inner, 4.0);
  EXPECT_EQ(m.outer, 32.0);
  EXPECT_EQ(m.guard, 128.0);
  EXPECT_THROW(RingMultipliers::strict(0.5), InputError);
}

TEST(Cover, SphereAnnulus) {
  const auto& s = sphere2000();
  const Annulus a{0, 0.4, 1.2};
  const double eps = RingParams::epsilon_for(s);
  const auto balls = measure_calibrated_cover(s, a, eps);
  EXPECT_GE(balls.size(), 30u);
  EXPECT_LE(balls.size(), 120u);
  for (std::size_t i = 0; i < balls.size(); ++i) {
    EXPECT_LE(balls[i].measure, eps * eps);
    EXPECT_LE(balls[i].inflated_radius, 2.0 * balls[i].radius);
    for (std::size_t j = i + 1; j < balls.size(); ++j) {
      EXPECT_GT(s.distance(balls[i].center, balls[j].center), balls[i].radius + balls[j].radius);
    }
  }
  for (Index p = 0; p < s.size(); ++p) {
    const double d = s.distance(0, p);
    if (d < a.r_lo || d > a.r_hi) continue;
    bool covered = false;
    for (const auto& b : balls) covered = covered || s.distance(b.center, p) < 5.0 * b.radius;
    EXPECT_TRUE(covered) << "annulus point " << p;
  }
}

TEST(Cover, SinglePointAnnulus) {
  const auto& s = sphere2000();
  const double d = s.nearest(0)[0].distance;
  EXPECT_THROW(measure_calibrated_cover(s, {0, d * 0.999, d * 1.001}, RingParams::epsilon_for(s)), InputError);
}

TEST(Cover, AtomBlocksCalibration) {
  Eigen::MatrixXd d(6, 6);
  for (Index i = 0; i < 6; ++i) {
    for (Index j = 0; j < 6; ++j) d(i, j) = std::abs(static_cast<double>(i - j));
  }
  Eigen::VectorXd w = Eigen::VectorXd::Ones(6);
  w(3) = 100.0;
  const auto s = gen_explicit(d, w);
  try {
    measure_calibrated_cover(s, {0, 2.0, 4.0}, 3.0);
    FAIL() << "expected a computation error";
  } catch (const ComputationError& e) {
    EXPECT_NE(std::string(e.what()).find('3'), std::string::npos);
  }
}

TEST(Ring, SphereWeightAndCertificate) {
  const auto& s = sphere2000();
  for (Index c : {0, 333, 1024}) {
    const auto r = ring(c, 0.15);
    EXPECT_TRUE(r.certificate.verified);
    EXPECT_TRUE(verify_certificate(ctx12().mesh, r.certificate));
    EXPECT_LE(r.total_weight, 50.0 * std::sqrt(s.ball_measure(c, 0.15)));
    EXPECT_GE(r.depth, 1);
    EXPECT_GE(static_cast<double>(r.depth), std::sqrt(static_cast<double>(r.cover_size)) / 20.0);
    ASSERT_FALSE(r.chain.empty());
    expect_delta_chain(s, r.chain, 0.12);
    EXPECT_NEAR(chain_weight(s, r.chain, 2.0), r.total_weight, 1e-9 * r.total_weight);
  }
}

// The chosen level is the argmin, so it is at most the mean.
TEST(Ring, AveragingBound) {
  for (Index c : {5, 777}) {
    const auto r = ring(c, 0.15);
    ASSERT_EQ(static_cast<int>(r.level_weights.size()), r.depth);
    const double chosen = r.level_weights[static_cast<std::size_t>(r.level - 1)];
    const double sum = std::accumulate(r.level_weights.begin(), r.level_weights.end(), 0.0);
    EXPECT_LE(chosen * r.depth, sum);
    for (double w : r.level_weights) EXPECT_LE(chosen, w);
  }
}

TEST(Ring, TamperedCertificateFails) {
  auto r = ring(10, 0.15);
  r.certificate.removed_vertex_set.clear();
  EXPECT_FALSE(verify_certificate(ctx12().mesh, r.certificate));
}

TEST(Ring, Preconditions) {
  const auto& s = sphere2000();
  EXPECT_THROW(ring(0, 0.5 * s.mesh_scale()), InputError);
  EXPECT_THROW(ring(0, 0.3), InputError);  // guard radius 2.4 > diameter
  RingParams p;
  p.center = 0;
  p.r = 0.15;
  p.delta = 0.1;
  p.epsilon = RingParams::epsilon_for(s);
  EXPECT_THROW(cheapest_level_ring(ctx12(), p), InputError);
}

TEST(Nesting, Concentric) {
  const RingMultipliers m{1.5, 3.0, 4.0};
  const auto a = ring(0, 0.1, m, 5.0);
  const auto b = ring(0, 0.4, m, 5.0);
  EXPECT_EQ(nesting_relation(sphere2000(), a, b), Nesting::a_inside_b);
  EXPECT_EQ(nesting_relation(ctx12().mesh, b, a), Nesting::b_inside_a);
  const auto maximal = maximal_rings(ctx12().mesh, {a, b});
  EXPECT_FALSE(maximal[0]);
  EXPECT_TRUE(maximal[1]);
}

TEST(Nesting, Antipodal) {
  const auto& s = sphere2000();
  const auto a = ring(0, 0.1);
  const auto b = ring(farthest_from(s, 0), 0.1);
  EXPECT_EQ(nesting_relation(ctx12().mesh, a, b), Nesting::exterior_disjoint);
  EXPECT_EQ(nesting_relation(ctx12().mesh, b, a), Nesting::exterior_disjoint);
}

TEST(Nesting, OverlappingAnnuli) {
  const auto& s = sphere2000();
  const Index j = point_at_distance(s, 0, 0.43, 0.47);
  ASSERT_GE(j, 0);
  const auto a = ring(0, 0.15);
  const auto b = ring(j, 0.15);
  EXPECT_EQ(nesting_relation(ctx12().mesh, a, b), Nesting::intersecting);
}

// Swapping arguments swaps the two inside cases and keeps the others.
TEST(Nesting, SymmetricUnderSwap) {
  const auto& s = sphere2000();
  Stream rng(17);
  std::vector<RingChain> rings;
  while (rings.size() < 6) {
    const Index c = static_cast<Index>(rng.below(s.size()));
    try {
      rings.push_back(ring(c, rng.uniform(0.1, 0.2)));
    } catch (const ComputationError&) {
    }
  }
  const auto swap = [](Nesting n) {
    if (n == Nesting::a_inside_b) return Nesting::b_inside_a;
    if (n == Nesting::b_inside_a) return Nesting::a_inside_b;
    return n;
  };
  for (std::size_t i = 0; i < rings.size(); ++i) {
    for (std::size_t j = 0; j < rings.size(); ++j) {
      if (i == j) continue;
      EXPECT_EQ(nesting_relation(ctx12().mesh, rings[i], rings[j]),
                swap(nesting_relation(ctx12().mesh, rings[j], rings[i])));
    }
  }
}

// At least L balls are needed, each holding at most 1/L of the ball.
TEST(RingCover, SphereBall) {
  const auto& s = sphere2000();
  RingCoverParams p;
  p.L = 32;
  p.delta = 0.12;
  const auto c = ring_cover_of_ball(ctx12(), 0, 0.6, p);
  EXPECT_GE(c.balls.size(), 32u);
  EXPECT_LE(c.balls.size(), 128u);
  ASSERT_EQ(c.rings.size(), c.balls.size());
  for (std::size_t i = 0; i < c.balls.size(); ++i) {
    EXPECT_LE(c.balls[i].measure, c.ball_measure / p.L);
    EXPECT_TRUE(c.rings[i].certificate.verified);
    EXPECT_LE(c.rings[i].total_weight, 50.0 * std::sqrt(c.balls[i].measure));
  }
  EXPECT_TRUE(c.union_connected);
  EXPECT_FALSE(c.union_vertices.empty());
  for (const auto& b : c.balls) EXPECT_LT(s.distance(0, b.center), 0.6);
}

TEST(RingCover, HugeLFails) {
  RingCoverParams p;
  p.L = 1e6;
  p.delta = 0.12;
  EXPECT_THROW(ring_cover_of_ball(ctx12(), 0, 0.6, p), ComputationError);
}

TEST(Connector, BaseCase) {
  const auto& s = sphere2000();
  const Index y = s.nearest(0)[0].id;
  ConnectorParams p;
  p.delta = 0.1;
  const auto t = connect_via_rings(s, 0, y, p);
  EXPECT_TRUE(t.levels.empty());
  EXPECT_EQ(t.chain, (std::vector<Index>{0, y}));
  EXPECT_NEAR(t.total_weight, std::sqrt(s.pair_ball_measure(0, y)), 1e-12);
}

TEST(Connector, TooClose) {
  const auto& s = sphere2000();
  const Index y = point_at_distance(s, 0, 0.2, 0.3);
  ASSERT_GE(y, 0);
  EXPECT_THROW(connect_via_rings(s, 0, y, ConnectorParams{}), InputError);
}

TEST(Connector, SpherePair) {
  const auto& s = sphere2000();
  const Index y = point_at_distance(s, 0, 0.65, 0.8);
  ASSERT_GE(y, 0);
  ConnectorParams p;
  p.delta = 0.1;
  const auto t = connect_via_rings(s, 0, y, p);
  ASSERT_FALSE(t.levels.empty());
  EXPECT_LE(t.tau, 0.9);
  for (const auto& l : t.levels) EXPECT_LT(l.decay, 1.0);
  ASSERT_GE(t.chain.size(), 2u);
  EXPECT_EQ(t.chain.front(), 0);
  EXPECT_EQ(t.chain.back(), y);
  expect_delta_chain(s, t.chain, 0.1);
  const auto g = build_delta_graph(s, 0.1, 2.0);
  EXPECT_GE(t.total_weight, chain_distance(g, 0, y).total_weight);
  EXPECT_LE(t.total_weight, 100.0 * std::sqrt(s.pair_ball_measure(0, y)));
  EXPECT_NEAR(chain_weight(s, t.chain, 2.0), t.total_weight, 1e-12 * t.total_weight);
}

TEST(Determinism, RingReportsRepeat) {
  const auto a = to_json(ring(42, 0.15)).dump();
  const auto b = to_json(ring(42, 0.15)).dump();
  EXPECT_EQ(a, b);
}

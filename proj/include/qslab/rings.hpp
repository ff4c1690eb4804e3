#pragma once

#include <optional>
#include <string>
#include <vector>

#include "qslab/chain_metric.hpp"
#include "qslab/proximity.hpp"
#include "qslab/space.hpp"

namespace qslab {

/// Radius factors for the annulus construction: the cover lives in
/// [inner r, outer r], the outer witness beyond guard r.
struct RingMultipliers {
  double inner = 2.0;
  double outer = 6.0;
  double guard = 8.0;

  /// (2^(2k), 2^(5k), 2^(7k)) with k the smallest integer such that 2^k > lambda.
  static RingMultipliers strict(double lambda);
};

/// Smallest integer k with 2^k > lambda.
int smallest_k(double lambda);

struct RingParams {
  Index center = 0;
  double r = 0.0;
  double delta = 0.0;
  double epsilon = 0.0;  // cover balls target measure in [eps^2 / (2 C_D), eps^2]
  RingMultipliers multipliers;
  double doubling_constant = 4.0;  // C_D in the calibration window

  /// eps with eps^2 = factor * median point weight.
  static double epsilon_for(const DiscreteSpace& space, double factor = 20.0);
};

struct CoverBall {
  Index center;
  double radius;           // open ball B(center, radius), calibrated
  double measure;          // mu(B(center, radius))
  double inflated_radius;  // covers every annulus point assigned to this ball; <= 2 radius
  double inflated_measure; // mu of the closed inflated ball
};

struct Annulus {
  Index center;
  double r_lo, r_hi;  // points with r_lo <= d <= r_hi
};

/// Calibrated balls around every annulus point, thinned greedily to a
/// disjoint family (largest radius first). Each annulus point lies within
/// r_b + r_p <= 2 r_b of the kept ball b that blocked it, so the inflations
/// (and a fortiori the 5x inflations) cover the annulus.
std::vector<CoverBall> measure_calibrated_cover(const DiscreteSpace& space, const Annulus& annulus, double epsilon,
                                                double doubling_constant = 4.0);

struct SeparationCertificate {
  std::vector<Index> removed_vertex_set;  // ascending
  Index inner_witness = -1;
  Index outer_witness = -1;
  bool verified = false;
};

/// Recomputes the certificate condition on the mesh graph.
bool verify_certificate(const ProximityGraph& mesh, const SeparationCertificate& cert);

struct RingChain {
  std::vector<Index> chain;   // a delta-chain through the ring's ball centers
  double total_weight = 0.0;  // sum of mu(B_{x_j x_{j-1}})^(1/2)
  int level = 0;              // chosen level j (1-based)
  int depth = 0;              // n: level of the first ball reaching the outer shell
  Index cover_size = 0;       // m
  std::vector<double> level_weights;  // W_1..W_n: sum of mu(inflated ball)^(1/2) per level
  std::vector<CoverBall> balls;       // balls of the separating component
  SeparationCertificate certificate;
  Index center = 0;
  double r = 0.0;
};

/// Ring-building state reused across rings of one space: mesh graph and the
/// delta-graph at dimension 2.
struct RingContext {
  const DiscreteSpace* space;
  ProximityGraph mesh;
  DeltaGraph chain_graph;
};

RingContext make_ring_context(const DiscreteSpace& space, double delta);

/// Counting function u over the cover's ball graph (balls within link of
/// each other are adjacent), cheapest level set by sum of
/// mu(inflated ball)^(1/2), and a separating component of it, thinned to a
/// connected sub-collection that still separates.
RingChain cheapest_level_ring(const DiscreteSpace& space, const RingParams& params);
RingChain cheapest_level_ring(const RingContext& ctx, const RingParams& params);

enum class Nesting { intersecting, a_inside_b, b_inside_a, exterior_disjoint };
std::string to_string(Nesting n);

Nesting nesting_relation(const DiscreteSpace& space, const RingChain& a, const RingChain& b);
Nesting nesting_relation(const ProximityGraph& mesh, const RingChain& a, const RingChain& b);

/// maximal[i] iff ring i lies inside no other ring.
std::vector<char> maximal_rings(const ProximityGraph& mesh, const std::vector<RingChain>& rings);

struct RingCover {
  Index center = 0;
  double radius = 0.0;
  double ball_measure = 0.0;
  double L = 0.0;
  std::vector<CoverBall> balls;   // radius: largest open ball with measure <= mu(B) / L
  std::vector<RingChain> rings;   // one per ball
  std::vector<char> maximal;
  std::vector<Index> union_vertices;  // union of maximal removed sets, ascending
  bool union_connected = false;       // in the mesh graph
};

struct RingCoverParams {
  double L = 32.0;
  double delta = 0.1;
  double epsilon = 0.0;  // 0: 5 * median weight
  RingMultipliers multipliers;
  double doubling_constant = 4.0;
};

/// Greedy cover of the center's mesh-graph component inside B(center, R),
/// one ring per cover ball, maximal rings and their union.
RingCover ring_cover_of_ball(const DiscreteSpace& space, Index center, double R, const RingCoverParams& params);
RingCover ring_cover_of_ball(const RingContext& ctx, Index center, double R, const RingCoverParams& params);

struct ConnectorLevel {
  int level;
  Index endpoint;
  Index ball_center;
  double ball_radius;
  double ball_measure;
  Index ring_ball;       // center of the cover ball whose ring was chosen
  double ring_weight;
  double decay;          // mu(next level ball) / mu(this ball)
  bool ambiguous;        // several maximal rings, or none, held the endpoint
};

struct NestedConnectorTrace {
  Index x = 0, y = 0;
  double delta = 0.0;
  std::vector<ConnectorLevel> levels;  // ordered by (level, endpoint)
  std::vector<Index> chain;
  double total_weight = 0.0;
  double tau = 0.0;  // max observed decay
  std::vector<std::string> stop_reasons;  // per endpoint
};

struct ConnectorParams {
  double delta = 0.1;
  double L = 128.0;
  double epsilon = 0.0;  // 0: 5 * median weight
  RingMultipliers multipliers;
  double doubling_constant = 4.0;
};

/// Two-sided nested-ring recursion from x and y; the final chain is a
/// shortest delta-chain (dimension 2) through the recorded rings and the
/// innermost balls.
NestedConnectorTrace connect_via_rings(const DiscreteSpace& space, Index x, Index y, const ConnectorParams& params);

}  // namespace qslab

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qslab/space.hpp"

namespace qslab {

struct ChainEdge {
  Index to;
  double measure;       // mu(B_uv)
  double weight;        // measure^(1/s), as represented on the tick grid
  std::uint64_t ticks;  // weight / tick
};

/// Proximity graph at step bound delta: u ~ v iff 0 < d(u,v) <= delta, with
/// edge weight mu(B_uv)^(1/s).
///
/// Weights live on a fixed binary grid (`tick`) chosen from the total mass,
/// the point count and s, never from delta. Path sums are then exact integer
/// arithmetic, so symmetry, the triangle inequality, monotonicity in delta and
/// tie-breaking among equal-weight paths are exact. The grid spacing is about
/// 2^-60 times n * total_mass^(1/s).
class DeltaGraph {
 public:
  double delta = 0.0;
  double s = 2.0;
  double tick = 0.0;
  bool below_mesh_scale = false;
  std::vector<std::vector<ChainEdge>> adjacency;  // ascending neighbor ids

  Index size() const { return static_cast<Index>(adjacency.size()); }
  std::size_t edge_count() const;
  double to_weight(std::uint64_t ticks) const { return static_cast<double>(ticks) * tick; }
  const ChainEdge* find_edge(Index u, Index v) const;
};

DeltaGraph build_delta_graph(const DiscreteSpace& space, double delta, double s);

/// Same edges and measures, weights recomputed at dimension s.
DeltaGraph reweight(const DiscreteSpace& space, const DeltaGraph& graph, double s);

struct ChainResult {
  std::vector<Index> path;
  double total_weight = 0.0;  // +infinity when unreachable
  double delta = 0.0;
  double s = 0.0;
  bool reachable = false;
};

/// Minimum-weight delta-chain from x to y. Among equal-weight optima the
/// lexicographically smallest id sequence is returned.
ChainResult chain_distance(const DeltaGraph& graph, Index x, Index y);

/// Same, restricted to vertices with allowed[v] != 0 (x and y always allowed).
ChainResult chain_distance_within(const DeltaGraph& graph, Index x, Index y, const std::vector<char>& allowed);

/// q^delta(x, v) for every v; nullopt where unreachable.
std::vector<std::optional<double>> chain_distances_from(const DeltaGraph& graph, Index x);

struct ProfileEntry {
  double delta;
  double total_weight;
  bool reachable;
  bool below_mesh_scale;
};

struct ChainProfile {
  Index x = 0, y = 0;
  double s = 2.0;
  std::vector<ProfileEntry> entries;
  /// Max over the two smallest reachable deltas: the finite stand-in for
  /// the limsup as delta -> 0.
  double q_estimate = 0.0;
  bool truncated = false;
};

/// One chain_distance per delta of a strictly decreasing schedule. Stops at
/// the first unreachable delta (recorded, with truncated = true).
ChainProfile chain_profile(const DiscreteSpace& space, Index x, Index y, std::span<const double> schedule,
                           double s);

/// Same, reusing graphs already built for the schedule (one per delta).
ChainProfile chain_profile(std::span<const DeltaGraph> graphs, Index x, Index y);

/// Sum of mu(B_{x_j x_{j-1}})^(1/s) along an explicit chain.
double chain_weight(const DiscreteSpace& space, std::span<const Index> chain, double s);

}  // namespace qslab

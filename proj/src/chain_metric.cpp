#include "qslab/chain_metric.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <queue>
#include <utility>

#include "qslab/errors.hpp"
#include "qslab/parallel.hpp"

namespace qslab {

namespace {

constexpr std::uint64_t kUnreached = std::numeric_limits<std::uint64_t>::max();

double tick_for(const DiscreteSpace& space, double s) {
  const double bound = static_cast<double>(space.size()) * std::pow(space.total_mass(), 1.0 / s);
  return std::ldexp(1.0, static_cast<int>(std::ceil(std::log2(bound))) - 60);
}

std::uint64_t ticks_for(double measure, double s, double tick) {
  const double w = std::pow(measure, 1.0 / s);
  return std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(w / tick)));
}

// Dijkstra over tick costs. Stops once `stop_at` is settled (if >= 0).
std::vector<std::uint64_t> dijkstra(const DeltaGraph& g, Index source, const std::vector<char>* allowed,
                                    Index stop_at = -1) {
  std::vector<std::uint64_t> dist(static_cast<std::size_t>(g.size()), kUnreached);
  using Item = std::pair<std::uint64_t, Index>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[static_cast<std::size_t>(source)] = 0;
  heap.emplace(0, source);
  while (!heap.empty()) {
    const auto [d, u] = heap.top();
    heap.pop();
    if (d != dist[static_cast<std::size_t>(u)]) continue;
    if (u == stop_at) break;
    for (const ChainEdge& e : g.adjacency[static_cast<std::size_t>(u)]) {
      if (allowed && !(*allowed)[static_cast<std::size_t>(e.to)] && e.to != stop_at) continue;
      const std::uint64_t nd = d + e.ticks;
      if (nd < dist[static_cast<std::size_t>(e.to)]) {
        dist[static_cast<std::size_t>(e.to)] = nd;
        heap.emplace(nd, e.to);
      }
    }
  }
  return dist;
}

ChainResult shortest(const DeltaGraph& g, Index x, Index y, const std::vector<char>* allowed) {
  if (x < 0 || x >= g.size() || y < 0 || y >= g.size()) throw InputError("invalid point id");
  ChainResult out;
  out.delta = g.delta;
  out.s = g.s;
  if (x == y) {
    out.path = {x};
    out.total_weight = 0.0;
    out.reachable = true;
    return out;
  }
  std::vector<char> mask;
  if (allowed) {
    mask = *allowed;
    mask[static_cast<std::size_t>(x)] = 1;
    mask[static_cast<std::size_t>(y)] = 1;
  }
  const std::vector<char>* m = allowed ? &mask : nullptr;
  const auto to_y = dijkstra(g, y, m, x);
  const std::uint64_t total = to_y[static_cast<std::size_t>(x)];
  if (total == kUnreached) {
    out.total_weight = std::numeric_limits<double>::infinity();
    out.reachable = false;
    return out;
  }
  // Walk forward from x taking the smallest-id neighbor that stays on an
  // optimal path; this yields the lexicographically smallest optimum.
  std::uint64_t used = 0;
  Index u = x;
  out.path.push_back(x);
  while (u != y) {
    Index next = -1;
    for (const ChainEdge& e : g.adjacency[static_cast<std::size_t>(u)]) {
      if (m && !mask[static_cast<std::size_t>(e.to)]) continue;
      const std::uint64_t rest = to_y[static_cast<std::size_t>(e.to)];
      if (rest != kUnreached && used + e.ticks + rest == total) {
        next = e.to;
        used += e.ticks;
        break;
      }
    }
    if (next < 0) throw ComputationError("internal: shortest path reconstruction failed");
    out.path.push_back(next);
    u = next;
  }
  out.total_weight = g.to_weight(total);
  out.reachable = true;
  return out;
}

}  // namespace

std::size_t DeltaGraph::edge_count() const {
  std::size_t twice = 0;
  for (const auto& row : adjacency) twice += row.size();
  return twice / 2;
}

const ChainEdge* DeltaGraph::find_edge(Index u, Index v) const {
  const auto& row = adjacency.at(static_cast<std::size_t>(u));
  const auto it = std::lower_bound(row.begin(), row.end(), v, [](const ChainEdge& e, Index id) { return e.to < id; });
  return (it != row.end() && it->to == v) ? &*it : nullptr;
}

DeltaGraph build_delta_graph(const DiscreteSpace& space, double delta, double s) {
  if (!(delta > 0.0)) throw InputError("delta must be positive");
  if (!(s > 0.0)) throw InputError("dimension s must be positive");
  DeltaGraph g;
  g.delta = delta;
  g.s = s;
  g.tick = tick_for(space, s);
  g.below_mesh_scale = delta < space.mesh_scale();
  const auto n = static_cast<std::size_t>(space.size());

  // Each unordered pair is measured once, by its smaller endpoint.
  std::vector<std::vector<ChainEdge>> upper(n);
  parallel_for(n, [&](std::size_t ui) {
    const auto u = static_cast<Index>(ui);
    for (const Neighbor& nb : space.sorted_neighbors(u, delta)) {
      if (nb.id <= u || nb.distance <= 0.0) continue;
      const double measure = space.pair_ball_measure(u, nb.id);
      const auto ticks = ticks_for(measure, s, g.tick);
      upper[ui].push_back({nb.id, measure, static_cast<double>(ticks) * g.tick, ticks});
    }
  });
  g.adjacency.resize(n);
  for (std::size_t u = 0; u < n; ++u) {
    for (const ChainEdge& e : upper[u]) {
      g.adjacency[u].push_back(e);
      g.adjacency[static_cast<std::size_t>(e.to)].push_back({static_cast<Index>(u), e.measure, e.weight, e.ticks});
    }
  }
  for (auto& row : g.adjacency) {
    std::sort(row.begin(), row.end(), [](const ChainEdge& a, const ChainEdge& b) { return a.to < b.to; });
  }
  return g;
}

DeltaGraph reweight(const DiscreteSpace& space, const DeltaGraph& graph, double s) {
  if (!(s > 0.0)) throw InputError("dimension s must be positive");
  if (graph.size() != space.size()) throw InputError("graph does not belong to this space");
  DeltaGraph g = graph;
  g.s = s;
  g.tick = tick_for(space, s);
  for (auto& row : g.adjacency) {
    for (ChainEdge& e : row) {
      e.ticks = ticks_for(e.measure, s, g.tick);
      e.weight = static_cast<double>(e.ticks) * g.tick;
    }
  }
  return g;
}

ChainResult chain_distance(const DeltaGraph& graph, Index x, Index y) { return shortest(graph, x, y, nullptr); }

ChainResult chain_distance_within(const DeltaGraph& graph, Index x, Index y, const std::vector<char>& allowed) {
  if (static_cast<Index>(allowed.size()) != graph.size()) throw InputError("mask size does not match graph");
  return shortest(graph, x, y, &allowed);
}

std::vector<std::optional<double>> chain_distances_from(const DeltaGraph& graph, Index x) {
  if (x < 0 || x >= graph.size()) throw InputError("invalid point id");
  const auto dist = dijkstra(graph, x, nullptr);
  std::vector<std::optional<double>> out(dist.size());
  for (std::size_t v = 0; v < dist.size(); ++v) {
    if (dist[v] != kUnreached) out[v] = graph.to_weight(dist[v]);
  }
  return out;
}

ChainProfile chain_profile(std::span<const DeltaGraph> graphs, Index x, Index y) {
  ChainProfile p;
  p.x = x;
  p.y = y;
  if (!graphs.empty()) p.s = graphs.front().s;
  for (std::size_t k = 0; k < graphs.size(); ++k) {
    if (k > 0 && !(graphs[k].delta < graphs[k - 1].delta)) {
      throw InputError("delta schedule must be strictly decreasing");
    }
    const ChainResult r = chain_distance(graphs[k], x, y);
    p.entries.push_back({graphs[k].delta, r.total_weight, r.reachable, graphs[k].below_mesh_scale});
    if (!r.reachable) {
      p.truncated = true;
      break;
    }
  }
  std::vector<double> reached;
  for (const auto& e : p.entries) {
    if (e.reachable) reached.push_back(e.total_weight);
  }
  if (reached.size() >= 2) {
    p.q_estimate = std::max(reached[reached.size() - 1], reached[reached.size() - 2]);
  } else if (reached.size() == 1) {
    p.q_estimate = reached.front();
  } else {
    p.q_estimate = std::numeric_limits<double>::infinity();
  }
  return p;
}

ChainProfile chain_profile(const DiscreteSpace& space, Index x, Index y, std::span<const double> schedule,
                           double s) {
  space.check_id(x);
  space.check_id(y);
  if (schedule.empty()) throw InputError("delta schedule is empty");
  for (std::size_t k = 1; k < schedule.size(); ++k) {
    if (!(schedule[k] < schedule[k - 1])) throw InputError("delta schedule must be strictly decreasing");
  }
  std::vector<DeltaGraph> graphs;
  for (double delta : schedule) {
    graphs.push_back(build_delta_graph(space, delta, s));
    if (!chain_distance(graphs.back(), x, y).reachable) break;
  }
  return chain_profile(graphs, x, y);
}

double chain_weight(const DiscreteSpace& space, std::span<const Index> chain, double s) {
  double sum = 0.0;
  for (std::size_t k = 1; k < chain.size(); ++k) {
    if (chain[k] == chain[k - 1]) continue;
    sum += std::pow(space.pair_ball_measure(chain[k - 1], chain[k]), 1.0 / s);
  }
  return sum;
}

}  // namespace qslab

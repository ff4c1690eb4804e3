#include "qslab/proximity.hpp"

#include <algorithm>
#include <deque>
#include <limits>

namespace qslab {

ProximityGraph proximity_graph(const DiscreteSpace& space, double link) {
  ProximityGraph g;
  g.link = link;
  g.adjacency.resize(static_cast<std::size_t>(space.size()));
  for (Index i = 0; i < space.size(); ++i) {
    auto& row = g.adjacency[static_cast<std::size_t>(i)];
    row = space.closed_ball(i, link);
    row.erase(std::remove(row.begin(), row.end(), i), row.end());
  }
  return g;
}

ProximityGraph mesh_graph(const DiscreteSpace& space) { return proximity_graph(space, 2.0 * space.mesh_scale()); }

std::vector<int> component_labels(const ProximityGraph& graph, const std::vector<char>& allowed) {
  const auto n = static_cast<std::size_t>(graph.size());
  std::vector<int> label(n, -1);
  int next = 0;
  std::deque<Index> queue;
  for (std::size_t s = 0; s < n; ++s) {
    if (!allowed[s] || label[s] >= 0) continue;
    label[s] = next;
    queue.push_back(static_cast<Index>(s));
    while (!queue.empty()) {
      const Index u = queue.front();
      queue.pop_front();
      for (Index v : graph.adjacency[static_cast<std::size_t>(u)]) {
        const auto vi = static_cast<std::size_t>(v);
        if (allowed[vi] && label[vi] < 0) {
          label[vi] = next;
          queue.push_back(v);
        }
      }
    }
    ++next;
  }
  return label;
}

double connectivity_scale(const DiscreteSpace& space) {
  // Prim's algorithm on the complete graph.
  const Index n = space.size();
  std::vector<double> best(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<char> done(static_cast<std::size_t>(n), 0);
  best[0] = 0.0;
  double longest = 0.0;
  for (Index step = 0; step < n; ++step) {
    Index u = -1;
    for (Index v = 0; v < n; ++v) {
      if (!done[static_cast<std::size_t>(v)] && (u < 0 || best[static_cast<std::size_t>(v)] < best[static_cast<std::size_t>(u)])) u = v;
    }
    done[static_cast<std::size_t>(u)] = 1;
    longest = std::max(longest, best[static_cast<std::size_t>(u)]);
    for (Index v = 0; v < n; ++v) {
      if (!done[static_cast<std::size_t>(v)]) {
        best[static_cast<std::size_t>(v)] = std::min(best[static_cast<std::size_t>(v)], space.distance(u, v));
      }
    }
  }
  return longest;
}

}  // namespace qslab

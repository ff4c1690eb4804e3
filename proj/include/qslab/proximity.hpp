#pragma once

#include <vector>

#include "qslab/space.hpp"

namespace qslab {

/// Unweighted graph joining points at distance <= link. The discrete stand-in
/// for continua: connected vertex sets play the role of connected sets.
struct ProximityGraph {
  double link = 0.0;
  std::vector<std::vector<Index>> adjacency;  // ascending ids

  Index size() const { return static_cast<Index>(adjacency.size()); }
};

ProximityGraph proximity_graph(const DiscreteSpace& space, double link);

/// The default link used for connectivity checks: twice the mesh scale.
ProximityGraph mesh_graph(const DiscreteSpace& space);

/// Component labels of the subgraph induced on `allowed` (nonzero entries).
/// Excluded vertices get -1; labels are numbered by smallest member id.
std::vector<int> component_labels(const ProximityGraph& graph, const std::vector<char>& allowed);

/// Smallest link at which the whole space is connected (longest edge of a
/// minimum spanning tree).
double connectivity_scale(const DiscreteSpace& space);

}  // namespace qslab

#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "qslab/space.hpp"

namespace qslab {

/// Fibonacci lattice on the unit sphere, rotated by a seed-driven random
/// rotation; chordal metric; every weight 4*pi/n. Requires n >= 10.
DiscreteSpace gen_round_sphere(Index n, std::uint64_t seed);

/// Uniform n_x by n_y grid on [0, extent]^2 with the Rickman rug metric of
/// the given dimension; weight per point extent^2/(n_x*n_y).
DiscreteSpace gen_rickman_rug(Index n_x, Index n_y, double dimension, double extent = 1.0);

/// n uniform random points in [0, extent]^2 with metric |p - q|^epsilon,
/// uniform weights summing to extent^2. Requires epsilon in (0, 1).
DiscreteSpace gen_snowflake_plane(Index n, double epsilon, double extent, std::uint64_t seed);

/// Wraps a user matrix after checking the metric axioms (all triples for
/// n <= 256, 10^4 sampled triples otherwise). Zero weights are allowed.
DiscreteSpace gen_explicit(Eigen::MatrixXd matrix, Eigen::VectorXd weights);

struct AxiomCheck {
  bool ok = true;
  Index triples_checked = 0;
  Index i = -1, j = -1, k = -1;  // first violating triple: d(i,k) > d(i,j) + d(j,k)
};

/// Triangle inequality on `samples` random triples (or all triples when
/// samples <= 0), with relative slack 1e-12 for rounding.
AxiomCheck check_triangle_inequality(const DiscreteSpace& space, Index samples, std::uint64_t seed);

}  // namespace qslab

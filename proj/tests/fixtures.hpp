#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Core>

#include "qslab/generators.hpp"
#include "qslab/space.hpp"

namespace qslab::testing {

// Points 0, 1, 2 on a line, unit weights.
inline DiscreteSpace line3() {
  Eigen::MatrixXd m(3, 3);
  m << 0, 1, 2, 1, 0, 1, 2, 1, 0;
  return gen_explicit(m, Eigen::VectorXd::Ones(3));
}

inline DiscreteSpace two_point() {
  Eigen::MatrixXd m(2, 2);
  m << 0, 1, 1, 0;
  return gen_explicit(m, Eigen::VectorXd::Constant(2, 0.5));
}

// Shared fixtures are built once per process.
inline const DiscreteSpace& sphere2000() {
  static const DiscreteSpace s = gen_round_sphere(2000, 1);
  return s;
}

inline const DiscreteSpace& rug100() {
  static const DiscreteSpace s = gen_rickman_rug(100, 100, 3.0);
  return s;
}

// Shortest-path closure of random edge lengths on the complete graph.
template <class Rng>
Eigen::MatrixXd random_metric(Index n, Rng& rng) {
  Eigen::MatrixXd d(n, n);
  for (Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = rng.uniform(0.1, 3.0);
  }
  for (Index k = 0; k < n; ++k) {
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
    }
  }
  return d;
}

}  // namespace qslab::testing

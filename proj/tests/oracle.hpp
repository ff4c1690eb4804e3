#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include <Eigen/Core>

namespace qslab::testing {

// mu(B(i, d) U B(j, d)) straight from the matrix.
inline double pair_measure(const Eigen::MatrixXd& d, const Eigen::VectorXd& w, Index i, Index j) {
  const double r = d(i, j);
  double m = 0.0;
  for (Index p = 0; p < d.rows(); ++p) {
    if (d(i, p) < r || d(j, p) < r) m += w(p);
  }
  return m;
}

struct BrutePath {
  std::uint64_t ticks = std::numeric_limits<std::uint64_t>::max();
  std::vector<Index> path;
};

// Every simple path from x to y with steps in (0, delta], weights rounded to
// the tick grid; keeps the cheapest, lexicographically smallest on ties.
class BruteForce {
 public:
  BruteForce(const Eigen::MatrixXd& d, const Eigen::VectorXd& w, double delta, double s, double tick)
      : d_(d), n_(d.rows()), delta_(delta), w_(n_, std::vector<std::uint64_t>(static_cast<std::size_t>(n_), 0)) {
    for (Index i = 0; i < n_; ++i) {
      for (Index j = 0; j < n_; ++j) {
        if (i == j) continue;
        const double x = std::pow(pair_measure(d, w, i, j), 1.0 / s) / tick;
        w_[i][j] = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(std::llround(x)));
      }
    }
  }

  BrutePath solve(Index x, Index y) {
    best_ = {};
    if (x == y) {
      best_.ticks = 0;
      best_.path = {x};
      return best_;
    }
    target_ = y;
    std::vector<Index> path{x};
    std::vector<char> used(static_cast<std::size_t>(n_), 0);
    used[x] = 1;
    walk(path, used, 0);
    return best_;
  }

 private:
  void walk(std::vector<Index>& path, std::vector<char>& used, std::uint64_t cost) {
    const Index u = path.back();
    if (u == target_) {
      if (cost < best_.ticks || (cost == best_.ticks && path < best_.path)) best_ = {cost, path};
      return;
    }
    for (Index v = 0; v < n_; ++v) {
      if (used[v] || d_(u, v) <= 0.0 || d_(u, v) > delta_) continue;
      used[v] = 1;
      path.push_back(v);
      walk(path, used, cost + w_[u][v]);
      path.pop_back();
      used[v] = 0;
    }
  }

  const Eigen::MatrixXd& d_;
  Index n_;
  double delta_;
  std::vector<std::vector<std::uint64_t>> w_;
  Index target_ = 0;
  BrutePath best_;
};

}  // namespace qslab::testing

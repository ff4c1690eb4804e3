#pragma once

#include <memory>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "qslab/metric.hpp"

namespace qslab {

struct Neighbor {
  double distance;
  Index id;
};

namespace detail {
class BallIndex;
}

/// A finite weighted point cloud with a metric: the discrete model of a
/// metric measure space. Immutable after construction; every query is const
/// and may be issued concurrently.
///
/// Balls are open (d < r) unless the function name says otherwise.
class DiscreteSpace {
 public:
  /// `coords` holds one point per row (may have zero columns for explicit
  /// matrices). Throws InputError on shape mismatch, negative weights or
  /// zero total mass, and ValidationError on malformed explicit matrices.
  DiscreteSpace(Eigen::MatrixXd coords, Eigen::VectorXd weights, MetricSpec metric);

  Index size() const { return weights_.size(); }
  Index dimension() const { return coords_.cols(); }
  const Eigen::MatrixXd& coords() const { return coords_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  const MetricSpec& metric() const { return metric_; }
  double weight(Index i) const;

  double total_mass() const { return total_mass_; }
  double median_weight() const { return median_weight_; }
  bool has_zero_weights() const { return has_zero_weights_; }

  /// Exact for n <= 4096; otherwise a two-sweep farthest-point value that is
  /// at least half the true diameter.
  double diameter() const { return diameter_; }
  bool diameter_is_exact() const { return diameter_exact_; }

  /// Largest nearest-neighbor distance. Resolution floor for every
  /// scale-dependent estimate.
  double mesh_scale() const { return mesh_scale_; }

  double distance(Index i, Index j) const;

  double ball_measure(Index center, double r) const;
  double closed_ball_measure(Index center, double r) const;

  /// mu(B(i, scale*d) U B(j, scale*d)) with d = d(i, j), each point counted once.
  double pair_ball_measure(Index i, Index j, double scale = 1.0) const;

  /// Ids in the open ball, ascending.
  std::vector<Index> ball(Index center, double r) const;
  /// Ids with d <= r, ascending.
  std::vector<Index> closed_ball(Index center, double r) const;
  /// Points with d <= r (center included), sorted by (distance, id).
  std::vector<Neighbor> sorted_neighbors(Index center, double r) const;

  /// Up to 32 nearest other points, sorted by (distance, id).
  std::span<const Neighbor> nearest(Index i) const;

  /// True when B(center, r) stays clear of the boundary of a planar patch:
  /// the center keeps `margin_fraction` of the patch extent away from every
  /// side and the coordinate box enclosing the ball lies inside the patch.
  /// Always true for spheres and explicit matrices.
  bool ball_fits(Index center, double r, double margin_fraction = 0.1) const;

  void check_id(Index i) const;

 private:
  Eigen::MatrixXd coords_;
  Eigen::VectorXd weights_;
  MetricSpec metric_;
  double total_mass_ = 0.0;
  double median_weight_ = 0.0;
  bool has_zero_weights_ = false;
  double diameter_ = 0.0;
  bool diameter_exact_ = true;
  double mesh_scale_ = 0.0;
  Eigen::RowVectorXd box_lo_, box_hi_;
  std::shared_ptr<const detail::BallIndex> index_;
};

}  // namespace qslab

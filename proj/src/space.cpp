#include "qslab/space.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "qslab/errors.hpp"

namespace qslab {

namespace detail {

namespace {

constexpr Index kDenseLimit = 4096;
constexpr Index kLeafSize = 16;

bool neighbor_less(const Neighbor& a, const Neighbor& b) {
  return a.distance < b.distance || (a.distance == b.distance && a.id < b.id);
}

}  // namespace

// Range-query structure behind DiscreteSpace. Small spaces and explicit
// matrices keep the full distance matrix; large coordinate spaces use a k-d
// tree over coordinates with metric-aware query boxes.
class BallIndex {
 public:
  BallIndex(const Eigen::MatrixXd& coords, const MetricSpec& metric) : coords_(coords) {
    const Index n = coords.rows();
    if (const auto* m = std::get_if<metric::ExplicitMatrix>(&metric)) {
      dense_ = m->matrix;
      return;
    }
    metric_ = metric;
    if (n <= kDenseLimit) {
      dense_.resize(n, n);
      for (Index j = 0; j < n; ++j) {
        dense_(j, j) = 0.0;
        for (Index i = j + 1; i < n; ++i) {
          const double d = formula_distance(metric, coords.row(i), coords.row(j));
          dense_(i, j) = d;
          dense_(j, i) = d;
        }
      }
    } else {
      order_.resize(static_cast<std::size_t>(n));
      std::iota(order_.begin(), order_.end(), Index{0});
      build(0, n);
    }
  }

  bool is_dense() const { return dense_.size() > 0 || coords_.rows() == 0; }
  const Eigen::MatrixXd& dense() const { return dense_; }

  double distance(Index i, Index j) const {
    if (is_dense()) return dense_(i, j);
    if (i == j) return 0.0;
    return formula_distance(metric_, coords_.row(i), coords_.row(j));
  }

  // Calls visit(id, distance) for every point with distance <= r (closed).
  template <class Visit>
  void for_each_within(Index c, double r, Visit&& visit) const {
    if (is_dense()) {
      const auto col = dense_.col(c);
      for (Index p = 0; p < col.size(); ++p) {
        if (col(p) <= r) visit(p, col(p));
      }
      return;
    }
    const Eigen::RowVectorXd h = coordinate_half_widths(metric_, r, coords_.cols()).array() * (1.0 + 1e-9) + 1e-300;
    const Eigen::RowVectorXd lo = coords_.row(c) - h;
    const Eigen::RowVectorXd hi = coords_.row(c) + h;
    auto check = [&](Index p) {
      const double d = distance(c, p);
      if (d <= r) visit(p, d);
    };
    query(0, lo, hi, check);
  }

 private:
  struct Node {
    Index begin, end;
    Eigen::RowVectorXd lo, hi;
    int left = -1, right = -1;
  };

  int build(Index begin, Index end) {
    Node node{begin, end, {}, {}};
    node.lo = coords_.row(order_[begin]);
    node.hi = node.lo;
    for (Index k = begin + 1; k < end; ++k) {
      node.lo = node.lo.cwiseMin(coords_.row(order_[k]));
      node.hi = node.hi.cwiseMax(coords_.row(order_[k]));
    }
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(node);
    if (end - begin > kLeafSize) {
      Index axis = 0;
      (node.hi - node.lo).maxCoeff(&axis);
      const Index mid = begin + (end - begin) / 2;
      std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                       [&](Index a, Index b) {
                         return coords_(a, axis) < coords_(b, axis) ||
                                (coords_(a, axis) == coords_(b, axis) && a < b);
                       });
      const int l = build(begin, mid);
      const int r = build(mid, end);
      nodes_[id].left = l;
      nodes_[id].right = r;
    }
    return id;
  }

  template <class Visit>
  void query(int id, const Eigen::RowVectorXd& lo, const Eigen::RowVectorXd& hi, Visit& visit) const {
    const Node& node = nodes_[id];
    if ((node.hi.array() < lo.array()).any() || (node.lo.array() > hi.array()).any()) return;
    if (node.left < 0) {
      for (Index k = node.begin; k < node.end; ++k) {
        const Index p = order_[k];
        if ((coords_.row(p).array() >= lo.array()).all() && (coords_.row(p).array() <= hi.array()).all()) {
          visit(p);
        }
      }
      return;
    }
    query(node.left, lo, hi, visit);
    query(node.right, lo, hi, visit);
  }

  Eigen::MatrixXd coords_;
  MetricSpec metric_;
  Eigen::MatrixXd dense_;
  std::vector<Index> order_;
  std::vector<Node> nodes_;

 public:
  std::vector<Neighbor> nearest_;  // kNearestCount per point, row-major
  Index nearest_stride_ = 0;
};

}  // namespace detail

namespace {

constexpr Index kNearestCount = 32;

}  // namespace

DiscreteSpace::DiscreteSpace(Eigen::MatrixXd coords, Eigen::VectorXd weights, MetricSpec metric)
    : coords_(std::move(coords)), weights_(std::move(weights)), metric_(std::move(metric)) {
  check_parameters(metric_);
  const Index n = weights_.size();
  if (n < 2) throw InputError("a space needs at least two points");
  if (const auto* m = std::get_if<metric::ExplicitMatrix>(&metric_)) {
    if (m->matrix.rows() != n) throw InputError("distance matrix size does not match weight count");
    if (coords_.rows() != n) coords_.resize(n, 0);
  } else {
    if (coords_.rows() != n) throw InputError("coordinate rows do not match weight count");
    if (coords_.cols() == 0) throw InputError("formula metrics need coordinates");
    if (std::holds_alternative<metric::RickmanRug>(metric_) && coords_.cols() != 2) {
      throw InputError("Rickman rug points must be planar");
    }
    if (std::holds_alternative<metric::ChordalSphere>(metric_) && coords_.cols() != 3) {
      throw InputError("sphere points must have three coordinates");
    }
    if (!coords_.allFinite()) throw InputError("coordinates must be finite");
  }
  if (!weights_.allFinite() || (weights_.array() < 0.0).any()) {
    throw InputError("weights must be finite and nonnegative");
  }
  total_mass_ = weights_.sum();
  if (!(total_mass_ > 0.0)) throw InputError("total mass must be positive");
  has_zero_weights_ = (weights_.array() == 0.0).any();
  {
    std::vector<double> w(weights_.data(), weights_.data() + n);
    std::nth_element(w.begin(), w.begin() + n / 2, w.end());
    median_weight_ = w[static_cast<std::size_t>(n / 2)];
  }

  auto index = std::make_shared<detail::BallIndex>(coords_, metric_);

  // Diameter.
  if (index->is_dense()) {
    diameter_ = index->dense().maxCoeff();
    diameter_exact_ = true;
  } else {
    auto farthest = [&](Index from) {
      Index best = from;
      double best_d = 0.0;
      for (Index p = 0; p < n; ++p) {
        const double d = index->distance(from, p);
        if (d > best_d) {
          best_d = d;
          best = p;
        }
      }
      return std::pair{best, best_d};
    };
    const auto [a, da] = farthest(0);
    const auto [b, db] = farthest(a);
    (void)b;
    diameter_ = std::max(da, db);
    diameter_exact_ = false;
  }

  // Nearest-neighbor lists and mesh scale.
  const Index k = std::min(kNearestCount, n - 1);
  index->nearest_stride_ = k;
  index->nearest_.resize(static_cast<std::size_t>(n * k));
  std::vector<Neighbor> buf;
  for (Index i = 0; i < n; ++i) {
    buf.clear();
    if (index->is_dense()) {
      for (Index p = 0; p < n; ++p) {
        if (p != i) buf.push_back({index->dense()(p, i), p});
      }
    } else {
      double r = diameter_ * 1e-3;
      while (true) {
        buf.clear();
        index->for_each_within(i, r, [&](Index p, double d) {
          if (p != i) buf.push_back({d, p});
        });
        if (static_cast<Index>(buf.size()) >= k || r > 4.0 * diameter_) break;
        r *= 2.0;
      }
    }
    std::partial_sort(buf.begin(), buf.begin() + k, buf.end(), detail::neighbor_less);
    std::copy(buf.begin(), buf.begin() + k, index->nearest_.begin() + i * k);
    mesh_scale_ = std::max(mesh_scale_, buf.front().distance);
  }

  if (coords_.cols() > 0) {
    box_lo_ = coords_.colwise().minCoeff();
    box_hi_ = coords_.colwise().maxCoeff();
  }
  index_ = std::move(index);
}

void DiscreteSpace::check_id(Index i) const {
  if (i < 0 || i >= size()) throw InputError("invalid point id " + std::to_string(i));
}

double DiscreteSpace::weight(Index i) const {
  check_id(i);
  return weights_(i);
}

double DiscreteSpace::distance(Index i, Index j) const {
  check_id(i);
  check_id(j);
  return index_->distance(i, j);
}

double DiscreteSpace::ball_measure(Index center, double r) const {
  check_id(center);
  if (!(r > 0.0)) throw InputError("ball radius must be positive");
  if (index_->is_dense()) {
    return (index_->dense().col(center).array() < r).select(weights_.array(), 0.0).sum();
  }
  double sum = 0.0;
  index_->for_each_within(center, r, [&](Index p, double d) {
    if (d < r) sum += weights_(p);
  });
  return sum;
}

double DiscreteSpace::closed_ball_measure(Index center, double r) const {
  check_id(center);
  if (r < 0.0) throw InputError("ball radius must be nonnegative");
  if (index_->is_dense()) {
    return (index_->dense().col(center).array() <= r).select(weights_.array(), 0.0).sum();
  }
  double sum = 0.0;
  index_->for_each_within(center, r, [&](Index p, double) { sum += weights_(p); });
  return sum;
}

double DiscreteSpace::pair_ball_measure(Index i, Index j, double scale) const {
  check_id(i);
  check_id(j);
  if (i == j) throw InputError("pair ball needs two distinct points");
  if (!(scale > 0.0)) throw InputError("pair ball scale must be positive");
  const double t = scale * index_->distance(i, j);
  if (index_->is_dense()) {
    const auto& d = index_->dense();
    return (d.col(i).array().min(d.col(j).array()) < t).select(weights_.array(), 0.0).sum();
  }
  std::vector<Index> hits;
  index_->for_each_within(i, t, [&](Index p, double d) {
    if (d < t) hits.push_back(p);
  });
  index_->for_each_within(j, t, [&](Index p, double d) {
    if (d < t) hits.push_back(p);
  });
  std::sort(hits.begin(), hits.end());
  hits.erase(std::unique(hits.begin(), hits.end()), hits.end());
  double sum = 0.0;
  for (Index p : hits) sum += weights_(p);
  return sum;
}

std::vector<Index> DiscreteSpace::ball(Index center, double r) const {
  check_id(center);
  std::vector<Index> out;
  index_->for_each_within(center, r, [&](Index p, double d) {
    if (d < r) out.push_back(p);
  });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Index> DiscreteSpace::closed_ball(Index center, double r) const {
  check_id(center);
  std::vector<Index> out;
  index_->for_each_within(center, r, [&](Index p, double) { out.push_back(p); });
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<Neighbor> DiscreteSpace::sorted_neighbors(Index center, double r) const {
  check_id(center);
  std::vector<Neighbor> out;
  index_->for_each_within(center, r, [&](Index p, double d) { out.push_back({d, p}); });
  std::sort(out.begin(), out.end(), detail::neighbor_less);
  return out;
}

std::span<const Neighbor> DiscreteSpace::nearest(Index i) const {
  check_id(i);
  const Index k = index_->nearest_stride_;
  return {index_->nearest_.data() + i * k, static_cast<std::size_t>(k)};
}

bool DiscreteSpace::ball_fits(Index center, double r, double margin_fraction) const {
  check_id(center);
  if (is_explicit(metric_) || std::holds_alternative<metric::ChordalSphere>(metric_)) return true;
  const Eigen::RowVectorXd extent = box_hi_ - box_lo_;
  const Eigen::RowVectorXd half = coordinate_half_widths(metric_, r, dimension());
  const Eigen::RowVectorXd keep = (margin_fraction * extent).cwiseMax(half);
  const Eigen::RowVectorXd p = coords_.row(center);
  return ((p - box_lo_).array() >= keep.array()).all() && ((box_hi_ - p).array() >= keep.array()).all();
}

}  // namespace qslab

#pragma once

#include <string>
#include <variant>

#include <Eigen/Core>

namespace qslab {

using Index = Eigen::Index;

namespace metric {

struct Euclidean {};

// Euclidean distance of points on the unit sphere embedded in R^3.
struct ChordalSphere {};

// |p - q|^exponent, exponent in (0, 1].
struct Snowflake {
  double exponent = 1.0;
};

// (|dx|^2 + |dy|^{2/(dimension-1)})^{1/2} on R^2, dimension > 2.
struct RickmanRug {
  double dimension = 3.0;
};

// Dense symmetric matrix with zero diagonal; points are identified by row.
struct ExplicitMatrix {
  Eigen::MatrixXd matrix;
};

}  // namespace metric

using MetricSpec = std::variant<metric::Euclidean, metric::ChordalSphere, metric::Snowflake,
                                metric::RickmanRug, metric::ExplicitMatrix>;

/// Name used in space files ("Euclidean", "ChordalSphere", ...).
std::string variant_name(const MetricSpec& spec);

/// Throws InputError when parameters are out of range. Explicit matrices are
/// checked for shape, symmetry, zero diagonal and sign here; the triangle
/// inequality is checked by validate_metric_axioms.
void check_parameters(const MetricSpec& spec);

bool is_explicit(const MetricSpec& spec);

/// Distance between coordinate rows for the formula-based variants.
double formula_distance(const MetricSpec& spec, const Eigen::Ref<const Eigen::RowVectorXd>& a,
                        const Eigen::Ref<const Eigen::RowVectorXd>& b);

/// Per-axis half-widths of an axis-aligned coordinate box that contains every
/// point at metric distance < r from the box center.
Eigen::RowVectorXd coordinate_half_widths(const MetricSpec& spec, double r, Index dim);

}  // namespace qslab

#include "qslab/metric.hpp"

#include <cmath>

#include "qslab/errors.hpp"

namespace qslab {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
  using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

}  // namespace

std::string variant_name(const MetricSpec& spec) {
  return std::visit(Overloaded{
                        [](const metric::Euclidean&) { return std::string("Euclidean"); },
                        [](const metric::ChordalSphere&) { return std::string("ChordalSphere"); },
                        [](const metric::Snowflake&) { return std::string("Snowflake"); },
                        [](const metric::RickmanRug&) { return std::string("RickmanRug"); },
                        [](const metric::ExplicitMatrix&) { return std::string("ExplicitMatrix"); },
                    },
                    spec);
}

bool is_explicit(const MetricSpec& spec) {
  return std::holds_alternative<metric::ExplicitMatrix>(spec);
}

void check_parameters(const MetricSpec& spec) {
  std::visit(Overloaded{
                 [](const metric::Euclidean&) {},
                 [](const metric::ChordalSphere&) {},
                 [](const metric::Snowflake& m) {
                   if (!(m.exponent > 0.0 && m.exponent <= 1.0)) {
                     throw InputError("snowflake exponent must lie in (0, 1]");
                   }
                 },
                 [](const metric::RickmanRug& m) {
                   if (!(m.dimension > 2.0)) {
                     throw InputError("Rickman rug dimension must exceed 2");
                   }
                 },
                 [](const metric::ExplicitMatrix& m) {
                   const auto& d = m.matrix;
                   if (d.rows() != d.cols()) throw ValidationError("distance matrix is not square");
                   if (!d.allFinite()) throw ValidationError("distance matrix has non-finite entries");
                   for (Index i = 0; i < d.rows(); ++i) {
                     if (d(i, i) != 0.0) {
                       throw ValidationError("nonzero diagonal at " + std::to_string(i));
                     }
                     for (Index j = 0; j < i; ++j) {
                       if (d(i, j) != d(j, i)) {
                         throw ValidationError("asymmetric entry (" + std::to_string(i) + ", " +
                                               std::to_string(j) + ")");
                       }
                       if (d(i, j) <= 0.0) {
                         throw ValidationError("non-positive distance between distinct points (" +
                                               std::to_string(i) + ", " + std::to_string(j) + ")");
                       }
                     }
                   }
                 },
             },
             spec);
}

double formula_distance(const MetricSpec& spec, const Eigen::Ref<const Eigen::RowVectorXd>& a,
                        const Eigen::Ref<const Eigen::RowVectorXd>& b) {
  return std::visit(
      Overloaded{
          [&](const metric::Euclidean&) { return (a - b).norm(); },
          [&](const metric::ChordalSphere&) { return (a - b).norm(); },
          [&](const metric::Snowflake& m) { return std::pow((a - b).norm(), m.exponent); },
          [&](const metric::RickmanRug& m) {
            const double dx = a(0) - b(0);
            const double dy = std::abs(a(1) - b(1));
            return std::sqrt(dx * dx + std::pow(dy, 2.0 / (m.dimension - 1.0)));
          },
          [&](const metric::ExplicitMatrix&) -> double {
            throw InputError("explicit metric has no coordinate formula");
          },
      },
      spec);
}

Eigen::RowVectorXd coordinate_half_widths(const MetricSpec& spec, double r, Index dim) {
  Eigen::RowVectorXd h = Eigen::RowVectorXd::Constant(dim, r);
  std::visit(Overloaded{
                 [](const metric::Euclidean&) {},
                 [](const metric::ChordalSphere&) {},
                 [&](const metric::Snowflake& m) { h.setConstant(std::pow(r, 1.0 / m.exponent)); },
                 [&](const metric::RickmanRug& m) {
                   if (dim >= 2) h(1) = std::pow(r, m.dimension - 1.0);
                 },
                 [](const metric::ExplicitMatrix&) {},
             },
             spec);
  return h;
}

}  // namespace qslab

#include "qslab/generators.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Geometry>

#include "qslab/errors.hpp"
#include "qslab/random.hpp"

namespace qslab {

DiscreteSpace gen_round_sphere(Index n, std::uint64_t seed) {
  if (n < 10) throw InputError("sphere needs n >= 10");
  Stream rng = Stream::named(seed, "sphere-rotation");
  // Uniform random rotation (Shoemake).
  const double u1 = rng.uniform(), u2 = rng.uniform(), u3 = rng.uniform();
  const double two_pi = 2.0 * std::numbers::pi;
  const Eigen::Quaterniond q(std::sqrt(u1) * std::cos(two_pi * u3), std::sqrt(1.0 - u1) * std::sin(two_pi * u2),
                             std::sqrt(1.0 - u1) * std::cos(two_pi * u2), std::sqrt(u1) * std::sin(two_pi * u3));
  const Eigen::Matrix3d rot = q.normalized().toRotationMatrix();

  const double golden_angle = std::numbers::pi * (3.0 - std::sqrt(5.0));
  Eigen::MatrixXd coords(n, 3);
  for (Index i = 0; i < n; ++i) {
    const double z = 1.0 - (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(n);
    const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
    const double phi = golden_angle * static_cast<double>(i);
    const Eigen::Vector3d p(rho * std::cos(phi), rho * std::sin(phi), z);
    coords.row(i) = (rot * p).normalized().transpose();
  }
  Eigen::VectorXd weights = Eigen::VectorXd::Constant(n, 4.0 * std::numbers::pi / static_cast<double>(n));
  return DiscreteSpace(std::move(coords), std::move(weights), metric::ChordalSphere{});
}

DiscreteSpace gen_rickman_rug(Index n_x, Index n_y, double dimension, double extent) {
  if (n_x < 2 || n_y < 2) throw InputError("rug grid needs at least 2 points per side");
  if (!(dimension > 2.0)) throw InputError("Rickman rug dimension must exceed 2");
  if (!(extent > 0.0)) throw InputError("rug extent must be positive");
  Eigen::MatrixXd coords(n_x * n_y, 2);
  for (Index j = 0; j < n_y; ++j) {
    for (Index i = 0; i < n_x; ++i) {
      coords(j * n_x + i, 0) = extent * static_cast<double>(i) / static_cast<double>(n_x - 1);
      coords(j * n_x + i, 1) = extent * static_cast<double>(j) / static_cast<double>(n_y - 1);
    }
  }
  Eigen::VectorXd weights = Eigen::VectorXd::Constant(n_x * n_y, extent * extent / static_cast<double>(n_x * n_y));
  return DiscreteSpace(std::move(coords), std::move(weights), metric::RickmanRug{dimension});
}

DiscreteSpace gen_snowflake_plane(Index n, double epsilon, double extent, std::uint64_t seed) {
  if (n < 2) throw InputError("snowflake plane needs n >= 2");
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw InputError("snowflake exponent must lie in (0, 1)");
  if (!(extent > 0.0)) throw InputError("snowflake extent must be positive");
  Stream rng = Stream::named(seed, "snowflake-points");
  Eigen::MatrixXd coords(n, 2);
  for (Index i = 0; i < n; ++i) {
    coords(i, 0) = extent * rng.uniform();
    coords(i, 1) = extent * rng.uniform();
  }
  Eigen::VectorXd weights = Eigen::VectorXd::Constant(n, extent * extent / static_cast<double>(n));
  return DiscreteSpace(std::move(coords), std::move(weights), metric::Snowflake{epsilon});
}

namespace {

bool violates(double dik, double dij, double djk) {
  return dik > (dij + djk) * (1.0 + 1e-12);
}

std::string triple_text(Index i, Index j, Index k) {
  return "(" + std::to_string(i) + ", " + std::to_string(j) + ", " + std::to_string(k) + ")";
}

}  // namespace

DiscreteSpace gen_explicit(Eigen::MatrixXd matrix, Eigen::VectorXd weights) {
  const MetricSpec probe = metric::ExplicitMatrix{matrix};
  check_parameters(probe);
  const Index n = matrix.rows();
  if (weights.size() != n) throw InputError("weight count does not match matrix size");
  if (n <= 256) {
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        for (Index k = 0; k < n; ++k) {
          if (violates(matrix(i, k), matrix(i, j), matrix(j, k))) {
            throw ValidationError("triangle inequality fails on triple " + triple_text(i, j, k));
          }
        }
      }
    }
  }
  DiscreteSpace space(Eigen::MatrixXd(n, 0), std::move(weights), metric::ExplicitMatrix{std::move(matrix)});
  if (n > 256) {
    const AxiomCheck check = check_triangle_inequality(space, 10000, 0);
    if (!check.ok) {
      throw ValidationError("triangle inequality fails on triple " + triple_text(check.i, check.j, check.k));
    }
  }
  return space;
}

AxiomCheck check_triangle_inequality(const DiscreteSpace& space, Index samples, std::uint64_t seed) {
  AxiomCheck out;
  const Index n = space.size();
  auto test = [&](Index i, Index j, Index k) {
    ++out.triples_checked;
    if (out.ok && violates(space.distance(i, k), space.distance(i, j), space.distance(j, k))) {
      out.ok = false;
      out.i = i;
      out.j = j;
      out.k = k;
    }
  };
  if (samples <= 0) {
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j)
        for (Index k = 0; k < n; ++k) test(i, j, k);
    return out;
  }
  Stream rng = Stream::named(seed, "triangle-check");
  const auto un = static_cast<std::uint64_t>(n);
  for (Index t = 0; t < samples; ++t) {
    test(static_cast<Index>(rng.below(un)), static_cast<Index>(rng.below(un)), static_cast<Index>(rng.below(un)));
  }
  return out;
}

}  // namespace qslab

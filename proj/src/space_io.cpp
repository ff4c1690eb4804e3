#include "qslab/space_io.hpp"

#include <fstream>

#include "qslab/errors.hpp"
#include "qslab/generators.hpp"

namespace qslab {

using nlohmann::json;

json space_to_json(const DiscreteSpace& space) {
  json metric_doc;
  metric_doc["variant"] = variant_name(space.metric());
  if (const auto* m = std::get_if<metric::Snowflake>(&space.metric())) metric_doc["exponent"] = m->exponent;
  if (const auto* m = std::get_if<metric::RickmanRug>(&space.metric())) metric_doc["dimension"] = m->dimension;
  if (const auto* m = std::get_if<metric::ExplicitMatrix>(&space.metric())) {
    json tri = json::array();
    for (Index i = 1; i < m->matrix.rows(); ++i)
      for (Index j = 0; j < i; ++j) tri.push_back(m->matrix(i, j));
    metric_doc["matrix"] = std::move(tri);
  }
  json points = json::array();
  for (Index i = 0; i < space.size(); ++i) {
    json row = json::array();
    for (Index c = 0; c < space.dimension(); ++c) row.push_back(space.coords()(i, c));
    points.push_back(std::move(row));
  }
  json weights = json::array();
  for (Index i = 0; i < space.size(); ++i) weights.push_back(space.weights()(i));
  return json{{"metric", std::move(metric_doc)}, {"points", std::move(points)}, {"weights", std::move(weights)}};
}

DiscreteSpace space_from_json(const json& doc) {
  try {
    const json& metric_doc = doc.at("metric");
    const std::string variant = metric_doc.at("variant").get<std::string>();
    const auto& weights_doc = doc.at("weights");
    const auto n = static_cast<Index>(weights_doc.size());
    Eigen::VectorXd weights(n);
    for (Index i = 0; i < n; ++i) weights(i) = weights_doc.at(static_cast<std::size_t>(i)).get<double>();

    if (variant == "ExplicitMatrix") {
      const auto& tri = metric_doc.at("matrix");
      if (static_cast<Index>(tri.size()) != n * (n - 1) / 2) {
        throw InputError("explicit matrix needs n(n-1)/2 lower-triangle entries");
      }
      Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
      std::size_t k = 0;
      for (Index i = 1; i < n; ++i) {
        for (Index j = 0; j < i; ++j) {
          d(i, j) = d(j, i) = tri.at(k++).get<double>();
        }
      }
      return gen_explicit(std::move(d), std::move(weights));
    }

    MetricSpec spec;
    if (variant == "Euclidean") {
      spec = metric::Euclidean{};
    } else if (variant == "ChordalSphere") {
      spec = metric::ChordalSphere{};
    } else if (variant == "Snowflake") {
      spec = metric::Snowflake{metric_doc.at("exponent").get<double>()};
    } else if (variant == "RickmanRug") {
      spec = metric::RickmanRug{metric_doc.at("dimension").get<double>()};
    } else {
      throw InputError("unknown metric variant '" + variant + "'");
    }
    const auto& points_doc = doc.at("points");
    if (static_cast<Index>(points_doc.size()) != n) throw InputError("point count does not match weight count");
    const auto dim = n > 0 ? static_cast<Index>(points_doc.at(0).size()) : 0;
    Eigen::MatrixXd coords(n, dim);
    for (Index i = 0; i < n; ++i) {
      const auto& row = points_doc.at(static_cast<std::size_t>(i));
      if (static_cast<Index>(row.size()) != dim) throw InputError("ragged point coordinates");
      for (Index c = 0; c < dim; ++c) coords(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return DiscreteSpace(std::move(coords), std::move(weights), std::move(spec));
  } catch (const json::exception& e) {
    throw InputError(std::string("malformed space file: ") + e.what());
  }
}

void write_space(const DiscreteSpace& space, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path.string());
  out << space_to_json(space).dump() << '\n';
}

DiscreteSpace read_space(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path.string());
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    throw InputError("cannot parse " + path.string() + ": " + e.what());
  }
  return space_from_json(doc);
}

}  // namespace qslab

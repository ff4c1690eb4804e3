#pragma once

#include <filesystem>

#include <json.hpp>

#include "qslab/space.hpp"

namespace qslab {

/// Space file layout:
///   {"metric": {"variant": "...", params...}, "points": [[x, y, ...], ...], "weights": [...]}
/// Variants: Euclidean, ChordalSphere, Snowflake ("exponent"), RickmanRug
/// ("dimension"), ExplicitMatrix ("matrix": strictly lower triangle, row-major:
/// d(1,0), d(2,0), d(2,1), d(3,0), ...). Explicit spaces write empty point rows.
nlohmann::json space_to_json(const DiscreteSpace& space);

/// Throws InputError on unknown variants, missing fields or shape mismatch.
DiscreteSpace space_from_json(const nlohmann::json& doc);

void write_space(const DiscreteSpace& space, const std::filesystem::path& path);
DiscreteSpace read_space(const std::filesystem::path& path);

}  // namespace qslab

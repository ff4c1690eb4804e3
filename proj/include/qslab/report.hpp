#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "qslab/chain_metric.hpp"
#include "qslab/estimators.hpp"
#include "qslab/rings.hpp"

namespace qslab {

using nlohmann::json;

/// 16 lowercase hex digits.
std::string hex_digest(std::uint64_t h);

struct RunManifest {
  std::vector<std::string> command_line;
  json config = json::object();
  std::uint64_t seed = 0;
  std::vector<std::string> streams;  // named sub-streams drawn from the seed
  std::string space_digest;          // empty when no space file was read
  double duration_seconds = 0.0;

  json to_json() const;
  /// Digest of everything except the duration.
  std::string digest() const;
};

std::string config_digest(const json& config);

json to_json(const ChainResult& r);
json to_json(const ChainProfile& p);
json to_json(const DoublingEstimate& e);
json to_json(const AhlforsEstimate& e);
json to_json(const LlcResult& r);
json to_json(const WmdmBounds& b);
json to_json(const ConstantsReport& r);
json to_json(const StabilityReport& r);
json to_json(const QSProfile& p);
json to_json(const BlowupReport& r);
json to_json(const std::vector<RugDistortion>& rows);
json to_json(const CoverBall& b);
json to_json(const RingChain& r);
json to_json(const RingCover& c);
json to_json(const NestedConnectorTrace& t);

/// Plottable tables. Every CSV starts with a header line.
std::string profiles_csv(const std::vector<ChainProfile>& profiles);
std::string qs_csv(const QSProfile& p);
std::string blowup_csv(const BlowupReport& r);
std::string rug_csv(const std::vector<RugDistortion>& rows);
std::string ring_csv(const RingChain& r);
std::string connector_csv(const NestedConnectorTrace& t);

/// Writes PREFIX.json (report plus "manifest_digest"), PREFIX.csv when
/// `csv` is nonempty, and PREFIX.manifest.json.
void write_report(const std::filesystem::path& prefix, json report, const std::string& csv,
                  const RunManifest& manifest);

/// Same text as written to disk: report with its manifest digest. A report
/// that is not a JSON object is stored under "rows".
std::string render_report(json report, const RunManifest& manifest);

std::string file_digest(const std::filesystem::path& path);

}  // namespace qslab

#include "qslab/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "qslab/errors.hpp"
#include "qslab/random.hpp"

namespace qslab {

namespace {

// Non-finite values become null in JSON.
json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json ids(const std::vector<Index>& v) { return json(v); }

std::string fmt(double v) {
  if (!std::isfinite(v)) return std::isnan(v) ? "nan" : (v > 0 ? "inf" : "-inf");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

json scales(const ScaleRange& r) { return {{"lo", r.lo}, {"hi", r.hi}}; }

json ratio_entries(const std::vector<RatioEntry>& entries) {
  json out = json::array();
  for (const auto& e : entries) {
    out.push_back({{"delta", e.delta}, {"chain_weight", number(e.chain_weight)}, {"ratio", number(e.ratio)}});
  }
  return out;
}

}  // namespace

std::string hex_digest(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string config_digest(const json& config) { return hex_digest(fnv1a(config.dump())); }

json RunManifest::to_json() const {
  json j = {{"command_line", command_line},
            {"config", config},
            {"config_digest", config_digest(config)},
            {"seed", seed},
            {"streams", streams},
            {"version", QSLAB_VERSION},
            {"duration_seconds", duration_seconds}};
  j["space_digest"] = space_digest.empty() ? json(nullptr) : json(space_digest);
  return j;
}

std::string RunManifest::digest() const {
  json j = to_json();
  j.erase("duration_seconds");
  return hex_digest(fnv1a(j.dump()));
}

json to_json(const ChainResult& r) {
  return {{"path", ids(r.path)},
          {"total_weight", number(r.total_weight)},
          {"delta", r.delta},
          {"s", r.s},
          {"reachable", r.reachable}};
}

json to_json(const ChainProfile& p) {
  json entries = json::array();
  for (const auto& e : p.entries) {
    entries.push_back({{"delta", e.delta},
                       {"total_weight", number(e.total_weight)},
                       {"reachable", e.reachable},
                       {"below_mesh_scale", e.below_mesh_scale}});
  }
  return {{"x", p.x},
          {"y", p.y},
          {"s", p.s},
          {"entries", entries},
          {"q_estimate", number(p.q_estimate)},
          {"truncated", p.truncated}};
}

json to_json(const DoublingEstimate& e) {
  return {{"C_D", e.C_D},
          {"growth_C", e.growth_C},
          {"growth_alpha", e.growth_alpha},
          {"samples", e.samples},
          {"skipped", e.skipped},
          {"scales", scales(e.scales)}};
}

json to_json(const AhlforsEstimate& e) {
  return {{"A", e.A}, {"s_fit", e.s_fit}, {"samples", e.samples}, {"skipped", e.skipped}, {"scales", scales(e.scales)}};
}

json to_json(const LlcResult& r) {
  json j = {{"samples", r.samples}, {"link", r.link}};
  j["lambda"] = r.lambda ? json(*r.lambda) : json("fail");
  return j;
}

json to_json(const WmdmBounds& b) {
  return {{"C_W_hat", number(b.C_W_hat)},
          {"C_S_hat", number(b.C_S_hat)},
          {"pairs", b.pairs},
          {"delta", b.delta},
          {"s", b.s},
          {"min_separation", b.min_separation},
          {"vacuous_regime", b.vacuous_regime}};
}

json to_json(const ConstantsReport& r) {
  return {{"doubling", to_json(r.doubling)},
          {"ahlfors", to_json(r.ahlfors)},
          {"llc", to_json(r.llc)},
          {"wmdm", to_json(r.wmdm)},
          {"zero_weights", r.zero_weights}};
}

json to_json(const StabilityReport& r) {
  return {{"x", r.x}, {"y", r.y}, {"s", r.s}, {"entries", ratio_entries(r.entries)}, {"stabilized", r.stabilized}};
}

json to_json(const QSProfile& p) {
  json samples = json::array();
  for (const auto& q : p.samples) {
    samples.push_back({{"x", q.x}, {"y", q.y}, {"z", q.z}, {"t", q.t}, {"ratio", q.ratio}});
  }
  return {{"C", p.C}, {"alpha", p.alpha}, {"skipped", p.skipped}, {"samples", samples}};
}

json to_json(const BlowupReport& r) {
  return {{"x", r.x},
          {"y", r.y},
          {"s", r.s},
          {"entries", ratio_entries(r.entries)},
          {"mean_growth", number(r.mean_growth)},
          {"verdict", to_string(r.verdict)},
          {"truncated", r.truncated},
          {"below_mesh", r.below_mesh}};
}

json to_json(const std::vector<RugDistortion>& rows) {
  json out = json::array();
  for (const auto& d : rows) {
    json row = {{"a", d.a}, {"skipped", d.skipped}};
    if (!d.skipped) {
      row["t"] = d.t;
      row["distortion"] = d.distortion;
    }
    out.push_back(row);
  }
  return out;
}

json to_json(const CoverBall& b) {
  return {{"center", b.center},
          {"radius", b.radius},
          {"measure", b.measure},
          {"inflated_radius", b.inflated_radius},
          {"inflated_measure", b.inflated_measure}};
}

json to_json(const RingChain& r) {
  json balls = json::array();
  for (const auto& b : r.balls) balls.push_back(to_json(b));
  return {{"center", r.center},
          {"r", r.r},
          {"chain", ids(r.chain)},
          {"total_weight", r.total_weight},
          {"level", r.level},
          {"depth", r.depth},
          {"cover_size", r.cover_size},
          {"level_weights", r.level_weights},
          {"balls", balls},
          {"certificate",
           {{"removed_vertex_set", ids(r.certificate.removed_vertex_set)},
            {"inner_witness", r.certificate.inner_witness},
            {"outer_witness", r.certificate.outer_witness},
            {"verified", r.certificate.verified}}}};
}

json to_json(const RingCover& c) {
  json rings = json::array();
  for (std::size_t i = 0; i < c.rings.size(); ++i) {
    json ring = to_json(c.rings[i]);
    ring["ball"] = to_json(c.balls[i]);
    ring["maximal"] = static_cast<bool>(c.maximal[i]);
    rings.push_back(ring);
  }
  return {{"center", c.center},
          {"radius", c.radius},
          {"ball_measure", c.ball_measure},
          {"L", c.L},
          {"rings", rings},
          {"union_vertices", ids(c.union_vertices)},
          {"union_connected", c.union_connected}};
}

json to_json(const NestedConnectorTrace& t) {
  json levels = json::array();
  for (const auto& l : t.levels) {
    levels.push_back({{"level", l.level},
                      {"endpoint", l.endpoint},
                      {"ball_center", l.ball_center},
                      {"ball_radius", l.ball_radius},
                      {"ball_measure", l.ball_measure},
                      {"ring_ball", l.ring_ball},
                      {"ring_weight", l.ring_weight},
                      {"decay", l.decay},
                      {"ambiguous", l.ambiguous}});
  }
  return {{"x", t.x},
          {"y", t.y},
          {"delta", t.delta},
          {"levels", levels},
          {"chain", ids(t.chain)},
          {"total_weight", t.total_weight},
          {"tau", t.tau},
          {"stop_reasons", t.stop_reasons}};
}

std::string profiles_csv(const std::vector<ChainProfile>& profiles) {
  std::ostringstream out;
  out << "pair,x,y,delta,total_weight,reachable,below_mesh_scale\n";
  for (std::size_t k = 0; k < profiles.size(); ++k) {
    for (const auto& e : profiles[k].entries) {
      out << k << ',' << profiles[k].x << ',' << profiles[k].y << ',' << fmt(e.delta) << ',' << fmt(e.total_weight)
          << ',' << e.reachable << ',' << e.below_mesh_scale << '\n';
    }
  }
  return out.str();
}

std::string qs_csv(const QSProfile& p) {
  std::ostringstream out;
  out << "x,y,z,t,ratio,eta\n";
  for (const auto& q : p.samples) {
    out << q.x << ',' << q.y << ',' << q.z << ',' << fmt(q.t) << ',' << fmt(q.ratio) << ',' << fmt(p.eta(q.t)) << '\n';
  }
  return out.str();
}

std::string blowup_csv(const BlowupReport& r) {
  std::ostringstream out;
  out << "delta,chain_weight,ratio\n";
  for (const auto& e : r.entries) out << fmt(e.delta) << ',' << fmt(e.chain_weight) << ',' << fmt(e.ratio) << '\n';
  return out.str();
}

std::string rug_csv(const std::vector<RugDistortion>& rows) {
  std::ostringstream out;
  out << "a,t,distortion,skipped\n";
  for (const auto& d : rows) {
    out << fmt(d.a) << ',' << (d.skipped ? "" : fmt(d.t)) << ',' << (d.skipped ? "" : fmt(d.distortion)) << ','
        << d.skipped << '\n';
  }
  return out.str();
}

std::string ring_csv(const RingChain& r) {
  std::ostringstream out;
  out << "level,weight,chosen\n";
  for (std::size_t j = 0; j < r.level_weights.size(); ++j) {
    out << j + 1 << ',' << fmt(r.level_weights[j]) << ',' << (static_cast<int>(j + 1) == r.level) << '\n';
  }
  return out.str();
}

std::string connector_csv(const NestedConnectorTrace& t) {
  std::ostringstream out;
  out << "level,endpoint,ball_measure,ring_weight,decay\n";
  for (const auto& l : t.levels) {
    out << l.level << ',' << l.endpoint << ',' << fmt(l.ball_measure) << ',' << fmt(l.ring_weight) << ','
        << fmt(l.decay) << '\n';
  }
  return out.str();
}

std::string render_report(json report, const RunManifest& manifest) {
  if (!report.is_object()) report = {{"rows", std::move(report)}};
  report["manifest_digest"] = manifest.digest();
  return report.dump(2) + "\n";
}

void write_report(const std::filesystem::path& prefix, json report, const std::string& csv,
                  const RunManifest& manifest) {
  const std::string base = prefix.string();
  write_text(base + ".json", render_report(std::move(report), manifest));
  if (!csv.empty()) write_text(base + ".csv", "# manifest_digest " + manifest.digest() + "\n" + csv);
  write_text(base + ".manifest.json", manifest.to_json().dump(2) + "\n");
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot read " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return hex_digest(fnv1a(bytes));
}

}  // namespace qslab

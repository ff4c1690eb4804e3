// qslab: batch front-end for generating spaces and running chain-metric,
// estimator and ring computations.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qslab/chain_metric.hpp"
#include "qslab/errors.hpp"
#include "qslab/estimators.hpp"
#include "qslab/generators.hpp"
#include "qslab/random.hpp"
#include "qslab/report.hpp"
#include "qslab/rings.hpp"
#include "qslab/space_io.hpp"

namespace fs = std::filesystem;
using namespace qslab;

namespace {

struct Common {
  std::string space_path;
  std::uint64_t seed = 0;
  std::string output;
};

struct Output {
  json report;
  std::string csv;
  int status = 0;  // nonzero: computation produced a flagged result
};

// Loads the space and notes its digest in the manifest.
DiscreteSpace load(const Common& c, RunManifest& m) {
  if (c.space_path.empty()) throw InputError("--space is required");
  m.space_digest = file_digest(c.space_path);
  return read_space(c.space_path);
}

Index random_pair_partner(const DiscreteSpace& space, Stream& rng, Index x, double min_d, double max_d) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const auto y = static_cast<Index>(rng.below(static_cast<std::uint64_t>(space.size())));
    const double d = space.distance(x, y);
    if (y != x && d >= min_d && d <= max_d) return y;
  }
  throw InputError("no partner point at the requested distance");
}

std::pair<Index, Index> pick_pair(const DiscreteSpace& space, std::optional<Index> x, std::optional<Index> y,
                                  std::uint64_t seed, double min_d, double max_d) {
  if (x && y) return {*x, *y};
  Stream rng = Stream::named(seed, "cli-pair");
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const Index a = x ? *x : static_cast<Index>(rng.below(static_cast<std::uint64_t>(space.size())));
    try {
      return {a, random_pair_partner(space, rng, a, min_d, max_d)};
    } catch (const InputError&) {
      if (x) throw;
    }
  }
  throw InputError("no point pair at the requested distance");
}

void emit(const Common& c, const Output& out, const RunManifest& m) {
  if (c.output.empty()) {
    if (!out.csv.empty()) {
      std::cout << "# manifest_digest " << m.digest() << "\n" << out.csv;
    } else {
      std::cout << render_report(out.report, m);
    }
    return;
  }
  write_report(c.output, out.report, out.csv, m);
}

}  // namespace

int main(int argc, char** argv) {
  const auto start = std::chrono::steady_clock::now();
  CLI::App app{"qslab: weak metric doubling measures on discrete metric measure spaces"};
  app.require_subcommand(1);
  app.set_version_flag("--version", QSLAB_VERSION);

  RunManifest manifest;
  for (int i = 0; i < argc; ++i) manifest.command_line.emplace_back(argv[i]);
  Common common;
  std::function<Output()> run;

  const auto add_common = [&](CLI::App* sub, bool space, bool output) {
    if (space) sub->add_option("--space", common.space_path, "space file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "base seed for all random streams");
    if (output) sub->add_option("-o,--output", common.output, "output prefix (PREFIX.json, .csv, .manifest.json)");
  };

  // generate
  std::string variant;
  Index n = 2000, nx = 100, ny = 100;
  double dimension = 3.0, exponent = 0.5, extent = 1.0;
  auto* gen = app.add_subcommand("generate", "write a sample space file");
  gen->add_option("--variant", variant, "sphere | rug | snowflake")->required()->check(
      CLI::IsMember({"sphere", "rug", "snowflake"}));
  gen->add_option("--n", n, "points (sphere, snowflake)");
  gen->add_option("--nx", nx, "grid columns (rug)");
  gen->add_option("--ny", ny, "grid rows (rug)");
  gen->add_option("--dimension", dimension, "rug dimension s > 2");
  gen->add_option("--exponent", exponent, "snowflake exponent in (0,1)");
  gen->add_option("--extent", extent, "patch side length (rug, snowflake)");
  gen->add_option("--seed", common.seed, "seed");
  gen->add_option("-o,--output", common.output, "space file to write")->required();

  // chain
  double s = 2.0;
  std::vector<double> deltas;
  Index pairs = 10;
  std::optional<Index> opt_x, opt_y;
  auto* chain = app.add_subcommand("chain", "chain-metric profiles over a delta schedule");
  add_common(chain, true, true);
  chain->add_option("--s", s, "dimension s");
  chain->add_option("--deltas", deltas, "strictly decreasing schedule")->delimiter(',')->required();
  chain->add_option("--pairs", pairs, "random pairs");
  chain->add_option("--x", opt_x, "first point (with --y: a single pair)");
  chain->add_option("--y", opt_y, "second point");

  // constants
  ConstantsConfig cc;
  double r_min = 0.0, r_max = std::numeric_limits<double>::infinity();
  auto* cons = app.add_subcommand("constants", "doubling, Ahlfors, LLC and chain-metric constants");
  add_common(cons, true, true);
  cons->add_option("--s", cc.s, "dimension s");
  cons->add_option("--delta", cc.delta, "chain step bound");
  cons->add_option("--samples", cc.n_samples, "samples per ball estimator");
  cons->add_option("--pairs", cc.n_pairs, "pairs for the chain-metric bounds");
  cons->add_option("--min-separation", cc.min_separation, "pair separation (default 4 delta)");
  cons->add_option("--r-min", r_min, "smallest scale");
  cons->add_option("--r-max", r_max, "largest scale");
  cons->add_option("--lambdas", cc.lambda_candidates, "LLC candidates")->delimiter(',');
  cons->add_option("--link", cc.llc_link, "LLC graph link (default 2 mesh)");

  // probe-dimension
  Index halvings = 4;
  double delta0 = 1.6;
  auto* probe_dim = app.add_subcommand("probe-dimension", "ratio mu(B_xy)^(1/s) / q^delta under halving delta");
  add_common(probe_dim, true, true);
  probe_dim->add_option("--s", s, "dimension s in (0, 2]");
  probe_dim->add_option("--halvings", halvings, "number of halvings");
  probe_dim->add_option("--delta0", delta0, "starting delta");
  probe_dim->add_option("--x", opt_x, "first point");
  probe_dim->add_option("--y", opt_y, "second point");

  // probe-rug
  std::vector<double> rug_scales{0.3, 0.1, 0.03, 0.01};
  auto* probe_rug = app.add_subcommand("probe-rug", "distortion of the identity from the plane to the rug");
  add_common(probe_rug, true, true);
  probe_rug->add_option("--scales", rug_scales, "probe scales a")->delimiter(',');

  // ring
  Index center = 0;
  double radius = 0.15, delta = 0.12, eps_factor = 20.0;
  std::vector<double> multipliers{2.0, 6.0, 8.0};
  std::optional<double> strict_lambda;
  auto* ring = app.add_subcommand("ring", "cheapest-level separating ring");
  add_common(ring, true, true);
  ring->add_option("--center", center, "center point id");
  ring->add_option("--r", radius, "ring scale r");
  ring->add_option("--delta", delta, "chain step bound");
  ring->add_option("--epsilon-factor", eps_factor, "epsilon^2 in median point weights");
  ring->add_option("--multipliers", multipliers, "inner,outer,guard")->delimiter(',')->expected(3);
  ring->add_option("--strict", strict_lambda, "use 2^(2k), 2^(5k), 2^(7k) for this LLC lambda");

  // connect
  double L = 128.0;
  double connect_eps = 5.0;
  auto* conn = app.add_subcommand("connect", "nested-ring connector between two points");
  add_common(conn, true, true);
  conn->add_option("--x", opt_x, "first point");
  conn->add_option("--y", opt_y, "second point");
  conn->add_option("--delta", delta, "chain step bound");
  conn->add_option("--L", L, "cover measure ratio");
  conn->add_option("--epsilon-factor", connect_eps, "epsilon^2 in median point weights");
  conn->add_option("--multipliers", multipliers, "inner,outer,guard")->delimiter(',')->expected(3);

  // qs-profile
  Index triples = 500;
  double qs_delta = 0.1;
  auto* qs = app.add_subcommand("qs-profile", "distortion profile of the identity onto (X, q^delta)");
  add_common(qs, true, true);
  qs->add_option("--s", s, "dimension s");
  qs->add_option("--delta", qs_delta, "chain step bound");
  qs->add_option("--triples", triples, "random triples");

  // validate
  Index axiom_samples = 0;
  auto* val = app.add_subcommand("validate", "check a space file and its metric axioms");
  add_common(val, true, true);
  val->add_option("--samples", axiom_samples, "sampled triples (0: all for n <= 256, else 10^4)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }

  manifest.seed = common.seed;
  try {
    Output out;
    json& cfg = manifest.config;
    if (gen->parsed()) {
      cfg = {{"command", "generate"}, {"variant", variant}, {"seed", common.seed}};
      DiscreteSpace space = [&] {
        if (variant == "sphere") {
          cfg["n"] = n;
          manifest.streams = {"sphere-rotation"};
          return gen_round_sphere(n, common.seed);
        }
        if (variant == "rug") {
          cfg.update({{"nx", nx}, {"ny", ny}, {"dimension", dimension}, {"extent", extent}});
          return gen_rickman_rug(nx, ny, dimension, extent);
        }
        cfg.update({{"n", n}, {"exponent", exponent}, {"extent", extent}});
        manifest.streams = {"snowflake-points"};
        return gen_snowflake_plane(n, exponent, extent, common.seed);
      }();
      write_space(space, common.output);
      manifest.space_digest = file_digest(common.output);
      manifest.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      fs::path mpath = common.output;
      mpath.replace_extension(".manifest.json");
      std::ofstream(mpath) << manifest.to_json().dump(2) << "\n";
      return 0;
    }

    const DiscreteSpace space = load(common, manifest);
    if (chain->parsed()) {
      cfg = {{"command", "chain"}, {"s", s}, {"deltas", deltas}, {"pairs", pairs}, {"seed", common.seed}};
      manifest.streams = {"chain-pairs"};
      std::vector<DeltaGraph> graphs;
      for (double d : deltas) graphs.push_back(build_delta_graph(space, d, s));
      for (std::size_t k = 1; k < deltas.size(); ++k) {
        if (!(deltas[k] < deltas[k - 1])) throw InputError("delta schedule must be strictly decreasing");
      }
      std::vector<std::pair<Index, Index>> chosen;
      if (opt_x && opt_y) {
        space.check_id(*opt_x);
        space.check_id(*opt_y);
        chosen.emplace_back(*opt_x, *opt_y);
      } else {
        Stream rng = Stream::named(common.seed, "chain-pairs");
        while (static_cast<Index>(chosen.size()) < pairs) {
          const auto a = static_cast<Index>(rng.below(static_cast<std::uint64_t>(space.size())));
          const auto b = static_cast<Index>(rng.below(static_cast<std::uint64_t>(space.size())));
          if (a != b) chosen.emplace_back(a, b);
        }
      }
      std::vector<ChainProfile> profiles;
      json items = json::array();
      bool truncated = false;
      for (const auto& [a, b] : chosen) {
        profiles.push_back(chain_profile(graphs, a, b));
        truncated = truncated || profiles.back().truncated;
        items.push_back(to_json(profiles.back()));
      }
      out.report = {{"command", "chain"}, {"profiles", items}, {"truncated", truncated}};
      out.csv = profiles_csv(profiles);
    } else if (cons->parsed()) {
      cc.seed = common.seed;
      cc.scales = {r_min, r_max};
      cfg = {{"command", "constants"},    {"s", cc.s},
             {"delta", cc.delta},         {"samples", cc.n_samples},
             {"pairs", cc.n_pairs},       {"min_separation", cc.min_separation},
             {"r_min", r_min},            {"r_max", std::isfinite(r_max) ? json(r_max) : json(nullptr)},
             {"lambdas", cc.lambda_candidates}, {"link", cc.llc_link},
             {"seed", common.seed}};
      manifest.streams = {"doubling", "ahlfors", "llc", "wmdm-pairs"};
      const ConstantsReport r = estimate_constants(space, cc);
      out.report = to_json(r);
      out.report["command"] = "constants";
    } else if (probe_dim->parsed()) {
      cfg = {{"command", "probe-dimension"}, {"s", s}, {"halvings", halvings}, {"delta0", delta0},
             {"seed", common.seed}};
      manifest.streams = {"cli-pair"};
      const auto [a, b] = pick_pair(space, opt_x, opt_y, common.seed, 8.0 * space.mesh_scale(), 1e300);
      const BlowupReport r = dimension_blowup_probe(space, s, a, b, halvings, delta0);
      out.report = to_json(r);
      out.report["command"] = "probe-dimension";
      out.csv = blowup_csv(r);
      if (r.truncated) {
        out.report["note"] = "schedule truncated: x and y are not chain-connected at the smallest delta";
        out.status = 2;
      }
    } else if (probe_rug->parsed()) {
      cfg = {{"command", "probe-rug"}, {"scales", rug_scales}};
      const auto rows = rug_qs_failure_probe(space, rug_scales);
      out.report = {{"command", "probe-rug"}, {"rows", to_json(rows)}};
      out.csv = rug_csv(rows);
    } else if (ring->parsed()) {
      RingParams p{center, radius, delta, RingParams::epsilon_for(space, eps_factor),
                   {multipliers[0], multipliers[1], multipliers[2]}, 4.0};
      if (strict_lambda) p.multipliers = RingMultipliers::strict(*strict_lambda);
      cfg = {{"command", "ring"},           {"center", center},
             {"r", radius},                 {"delta", delta},
             {"epsilon_factor", eps_factor},
             {"multipliers", {p.multipliers.inner, p.multipliers.outer, p.multipliers.guard}}};
      const RingChain r = cheapest_level_ring(space, p);
      out.report = to_json(r);
      out.report["command"] = "ring";
      out.csv = ring_csv(r);
    } else if (conn->parsed()) {
      manifest.streams = {"cli-pair"};
      const auto [a, b] = pick_pair(space, opt_x, opt_y, common.seed, 8.0 * space.mesh_scale(), 1e300);
      ConnectorParams p;
      p.delta = delta;
      p.L = L;
      p.epsilon = RingParams::epsilon_for(space, connect_eps);
      p.multipliers = {multipliers[0], multipliers[1], multipliers[2]};
      cfg = {{"command", "connect"}, {"x", a},     {"y", b},
             {"delta", delta},       {"L", L},     {"epsilon_factor", connect_eps},
             {"multipliers", multipliers}, {"seed", common.seed}};
      const NestedConnectorTrace t = connect_via_rings(space, a, b, p);
      out.report = to_json(t);
      out.report["command"] = "connect";
      out.report["chain_distance"] = chain_distance(build_delta_graph(space, delta, 2.0), a, b).total_weight;
      out.csv = connector_csv(t);
    } else if (qs->parsed()) {
      cfg = {{"command", "qs-profile"}, {"s", s}, {"delta", qs_delta}, {"triples", triples}, {"seed", common.seed}};
      manifest.streams = {"doubling", "qs-triples"};
      const QSProfile p = qs_profile(space, s, qs_delta, triples, common.seed);
      out.report = to_json(p);
      out.report["command"] = "qs-profile";
      out.csv = qs_csv(p);
    } else if (val->parsed()) {
      cfg = {{"command", "validate"}, {"samples", axiom_samples}, {"seed", common.seed}};
      manifest.streams = {"triangle-triples"};
      const Index samples = axiom_samples > 0 ? axiom_samples : (space.size() <= 256 ? 0 : 10000);
      const AxiomCheck check = check_triangle_inequality(space, samples, common.seed);
      out.report = {{"command", "validate"},
                    {"points", space.size()},
                    {"metric", variant_name(space.metric())},
                    {"mesh_scale", space.mesh_scale()},
                    {"diameter", space.diameter()},
                    {"zero_weights", space.has_zero_weights()},
                    {"triples_checked", check.triples_checked},
                    {"ok", check.ok}};
      if (!check.ok) {
        out.report["violation"] = {check.i, check.j, check.k};
        out.status = 1;
      }
    }
    manifest.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    emit(common, out, manifest);
    return out.status;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  } catch (const ComputationError& e) {
    std::cerr << "computation error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 1;
  }
}

#include "qslab/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/QR>

#include "qslab/errors.hpp"
#include "qslab/proximity.hpp"
#include "qslab/random.hpp"

namespace qslab {

namespace {

constexpr double kMaxSkipFraction = 0.2;

double log_uniform(Stream& rng, ScaleRange r) {
  if (r.hi <= r.lo) return r.lo;
  return std::exp(rng.uniform(std::log(r.lo), std::log(r.hi)));
}

// Points whose ball of radius r stays inside the patch (all points for
// spheres and explicit matrices).
std::vector<Index> eligible_centers(const DiscreteSpace& space, double r) {
  std::vector<Index> out;
  for (Index i = 0; i < space.size(); ++i) {
    if (space.ball_fits(i, r)) out.push_back(i);
  }
  if (out.empty()) throw InputError("no sample center keeps the requested balls inside the patch");
  return out;
}

Index pick(Stream& rng, const std::vector<Index>& from) { return from[rng.below(from.size())]; }

void check_skips(Index skipped, Index total, const char* what) {
  if (total > 0 && static_cast<double>(skipped) > kMaxSkipFraction * static_cast<double>(total)) {
    throw ComputationError(std::string(what) + ": more than 20% of samples hit empty balls; raise the scale range");
  }
}

ScaleRange usable_scales(const DiscreteSpace& space, ScaleRange requested) {
  const ScaleRange r = clamp_scales(space, requested);
  if (!(r.lo > 0.0) || r.hi < r.lo) throw InputError("scale range is empty after clamping to [mesh, diameter/4]");
  return r;
}

std::uint64_t sub_seed(std::uint64_t seed, std::string_view name) { return seed ^ fnv1a(name); }

void check_pair(const DiscreteSpace& space, Index x, Index y) {
  space.check_id(x);
  space.check_id(y);
  if (x == y) throw InputError("x and y must differ");
}

std::vector<RatioEntry> ratio_entries(const DiscreteSpace& space, double s, Index x, Index y,
                                      std::span<const double> schedule, bool& truncated) {
  const double mu = space.pair_ball_measure(x, y);
  std::vector<RatioEntry> out;
  truncated = false;
  for (double delta : schedule) {
    const DeltaGraph g = build_delta_graph(space, delta, s);
    const ChainResult r = chain_distance(g, x, y);
    if (!r.reachable) {
      truncated = true;
      break;
    }
    out.push_back({delta, r.total_weight, std::pow(mu, 1.0 / s) / r.total_weight});
  }
  return out;
}

}  // namespace

ScaleRange clamp_scales(const DiscreteSpace& space, ScaleRange requested) {
  return {std::max(requested.lo, space.mesh_scale()), std::min(requested.hi, space.diameter() / 4.0)};
}

DoublingEstimate estimate_doubling(const DiscreteSpace& space, Index n_samples, ScaleRange scales,
                                   std::uint64_t seed) {
  if (n_samples < 2) throw InputError("need at least 2 samples");
  DoublingEstimate est;
  est.scales = usable_scales(space, scales);
  const auto centers = eligible_centers(space, 2.0 * est.scales.hi);
  Stream rng = Stream::named(seed, "doubling");

  double c_d = 0.0;
  std::vector<double> log_rho, log_ratio;
  for (Index k = 0; k < n_samples; ++k) {
    const Index x = pick(rng, centers);
    const double R = log_uniform(rng, est.scales);
    const double inner = space.ball_measure(x, R);
    double r1 = log_uniform(rng, est.scales);
    double r2 = log_uniform(rng, est.scales);
    if (r1 > r2) std::swap(r1, r2);
    const double m1 = space.ball_measure(x, r1);
    if (inner <= 0.0 || m1 <= 0.0) {
      ++est.skipped;
      continue;
    }
    ++est.samples;
    c_d = std::max(c_d, space.ball_measure(x, 2.0 * R) / inner);
    if (r2 > r1) {
      log_rho.push_back(std::log(r2 / r1));
      log_ratio.push_back(std::log(space.ball_measure(x, r2) / m1));
    }
  }
  check_skips(est.skipped, n_samples, "estimate_doubling");
  est.C_D = std::max(1.0, c_d);

  const Eigen::Map<const Eigen::VectorXd> lx(log_rho.data(), static_cast<Index>(log_rho.size()));
  const Eigen::Map<const Eigen::VectorXd> ly(log_ratio.data(), static_cast<Index>(log_ratio.size()));
  const double sxx = lx.squaredNorm();
  const double slope = sxx > 0.0 ? lx.dot(ly) / sxx : 1.0;
  est.growth_alpha = std::max(slope, 1.0 + 1e-9);
  double c = 1.0;
  for (std::size_t k = 0; k < log_rho.size(); ++k) {
    // Growing balls need the rho^alpha branch; the reciprocal view
    // (r1/r2 < 1) is dominated by rho^(1/alpha) automatically since the
    // measure ratio is then <= 1.
    const double base = std::exp(est.growth_alpha * log_rho[k]);
    c = std::max(c, std::exp(log_ratio[k]) / base);
  }
  est.growth_C = c;
  return est;
}

AhlforsEstimate estimate_ahlfors(const DiscreteSpace& space, Index n_samples, ScaleRange scales,
                                 std::uint64_t seed) {
  if (n_samples < 2) throw InputError("need at least 2 samples");
  AhlforsEstimate est;
  est.scales = usable_scales(space, scales);
  const auto centers = eligible_centers(space, est.scales.hi);
  Stream rng = Stream::named(seed, "ahlfors");

  std::vector<double> lr, lm;
  for (Index k = 0; k < n_samples; ++k) {
    const Index x = pick(rng, centers);
    const double r = log_uniform(rng, est.scales);
    const double m = space.ball_measure(x, r);
    if (m <= 0.0) {
      ++est.skipped;
      continue;
    }
    lr.push_back(std::log(r));
    lm.push_back(std::log(m));
  }
  check_skips(est.skipped, n_samples, "estimate_ahlfors");
  est.samples = static_cast<Index>(lr.size());
  if (est.samples < 2) throw ComputationError("estimate_ahlfors: too few usable samples");

  Eigen::MatrixXd design(est.samples, 2);
  design.col(0) = Eigen::Map<const Eigen::VectorXd>(lr.data(), est.samples);
  design.col(1).setOnes();
  const Eigen::Map<const Eigen::VectorXd> rhs(lm.data(), est.samples);
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(rhs);
  est.s_fit = coef(0);
  double a = 1.0;
  for (Index k = 0; k < est.samples; ++k) {
    const double gap = std::abs(lm[static_cast<std::size_t>(k)] - est.s_fit * lr[static_cast<std::size_t>(k)]);
    a = std::max(a, std::exp(gap));
  }
  est.A = a;
  return est;
}

LlcResult check_llc(const DiscreteSpace& space, std::span<const double> lambda_candidates, Index n_samples,
                    std::uint64_t seed, double link) {
  if (lambda_candidates.empty()) throw InputError("no lambda candidates");
  if (n_samples < 1) throw InputError("need at least 1 sample");
  std::vector<double> lambdas(lambda_candidates.begin(), lambda_candidates.end());
  std::sort(lambdas.begin(), lambdas.end());
  if (lambdas.front() < 1.0) throw InputError("lambda candidates must be >= 1");

  LlcResult out;
  out.link = link > 0.0 ? link : 2.0 * space.mesh_scale();
  out.samples = n_samples;
  const ProximityGraph graph = proximity_graph(space, out.link);
  const ScaleRange scales = usable_scales(space, {0.0, std::numeric_limits<double>::infinity()});
  const auto centers = eligible_centers(space, scales.hi);
  Stream rng = Stream::named(seed, "llc");

  struct Probe {
    Eigen::VectorXd dist;
    double r;
  };
  std::vector<Probe> probes;
  const Index n = space.size();
  for (Index k = 0; k < n_samples; ++k) {
    const Index x = pick(rng, centers);
    Probe p{Eigen::VectorXd(n), log_uniform(rng, scales)};
    for (Index j = 0; j < n; ++j) p.dist(j) = space.distance(x, j);
    probes.push_back(std::move(p));
  }

  // All vertices selected by `in` lie in one component of graph[allowed].
  const auto one_component = [&](const std::vector<char>& in, const std::vector<char>& allowed) {
    const auto labels = component_labels(graph, allowed);
    int label = -2;
    for (Index j = 0; j < n; ++j) {
      if (!in[static_cast<std::size_t>(j)]) continue;
      const int l = labels[static_cast<std::size_t>(j)];
      if (label == -2) label = l;
      if (l != label || l < 0) return false;
    }
    return true;
  };

  std::vector<char> in(static_cast<std::size_t>(n)), allowed(static_cast<std::size_t>(n));
  for (double lambda : lambdas) {
    bool ok = true;
    for (const Probe& p : probes) {
      for (Index j = 0; j < n; ++j) {
        in[static_cast<std::size_t>(j)] = p.dist(j) < p.r;
        allowed[static_cast<std::size_t>(j)] = p.dist(j) < lambda * p.r;
      }
      if (!one_component(in, allowed)) {
        ok = false;
        break;
      }
      for (Index j = 0; j < n; ++j) {
        in[static_cast<std::size_t>(j)] = p.dist(j) >= p.r;
        allowed[static_cast<std::size_t>(j)] = p.dist(j) >= p.r / lambda;
      }
      if (!one_component(in, allowed)) {
        ok = false;
        break;
      }
    }
    if (ok) {
      out.lambda = lambda;
      break;
    }
  }
  return out;
}

WmdmBounds estimate_wmdm_bounds(const DiscreteSpace& space, double delta, double s, Index n_pairs,
                                double min_separation, std::uint64_t seed) {
  if (!(delta > 0.0)) throw InputError("delta must be positive");
  if (!is_explicit(space.metric()) && delta > min_separation / 4.0) {
    throw InputError("delta must be at most min_separation / 4");
  }
  return estimate_wmdm_bounds(space, build_delta_graph(space, delta, s), n_pairs, min_separation, seed);
}

WmdmBounds estimate_wmdm_bounds(const DiscreteSpace& space, const DeltaGraph& graph, Index n_pairs,
                                double min_separation, std::uint64_t seed) {
  if (n_pairs < 1) throw InputError("need at least 1 pair");
  // Sampling resolution rules; an explicit matrix is the space itself.
  if (!is_explicit(space.metric())) {
    if (min_separation < 4.0 * space.mesh_scale()) throw InputError("min_separation must be at least 4 mesh scales");
    if (graph.delta > min_separation / 4.0) throw InputError("delta must be at most min_separation / 4");
  }
  WmdmBounds out;
  out.delta = graph.delta;
  out.s = graph.s;
  out.min_separation = min_separation;
  out.vacuous_regime = graph.s > 2.0 && (std::holds_alternative<metric::ChordalSphere>(space.metric()) ||
                                         std::holds_alternative<metric::Euclidean>(space.metric()));

  const auto centers = eligible_centers(space, 0.0);
  Stream rng = Stream::named(seed, "wmdm-pairs");
  const Index max_attempts = 1000 * n_pairs;
  Index attempts = 0;
  while (out.pairs < n_pairs) {
    if (++attempts > max_attempts) throw InputError("too few point pairs at the requested separation");
    const Index x = pick(rng, centers);
    const Index y = pick(rng, centers);
    if (x == y || space.distance(x, y) < min_separation) continue;
    const ChainResult r = chain_distance(graph, x, y);
    if (!r.reachable) throw ComputationError("points are not joined by a delta-chain; raise delta");
    const double mu = space.pair_ball_measure(x, y);
    out.C_W_hat = std::max(out.C_W_hat, std::pow(mu, 1.0 / graph.s) / r.total_weight);
    out.C_S_hat = std::max(out.C_S_hat, r.total_weight / std::sqrt(mu));
    ++out.pairs;
  }
  return out;
}

StabilityReport delta_stability_check(const DiscreteSpace& space, double s, Index x, Index y,
                                      std::span<const double> schedule) {
  check_pair(space, x, y);
  if (schedule.size() < 2) throw InputError("delta schedule needs at least two entries");
  for (std::size_t k = 1; k < schedule.size(); ++k) {
    if (!(schedule[k] < schedule[k - 1])) throw InputError("delta schedule must be strictly decreasing");
  }
  StabilityReport out;
  out.x = x;
  out.y = y;
  out.s = s;
  bool truncated = false;
  out.entries = ratio_entries(space, s, x, y, schedule, truncated);
  if (truncated) throw ComputationError("schedule reaches a delta at which x and y are not chain-connected");
  const double last = out.entries[out.entries.size() - 1].ratio;
  const double prev = out.entries[out.entries.size() - 2].ratio;
  out.stabilized = std::abs(last - prev) <= 0.25 * std::min(last, prev);
  return out;
}

double QSProfile::eta(double t) const { return C * std::max(std::pow(t, alpha / 2.0), std::pow(t, 0.5 / alpha)); }

double fit_envelope_constant(std::span<const QSSample> samples, double alpha) {
  QSProfile probe;
  probe.alpha = alpha;
  double c = 1.0;
  for (const QSSample& q : samples) c = std::max(c, q.ratio / probe.eta(q.t));
  return c;
}

QSProfile qs_profile_of(const DiscreteSpace& space, Index n_triples, double min_separation, double alpha,
                        std::uint64_t seed, const std::function<std::optional<double>(Index, Index)>& target) {
  if (n_triples < 1) throw InputError("need at least 1 triple");
  if (!(alpha >= 1.0)) throw InputError("alpha must be >= 1");
  QSProfile out;
  out.alpha = alpha;
  const auto centers = eligible_centers(space, 0.0);
  Stream rng = Stream::named(seed, "qs-triples");
  const Index max_attempts = 1000 * n_triples;
  Index attempts = 0;
  while (static_cast<Index>(out.samples.size()) + out.skipped < n_triples) {
    if (++attempts > max_attempts) throw InputError("too few point triples at the requested separation");
    const Index x = pick(rng, centers);
    const Index y = pick(rng, centers);
    const Index z = pick(rng, centers);
    if (x == y || x == z || y == z) continue;
    const double dxy = space.distance(x, y), dxz = space.distance(x, z);
    if (dxy < min_separation || dxz < min_separation || space.distance(y, z) < min_separation) continue;
    const auto qy = target(x, y);
    const auto qz = target(x, z);
    if (!qy || !qz || !(*qz > 0.0)) {
      ++out.skipped;
      continue;
    }
    out.samples.push_back({x, y, z, dxy / dxz, *qy / *qz});
  }
  out.C = fit_envelope_constant(out.samples, alpha);
  return out;
}

QSProfile qs_profile(const DiscreteSpace& space, const DeltaGraph& graph, Index n_triples, double alpha,
                     std::uint64_t seed) {
  // Triples share x across both lookups; keep the last single-source run.
  Index cached = -1;
  std::vector<std::optional<double>> from;
  const auto target = [&](Index x, Index y) {
    if (x != cached) {
      from = chain_distances_from(graph, x);
      cached = x;
    }
    return from[static_cast<std::size_t>(y)];
  };
  return qs_profile_of(space, n_triples, 4.0 * space.mesh_scale(), alpha, seed, target);
}

QSProfile qs_profile(const DiscreteSpace& space, double s, double delta, Index n_triples, std::uint64_t seed) {
  const DoublingEstimate growth =
      estimate_doubling(space, 200, {0.0, std::numeric_limits<double>::infinity()}, sub_seed(seed, "qs-growth"));
  return qs_profile(space, build_delta_graph(space, delta, s), n_triples, growth.growth_alpha, seed);
}

std::string to_string(BlowupVerdict v) {
  switch (v) {
    case BlowupVerdict::blowup:
      return "blowup";
    case BlowupVerdict::stable:
      return "stable";
    case BlowupVerdict::drifting:
      return "drifting";
  }
  return "drifting";
}

BlowupReport dimension_blowup_probe(const DiscreteSpace& space, double s, Index x, Index y, Index n_halvings,
                                    double delta0) {
  check_pair(space, x, y);
  if (!(s > 0.0 && s <= 2.0)) throw InputError("dimension_blowup_probe needs 0 < s <= 2");
  if (n_halvings < 1) throw InputError("need at least one halving");
  if (!(delta0 > 0.0)) throw InputError("delta0 must be positive");
  std::vector<double> schedule;
  for (Index k = 0; k <= n_halvings; ++k) schedule.push_back(std::ldexp(delta0, -static_cast<int>(k)));

  BlowupReport out;
  out.x = x;
  out.y = y;
  out.s = s;
  out.below_mesh = schedule.back() < space.mesh_scale();
  out.entries = ratio_entries(space, s, x, y, schedule, out.truncated);
  const std::size_t m = out.entries.size();
  if (m < 2) {
    out.verdict = BlowupVerdict::drifting;
    return out;
  }
  const double first = out.entries.front().ratio;
  out.mean_growth = std::pow(out.entries.back().ratio / first, 1.0 / static_cast<double>(m - 1));
  const bool flat = std::all_of(out.entries.begin(), out.entries.end(),
                                [&](const RatioEntry& e) { return std::abs(e.ratio / first - 1.0) <= 0.25; });
  if (out.mean_growth >= 1.15) {
    out.verdict = BlowupVerdict::blowup;
  } else if (flat) {
    out.verdict = BlowupVerdict::stable;
  } else {
    out.verdict = BlowupVerdict::drifting;
  }
  return out;
}

std::vector<RugDistortion> rug_qs_failure_probe(const DiscreteSpace& rug, std::span<const double> scales) {
  const auto* m = std::get_if<metric::RickmanRug>(&rug.metric());
  if (!m) throw InputError("rug_qs_failure_probe needs a RickmanRug space");
  const double s = m->dimension;
  const Eigen::RowVectorXd lo = rug.coords().colwise().minCoeff();
  const Eigen::RowVectorXd hi = rug.coords().colwise().maxCoeff();
  const Eigen::RowVectorXd extent = hi - lo;
  const Eigen::RowVectorXd x = (lo + hi) / 2.0;
  const auto inside = [&](const Eigen::RowVectorXd& p) {
    return ((p - lo).array() >= 0.1 * extent.array()).all() && ((hi - p).array() >= 0.1 * extent.array()).all();
  };

  std::vector<RugDistortion> out;
  for (double a : scales) {
    if (!(a > 0.0)) throw InputError("probe scales must be positive");
    Eigen::RowVectorXd y = x, z = x;
    y(0) += a;
    z(1) += std::pow(a, s - 1.0);
    RugDistortion d{a, 0.0, 0.0, !(inside(y) && inside(z))};
    if (!d.skipped) {
      d.t = formula_distance(rug.metric(), x, y) / formula_distance(rug.metric(), x, z);
      d.distortion = (x - y).norm() / (x - z).norm();
    }
    out.push_back(d);
  }
  return out;
}

ConstantsReport estimate_constants(const DiscreteSpace& space, const ConstantsConfig& config) {
  ConstantsReport out;
  out.config = config;
  if (out.config.min_separation <= 0.0) {
    out.config.min_separation = std::max(4.0 * config.delta, 4.0 * space.mesh_scale());
  }
  out.zero_weights = space.has_zero_weights();
  out.doubling = estimate_doubling(space, config.n_samples, config.scales, sub_seed(config.seed, "doubling"));
  out.ahlfors = estimate_ahlfors(space, config.n_samples, config.scales, sub_seed(config.seed, "ahlfors"));
  const Index llc_samples = std::clamp<Index>(config.n_samples / 8, 1, 64);
  out.llc = check_llc(space, config.lambda_candidates, llc_samples, sub_seed(config.seed, "llc"), config.llc_link);
  out.wmdm = estimate_wmdm_bounds(space, config.delta, config.s, config.n_pairs, out.config.min_separation,
                                  sub_seed(config.seed, "wmdm"));
  return out;
}

}  // namespace qslab

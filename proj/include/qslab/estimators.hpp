#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qslab/chain_metric.hpp"
#include "qslab/space.hpp"

namespace qslab {

struct ScaleRange {
  double lo = 0.0;
  double hi = 0.0;
};

/// Intersects a requested range with [mesh scale, diameter/4], the band in
/// which a finite sample behaves like the underlying continuum.
ScaleRange clamp_scales(const DiscreteSpace& space, ScaleRange requested);

struct DoublingEstimate {
  double C_D = 1.0;           // max mu(B(x,2R)) / mu(B(x,R))
  double growth_C = 1.0;      // envelope C of the two-sided power growth bound
  double growth_alpha = 1.0;  // envelope exponent alpha > 1
  Index samples = 0;
  Index skipped = 0;
  ScaleRange scales;
};

/// Doubling constant and the growth envelope
///   mu(B(x,r2)) / mu(B(x,r1)) <= C * max{(r2/r1)^alpha, (r2/r1)^(1/alpha)}.
/// alpha is the least-squares slope of log ratio on log(r2/r1) (floored just
/// above 1); C is then the smallest constant >= 1 dominating every sample.
/// Samples with an empty inner ball are skipped; more than 20% skipped is a
/// ComputationError.
DoublingEstimate estimate_doubling(const DiscreteSpace& space, Index n_samples, ScaleRange scales,
                                   std::uint64_t seed);

struct AhlforsEstimate {
  double A = 1.0;
  double s_fit = 0.0;
  Index samples = 0;
  Index skipped = 0;
  ScaleRange scales;
};

/// s_fit: regression slope of log mu(B(x,r)) on log r. A: max over samples of
/// max(mu / r^s_fit, r^s_fit / mu).
AhlforsEstimate estimate_ahlfors(const DiscreteSpace& space, Index n_samples, ScaleRange scales,
                                 std::uint64_t seed);

struct LlcResult {
  std::optional<double> lambda;  // nullopt: no candidate passed
  Index samples = 0;
  double link = 0.0;
};

/// Smallest candidate lambda such that, for every sampled (x, r), the points
/// of B(x,r) lie in one component of the proximity graph restricted to
/// B(x, lambda r), and the points outside B(x,r) lie in one component of the
/// graph restricted to the complement of B(x, r/lambda). `link` <= 0 uses
/// twice the mesh scale.
LlcResult check_llc(const DiscreteSpace& space, std::span<const double> lambda_candidates, Index n_samples,
                    std::uint64_t seed, double link = 0.0);

struct WmdmBounds {
  double C_W_hat = 0.0;  // max mu(B_xy)^(1/s) / q^delta(x,y)
  double C_S_hat = 0.0;  // max q^delta(x,y) / mu(B_xy)^(1/2)
  Index pairs = 0;
  double delta = 0.0;
  double s = 0.0;
  double min_separation = 0.0;
  /// s > 2 on a surface of dimension 2: q^delta blows up as delta -> 0 and
  /// the lower bound holds for trivial reasons.
  bool vacuous_regime = false;
};

WmdmBounds estimate_wmdm_bounds(const DiscreteSpace& space, double delta, double s, Index n_pairs,
                                double min_separation, std::uint64_t seed);

/// Same, on a prebuilt graph.
WmdmBounds estimate_wmdm_bounds(const DiscreteSpace& space, const DeltaGraph& graph, Index n_pairs,
                                double min_separation, std::uint64_t seed);

struct RatioEntry {
  double delta;
  double chain_weight;  // q^delta(x, y)
  double ratio;         // mu(B_xy)^(1/s) / q^delta(x, y)
};

struct StabilityReport {
  Index x = 0, y = 0;
  double s = 0.0;
  std::vector<RatioEntry> entries;
  bool stabilized = false;  // last two ratios within 25% of each other
};

StabilityReport delta_stability_check(const DiscreteSpace& space, double s, Index x, Index y,
                                      std::span<const double> schedule);

struct QSSample {
  Index x, y, z;
  double t;      // d(x,y) / d(x,z)
  double ratio;  // target(x,y) / target(x,z)
};

struct QSProfile {
  std::vector<QSSample> samples;
  double C = 1.0;
  double alpha = 1.0;
  Index skipped = 0;

  /// eta(t) = C * max{t^(alpha/2), t^(1/(2 alpha))}
  double eta(double t) const;
};

/// Smallest C >= 1 with samples dominated by eta for the given alpha.
double fit_envelope_constant(std::span<const QSSample> samples, double alpha);

/// Profiles the identity map from (X, d) to (X, target) on random triples with
/// pairwise distances >= min_separation.
QSProfile qs_profile_of(const DiscreteSpace& space, Index n_triples, double min_separation, double alpha,
                        std::uint64_t seed, const std::function<std::optional<double>(Index, Index)>& target);

/// Identity to (X, q^delta) at dimension s, alpha from estimate_doubling on
/// the default scale band. Triples keep pairwise distances >= 4 mesh scales.
QSProfile qs_profile(const DiscreteSpace& space, double s, double delta, Index n_triples, std::uint64_t seed);
QSProfile qs_profile(const DiscreteSpace& space, const DeltaGraph& graph, Index n_triples, double alpha,
                     std::uint64_t seed);

enum class BlowupVerdict { blowup, stable, drifting };
std::string to_string(BlowupVerdict v);

struct BlowupReport {
  Index x = 0, y = 0;
  double s = 0.0;
  std::vector<RatioEntry> entries;
  double mean_growth = 1.0;  // geometric mean of ratio growth per halving
  BlowupVerdict verdict = BlowupVerdict::drifting;
  bool truncated = false;    // an unreachable delta cut the schedule short
  bool below_mesh = false;   // the schedule reaches below the mesh scale
};

/// Ratio mu(B_xy)^(1/s) / q^delta along delta_0 / 2^k, k = 0..n_halvings.
/// Verdict: blowup if mean growth >= 1.15 per halving, stable if every ratio
/// stays within 25% of the first, drifting otherwise. Requires 0 < s <= 2.
BlowupReport dimension_blowup_probe(const DiscreteSpace& space, double s, Index x, Index y, Index n_halvings,
                                    double delta0);

struct RugDistortion {
  double a;
  double t;           // d(x,y) / d(x,z), 1 up to rounding
  double distortion;  // |x - y| / |x - z| in the plane
  bool skipped;       // probe points leave the interior margin
};

/// Triples x = patch center, y = x + (a, 0), z = x + (0, a^(s-1)) in the
/// plane carrying the rug metric: equal rug distances, Euclidean ratio a^(2-s).
std::vector<RugDistortion> rug_qs_failure_probe(const DiscreteSpace& rug, std::span<const double> scales);

struct ConstantsConfig {
  double s = 2.0;
  double delta = 0.1;
  Index n_samples = 400;
  Index n_pairs = 100;
  double min_separation = 0.0;  // 0: max(4 delta, 4 mesh scales)
  ScaleRange scales{0.0, 1e300};
  std::vector<double> lambda_candidates{1.0, 1.5, 2.0, 3.0, 4.0};
  double llc_link = 0.0;
  std::uint64_t seed = 0;
};

struct ConstantsReport {
  DoublingEstimate doubling;
  AhlforsEstimate ahlfors;
  LlcResult llc;
  WmdmBounds wmdm;
  ConstantsConfig config;
  bool zero_weights = false;
};

/// All estimators, each drawing from its own named sub-stream of config.seed.
ConstantsReport estimate_constants(const DiscreteSpace& space, const ConstantsConfig& config);

}  // namespace qslab

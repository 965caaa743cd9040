#pragma once

#include "mmdlab/config.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace mmdlab {

/// One Monte-Carlo trial. `sub_seed` alone reproduces the trial's data.
struct TrialRecord {
  std::size_t trial = 0;
  std::uint64_t sub_seed = 0;
  double deviation = 0.0;
  std::optional<double> bound;
  std::optional<bool> covered;
  std::optional<double> excess_risk;
  std::optional<std::size_t> g_index;
  std::optional<std::size_t> f_index;
};

/// One rung of a decay ladder.
struct DecayPoint {
  std::size_t n = 0;
  double mean_deviation = 0.0;
  double std_error = 0.0;
};

struct ExperimentReport {
  ExperimentKind kind = ExperimentKind::coverage;
  Json config_echo = Json::object();
  std::vector<TrialRecord> trials;
  std::vector<DecayPoint> decay;
  Json summary = Json::object();
  /// Kept out of written reports so reruns stay byte-identical.
  double wall_clock_seconds = 0.0;
};

/// Per trial: fresh (X, Y), sup over (f, g) of |U-statistic - population
/// value|, compared with the configured bound (Theorem 1 high-probability
/// form or the single-pair Hoeffding bound). Complexity terms are estimated
/// once up front.
ExperimentReport run_coverage(const ExperimentConfig& config);

/// Mean sup deviation over the n ladder and the least-squares slope of
/// ln(mean) against ln(n). The slope is flagged undefined when any mean is 0.
ExperimentReport run_decay(const ExperimentConfig& config);

/// Fits the minimum-MMD (corollary1) or minimax (corollary2) estimator on
/// fresh data each trial and compares its population excess risk with the
/// corollary's bound.
ExperimentReport run_excess_risk_experiment(const ExperimentConfig& config, Corollary which);

/// Empirical probes of the certified kernel constants.
ExperimentReport run_kernel_audit(const ExperimentConfig& config);

/// Dispatches on config.kind.
ExperimentReport run_experiment(const ExperimentConfig& config);

/// Least-squares slope of ln(mean) on ln(n) with a delta-method standard
/// error. Empty when any mean is not positive.
struct SlopeFit {
  double slope = 0.0;
  double std_error = 0.0;
};
std::optional<SlopeFit> log_log_slope(const std::vector<DecayPoint>& points);

}  // namespace mmdlab

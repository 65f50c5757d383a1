#pragma once

#include "lnoise/dual.hpp"
#include "lnoise/io.hpp"

#include <string>
#include <vector>

namespace lnoise {

struct ExperimentConfig {
  Index n = 40;
  Index d = 100;
  Index s = 4;
  std::uint64_t seed = 1;
  double amp_lo = 0.5;
  double amp_hi = 1.5;
  /// When set, the problem is loaded from this directory instead of generated.
  std::string problem_dir;
  std::vector<Algorithm> algorithms{Algorithm::GD, Algorithm::SGD, Algorithm::LNGD, Algorithm::LNSGD};
  double gamma = 0.1;
  double Delta = 1e-3;
  long steps = 100'000'000;
  long record_every = 1'000'000;
  int log_points_per_decade = 20;
  double theta_lo = 0.5;
  double theta_hi = 1.0;
  bool verify_kkt = true;
  bool verify_envelopes = false;
  bool verify_poincare = false;
  /// noise_<algo>.bin is written only when steps * n stays below this count.
  long max_noise_values = 20'000'000;
  std::string out_dir;

  double delta() const { return gamma * Delta / static_cast<double>(n); }
  KeyValues to_key_values() const;
  /// Overrides fields present in kv; throws ValidationError on unknown keys or bad values.
  void apply(const KeyValues& kv);
  void validate() const;
};

struct AlgoMetrics {
  Algorithm algorithm = Algorithm::LNGD;
  long steps_done = 0;
  bool exploded = false;
  long explosion_step = -1;
  long zero_crossings = 0;
  double param_sq_error = 0.0;    // ||beta(T) - beta*||_2^2
  double linf_error = 0.0;        // ||beta(T) - beta*||_inf
  double off_support_max = 0.0;   // max over the complement of S*
  double on_support_deviation = 0.0;  // ||beta_S(T) - beta_hat_S||_inf, NaN outside the standard regime
  double wall_seconds = 0.0;
};

/// Terminal metrics from the last recorded row of a trajectory.
AlgoMetrics terminal_metrics(Algorithm algo, const Vec& beta_T, const GroundTruth& gt, const LassoSolution& sol);

struct RunReport {
  std::vector<AlgoMetrics> metrics;
  Regime regime = Regime::Untreated;
  double delta = 0.0;
  double delta_minus = 0.0;
  double delta_plus = 0.0;
  double kkt_stationarity = 0.0;
  double kkt_complementarity = 0.0;
  bool kkt_ok = true;
  std::vector<EnvelopeReport> envelopes;
  bool envelopes_ok = true;
  bool poincare_checked = false;
  bool poincare_ok = true;  // every tail check passed
  double kappa_bound = 0.0;
  double laplace_estimate = 0.0;
  double wall_seconds = 0.0;
  int generator_attempts = 0;
};

/**
 * Generates or loads the problem, runs each algorithm from a shared theta(0),
 * runs the requested checks and writes the artifacts to cfg.out_dir (when set).
 * @param keep receives the trajectories, in cfg.algorithms order, when non-null.
 */
RunReport run_experiment(const ExperimentConfig& cfg, std::vector<Trajectory>* keep = nullptr);

void write_report_csv(const std::string& path, const RunReport& rep);
void write_envelope_csv(const std::string& path, const std::vector<EnvelopeReport>& reps);

/// fig1_error.svg, fig1_support.svg and fig1_offsupport.svg in dir.
void write_figure1(const std::string& dir, const std::vector<Algorithm>& algos,
                   const std::vector<TrajectoryTable>& tables, const GroundTruth& gt);

/// Rebuilds a trajectory from its CSV table and replayable increments.
Trajectory trajectory_from_table(const TrajectoryTable& t, const NoiseConfig& cfg, Index n,
                                 std::vector<double> gaussians);

}  // namespace lnoise

#pragma once

#include "lnoise/model.hpp"
#include "lnoise/rng.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace lnoise {

enum class Algorithm { GD, SGD, LNGD, LNSGD, EulerMaruyama };

std::string to_string(Algorithm a);
/// Accepts gd, sgd, lngd, lnsgd, em. Throws ValidationError otherwise.
Algorithm parse_algorithm(const std::string& s);
bool uses_label_noise(Algorithm a);
bool samples_one_row(Algorithm a);

struct NoiseConfig {
  double gamma = 0.1;
  double Delta = 1e-3;
  double delta = 0.0;
  std::uint64_t seed = 0;

  /// delta is always derived as gamma * Delta / n.
  static NoiseConfig make(double gamma, double Delta, Index n, std::uint64_t seed);
};

Vec lngd_step(const Vec& theta, const Problem& p, const NoiseConfig& cfg, const Vec& z);
/// Single-sample step on row i (0-based); uses z[i] as the label noise.
Vec lnsgd_step(const Vec& theta, const Problem& p, const NoiseConfig& cfg, Index i, const Vec& z);
Vec gd_step(const Vec& theta, const Problem& p, const NoiseConfig& cfg);
Vec sgd_step(const Vec& theta, const Problem& p, const NoiseConfig& cfg, Index i);
Vec em_step(const Vec& theta, const Problem& p, const NoiseConfig& cfg, const Vec& z);

/// Gaussian stream used by simulate: n standard normals per step.
class IncrementStream {
 public:
  IncrementStream(std::uint64_t seed, Index n);
  void next(Vec& z);
  Index dim() const { return n_; }

 private:
  Rng rng_;
  Index n_;
};

/// Uniform row index stream used by the single-sample algorithms.
class IndexStream {
 public:
  IndexStream(std::uint64_t seed, Index n);
  Index next();

 private:
  Rng rng_;
  Index n_;
};

struct SimulateOptions {
  long num_steps = 200'000;
  long record_every = 100;
  /// Extra records on a geometric grid (points per decade of step count); 0 disables.
  int log_points_per_decade = 0;
  bool record_noise = true;
  /// For GD, stop iterating once a step leaves theta bitwise unchanged and
  /// replicate the fixed point into the remaining records.
  bool fast_forward_fixed_point = true;
};

struct Trajectory {
  Algorithm algorithm = Algorithm::LNGD;
  NoiseConfig cfg;
  Index n = 0;
  Index d = 0;
  std::vector<long> steps;
  std::vector<double> times;
  Mat theta;  // one row per record
  Mat beta;
  /// n standard normals per executed step, when recorded (also sample_index).
  std::vector<double> gaussians;
  std::vector<Index> sample_index;
  long steps_done = 0;
  bool exploded = false;
  long explosion_step = -1;
  long zero_crossings = 0;
  long fixed_point_step = -1;
  Vec theta_final;

  Index records() const { return static_cast<Index>(steps.size()); }
  bool has_noise() const { return !gaussians.empty(); }
};

Trajectory simulate(const Vec& theta0, const Problem& p, const NoiseConfig& cfg, Algorithm algo,
                    const SimulateOptions& opt);

/// True when step j is recorded under the options (step 0 and the last step always are).
bool is_recorded(long j, const SimulateOptions& opt);

/// Shared initial point: i.i.d. uniform entries in [lo, hi].
Vec draw_theta0(Index d, std::uint64_t seed, double lo = 0.5, double hi = 1.0);

/// 0.5 * ||X beta - y||^2 / n evaluated at beta = theta^2.
double training_loss(const Problem& p, const Vec& theta);

}  // namespace lnoise

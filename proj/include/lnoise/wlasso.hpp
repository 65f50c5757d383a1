#pragma once

#include "lnoise/model.hpp"

#include <string>

namespace lnoise {

enum class Regime { Standard, Large, Untreated };

std::string to_string(Regime r);

struct Thresholds {
  double delta_minus = 0.0;
  double delta_plus = 0.0;
  /// Support coordinates whose denominator was nonpositive and were skipped.
  Support unconstrained;
};

struct LassoSolution {
  double delta = 0.0;
  Vec beta_hat;
  Vec mu_hat;
  Regime regime = Regime::Untreated;
  double delta_minus = 0.0;
  double delta_plus = 0.0;

  bool has_solution() const { return regime != Regime::Untreated; }
};

struct KktResidual {
  Vec stationarity;
  double complementarity = 0.0;
  double nonneg_violation = 0.0;

  double stationarity_inf() const { return stationarity.cwiseAbs().maxCoeff(); }
  bool accepted(double tol = 1e-8) const {
    return stationarity_inf() <= tol && std::abs(complementarity) <= tol && nonneg_violation == 0.0;
  }
};

/// ||Xn beta - yn||^2 + delta <hn, beta>. Throws ValidationError on a negative entry.
double wl_objective(const Problem& p, const Vec& beta, double delta);

Thresholds thresholds(const Problem& p, const GroundTruth& gt);

/// Closed-form minimiser and conic multiplier. In the band [delta_minus, delta_plus]
/// the regime is Untreated and beta_hat / mu_hat are left empty.
LassoSolution closed_form(const Problem& p, const GroundTruth& gt, double delta);

KktResidual kkt_residual(const Problem& p, const Vec& beta, const Vec& mu, double delta);

struct NumericSolution {
  Vec beta;
  double projected_gradient_norm = 0.0;
  long iterations = 0;
  bool converged = false;
};

/**
 * Accelerated projected gradient (with momentum restart) on the weighted Lasso
 * over the nonnegative orthant.
 *
 * Step 1/(2 lambda_max(Xn^T Xn)); the default start is the all-ones vector.
 */
NumericSolution solve_numeric(const Problem& p, double delta, double tol = 1e-12,
                              long max_iter = 2'000'000, const Vec* init = nullptr);

}  // namespace lnoise

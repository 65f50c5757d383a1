#include "lnoise/rng.hpp"
#include "lnoise/wlasso.hpp"

#include <doctest.h>

#include <limits>

using namespace lnoise;

namespace {

Problem row12() {
  Mat X(1, 2);
  X << 1, 2;
  return build_problem(X, Vec::Ones(1));
}

GroundTruth row12_truth() { return ground_truth(row12(), {0}); }

double max_abs(const Vec& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

}  // namespace

TEST_CASE("objective values") {
  Problem p = row12();
  CHECK(wl_objective(p, Vec::Zero(2), 0.3) == doctest::Approx(p.yn.squaredNorm()));
  CHECK(wl_objective(p, Vec{{1.0, 0.0}}, 1.0) == doctest::Approx(1.0));
  GeneratedInstance gi = generate_gaussian(20, 40, 3, 5);
  CHECK(wl_objective(gi.problem, gi.truth.beta_star, 0.0) <= 1e-20);
  CHECK_THROWS_AS(wl_objective(p, Vec{{-1.0, 0.0}}, 1.0), ValidationError);
}

TEST_CASE("thresholds on the two-column example") {
  Thresholds t = thresholds(row12(), row12_truth());
  CHECK(t.delta_minus == doctest::Approx(2.0));
  CHECK(t.delta_plus == doctest::Approx(2.0));
  CHECK(t.unconstrained.empty());
}

TEST_CASE("thresholds with zero response") {
  Problem p = build_problem(Mat::Identity(2, 2), Vec::Zero(2));
  Thresholds t = thresholds(p, ground_truth(p, {}));
  CHECK(t.delta_plus == 0.0);
  CHECK(t.delta_minus == std::numeric_limits<double>::infinity());
}

TEST_CASE("thresholds on Gaussian data scale with the amplitudes") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GeneratedInstance gi = generate_gaussian(200, 400, 4, seed);
    Thresholds t = thresholds(gi.problem, gi.truth);
    double bmin = 1e300, bmax = 0.0;
    for (Index k : gi.truth.support) {
      bmin = std::min(bmin, gi.truth.beta_star[k]);
      bmax = std::max(bmax, gi.truth.beta_star[k]);
    }
    CHECK(t.delta_minus >= bmin);
    CHECK(t.delta_minus <= 4.0 * bmin);
    CHECK(t.delta_plus >= bmax);
    CHECK(t.delta_plus <= 4.0 * bmax);
  }
}

TEST_CASE("closed form on the two-column example") {
  Problem p = row12();
  GroundTruth gt = row12_truth();
  LassoSolution a = closed_form(p, gt, 1.0);
  CHECK(a.regime == Regime::Standard);
  CHECK(a.beta_hat[0] == doctest::Approx(0.5));
  CHECK(a.beta_hat[1] == 0.0);
  CHECK(a.mu_hat[0] == 0.0);
  CHECK(a.mu_hat[1] == doctest::Approx(2.0));

  LassoSolution b = closed_form(p, gt, 3.0);
  CHECK(b.regime == Regime::Large);
  CHECK(b.beta_hat == Vec::Zero(2));
  CHECK(b.mu_hat[0] == doctest::Approx(1.0));
  CHECK(b.mu_hat[1] == doctest::Approx(8.0));

  CHECK(kkt_residual(p, a.beta_hat, a.mu_hat, 1.0).accepted(1e-10));
  CHECK(kkt_residual(p, b.beta_hat, b.mu_hat, 3.0).accepted(1e-10));
}

TEST_CASE("closed form with zero response") {
  Problem p = build_problem(Mat::Identity(2, 2), Vec::Zero(2));
  LassoSolution s = closed_form(p, ground_truth(p, {}), 0.7);
  CHECK(s.regime == Regime::Large);
  CHECK(s.beta_hat == Vec::Zero(2));
  CHECK((s.mu_hat - 0.7 * p.hn).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("the untreated band is refused") {
  GeneratedInstance gi = generate_gaussian(40, 100, 4, 1);
  Thresholds t = thresholds(gi.problem, gi.truth);
  REQUIRE(t.delta_minus < t.delta_plus);
  LassoSolution s = closed_form(gi.problem, gi.truth, 0.5 * (t.delta_minus + t.delta_plus));
  CHECK(s.regime == Regime::Untreated);
  CHECK_FALSE(s.has_solution());
  CHECK(s.beta_hat.size() == 0);
  CHECK_THROWS_AS(closed_form(gi.problem, gi.truth, 0.0), ValidationError);
}

TEST_CASE("closed form satisfies the regime invariants and KKT") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GeneratedInstance gi = generate_gaussian(40, 100, 4, seed);
    Thresholds t = thresholds(gi.problem, gi.truth);
    for (double delta : {0.1 * t.delta_minus, 0.9 * t.delta_minus}) {
      LassoSolution s = closed_form(gi.problem, gi.truth, delta);
      REQUIRE(s.regime == Regime::Standard);
      for (Index k = 0; k < 100; ++k) {
        bool on = std::binary_search(gi.truth.support.begin(), gi.truth.support.end(), k);
        if (on) {
          CHECK(s.beta_hat[k] > 0.0);
          CHECK(s.mu_hat[k] == 0.0);
        } else {
          CHECK(s.beta_hat[k] == 0.0);
          CHECK(s.mu_hat[k] > 0.0);
        }
      }
      CHECK(kkt_residual(gi.problem, s.beta_hat, s.mu_hat, delta).accepted(1e-10));
    }
    for (double delta : {1.1 * t.delta_plus, 5.0 * t.delta_plus}) {
      LassoSolution s = closed_form(gi.problem, gi.truth, delta);
      REQUIRE(s.regime == Regime::Large);
      CHECK(s.beta_hat == Vec::Zero(100));
      CHECK(s.mu_hat.minCoeff() > 0.0);
      CHECK(kkt_residual(gi.problem, s.beta_hat, s.mu_hat, delta).accepted(1e-10));
    }
  }
}

TEST_CASE("kkt residual rejects non-minimisers") {
  GeneratedInstance gi = generate_gaussian(40, 100, 4, 2);
  const Problem& p = gi.problem;
  const double delta = 0.01;
  KktResidual r = kkt_residual(p, gi.truth.beta_star, delta * p.hn, delta);
  CHECK(r.stationarity_inf() <= 1e-12);
  CHECK(r.complementarity > 0.0);
  CHECK_FALSE(r.accepted());

  LassoSolution s = closed_form(p, gi.truth, delta);
  Vec b = s.beta_hat;
  b[gi.truth.support[0]] += 1e-3;
  Mat XS(p.n, gi.truth.support.size());
  for (std::size_t j = 0; j < gi.truth.support.size(); ++j) XS.col(j) = p.Xn.col(gi.truth.support[j]);
  const double lmin = Eigen::SelfAdjointEigenSolver<Mat>(XS.transpose() * XS).eigenvalues().minCoeff();
  KktResidual rp = kkt_residual(p, b, s.mu_hat, delta);
  CHECK(rp.stationarity_inf() >= 2e-3 * lmin);
  CHECK_FALSE(rp.accepted());

  Vec neg = s.beta_hat;
  neg[0] = -1.0;
  CHECK(kkt_residual(p, neg, s.mu_hat, delta).nonneg_violation == doctest::Approx(1.0));
}

TEST_CASE("numeric solver on the two-column example") {
  Problem p = row12();
  NumericSolution a = solve_numeric(p, 1.0);
  CHECK(a.converged);
  CHECK(max_abs(a.beta - Vec{{0.5, 0.0}}) <= 1e-8);
  NumericSolution b = solve_numeric(p, 3.0);
  CHECK(b.converged);
  CHECK(max_abs(b.beta) <= 1e-8);
}

TEST_CASE("numeric solver reports non-convergence") {
  GeneratedInstance gi = generate_gaussian(40, 100, 4, 3);
  NumericSolution s = solve_numeric(gi.problem, 0.01, 1e-14, 5);
  CHECK_FALSE(s.converged);
  CHECK(s.iterations == 5);
  CHECK(s.projected_gradient_norm > 1e-14);
  CHECK(s.beta.size() == 100);
}

TEST_CASE("small delta recovers the interpolator") {
  GeneratedInstance gi = generate_gaussian(40, 100, 4, 1);
  NumericSolution s = solve_numeric(gi.problem, 1e-8);
  CHECK(s.converged);
  CHECK(max_abs(s.beta - gi.truth.beta_star) <= 1e-6);
}

TEST_CASE("closed form agrees with the numeric oracle across regimes") {
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    GeneratedInstance gi = generate_gaussian(40, 100, 4, seed);
    Thresholds t = thresholds(gi.problem, gi.truth);
    for (double delta : {0.1 * t.delta_minus, 0.5 * t.delta_minus, 0.9 * t.delta_minus, 1.1 * t.delta_plus,
                         5.0 * t.delta_plus}) {
      LassoSolution cf = closed_form(gi.problem, gi.truth, delta);
      NumericSolution ns = solve_numeric(gi.problem, delta);
      CHECK(ns.converged);
      CHECK(max_abs(cf.beta_hat - ns.beta) <= 1e-6);
    }
  }
}

TEST_CASE("numeric minimiser does not depend on the start") {
  GeneratedInstance gi = generate_gaussian(40, 100, 4, 4);
  Thresholds t = thresholds(gi.problem, gi.truth);
  const double delta = 0.5 * t.delta_minus;
  LassoSolution cf = closed_form(gi.problem, gi.truth, delta);
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    Vec init(100);
    for (Index k = 0; k < 100; ++k) init[k] = rng.uniform(0.0, 2.0);
    NumericSolution ns = solve_numeric(gi.problem, delta, 1e-12, 2'000'000, &init);
    CHECK(ns.converged);
    CHECK(max_abs(cf.beta_hat - ns.beta) <= 1e-6);
  }
}

TEST_CASE("shrinkage is monotone and vanishes at the lower threshold") {
  GeneratedInstance gi = generate_gaussian(40, 100, 4, 6);
  Thresholds t = thresholds(gi.problem, gi.truth);
  Vec prev = closed_form(gi.problem, gi.truth, 0.01 * t.delta_minus).beta_hat;
  for (double f : {0.2, 0.5, 0.8, 0.99, 0.999999}) {
    Vec cur = closed_form(gi.problem, gi.truth, f * t.delta_minus).beta_hat;
    for (Index k : gi.truth.support) CHECK(cur[k] <= prev[k]);
    prev = cur;
  }
  double m = 1e300;
  for (Index k : gi.truth.support) m = std::min(m, prev[k]);
  CHECK(m >= 0.0);
  CHECK(m <= 1e-5);
}

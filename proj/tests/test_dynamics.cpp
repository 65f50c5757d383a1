#include "lnoise/dynamics.hpp"
#include "lnoise/wlasso.hpp"

#include <doctest.h>

#include <cmath>

using namespace lnoise;

namespace {

Problem row12() {
  Mat X(1, 2);
  X << 1, 2;
  return build_problem(X, Vec::Ones(1));
}

Vec random_vec(Index m, std::uint64_t seed) {
  Rng rng(seed);
  Vec v(m);
  rng.fill_normal(v);
  return v;
}

double rel_dev(const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff() / b.cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("noise config derives delta") {
  NoiseConfig c = NoiseConfig::make(0.1, 1e-3, 40, 3);
  CHECK(c.delta == 0.1 * 1e-3 / 40.0);
  CHECK(c.seed == 3);
  CHECK_THROWS_AS(NoiseConfig::make(0.0, 1e-3, 40, 1), ValidationError);
  CHECK_THROWS_AS(NoiseConfig::make(0.1, -1.0, 40, 1), ValidationError);
}

TEST_CASE("algorithm names round trip") {
  for (Algorithm a : {Algorithm::GD, Algorithm::SGD, Algorithm::LNGD, Algorithm::LNSGD, Algorithm::EulerMaruyama})
    CHECK(parse_algorithm(to_string(a)) == a);
  CHECK_THROWS_AS(parse_algorithm("adam"), ValidationError);
}

TEST_CASE("one full-batch step on the two-column example") {
  Problem p = row12();
  NoiseConfig c = NoiseConfig::make(0.1, 0.0, 1, 0);
  const Vec th = Vec::Ones(2);
  const Vec z = Vec::Zero(1);
  for (const Vec& out : {lngd_step(th, p, c, z), gd_step(th, p, c), em_step(th, p, c, z)}) {
    CHECK(out[0] == doctest::Approx(0.8));
    CHECK(out[1] == doctest::Approx(0.6));
  }
  CHECK(sgd_step(th, p, c, 0) == gd_step(th, p, c));
}

TEST_CASE("fixed points and the absorbing origin") {
  GeneratedInstance gi = generate_gaussian(10, 20, 2, 4);
  const Problem& p = gi.problem;
  const Vec th_star = gi.truth.beta_star.cwiseSqrt();
  NoiseConfig quiet = NoiseConfig::make(0.1, 0.0, p.n, 0);
  const Vec z = random_vec(p.n, 1);
  CHECK((lngd_step(th_star, p, quiet, z) - th_star).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK((gd_step(th_star, p, quiet) - th_star).cwiseAbs().maxCoeff() <= 1e-14);
  for (Index i = 0; i < p.n; ++i) CHECK((lnsgd_step(th_star, p, quiet, i, z) - th_star).cwiseAbs().maxCoeff() <= 1e-14);

  NoiseConfig loud = NoiseConfig::make(0.1, 1.0, p.n, 0);
  CHECK(lngd_step(Vec::Zero(p.d), p, loud, z) == Vec::Zero(p.d));
  CHECK(em_step(Vec::Zero(p.d), p, loud, z) == Vec::Zero(p.d));
  CHECK(lnsgd_step(Vec::Zero(p.d), p, loud, 3, z) == Vec::Zero(p.d));
}

TEST_CASE("single-sample step with one row equals the full-batch step") {
  Mat X(1, 3);
  X << 0.5, -1.0, 2.0;
  Problem p = build_problem(X, Vec::Constant(1, 0.7));
  NoiseConfig c = NoiseConfig::make(0.05, 0.3, 1, 0);
  const Vec th{{0.9, 0.4, 0.2}};
  const Vec z = Vec::Constant(1, -1.3);
  CHECK((lnsgd_step(th, p, c, 0, z) - lngd_step(th, p, c, z)).cwiseAbs().maxCoeff() <= 1e-15);
}

TEST_CASE("averaging single-sample steps over rows gives the full-batch step") {
  GeneratedInstance gi = generate_gaussian(10, 20, 2, 5);
  const Problem& p = gi.problem;
  NoiseConfig c = NoiseConfig::make(0.01, 0.0, p.n, 0);
  const Vec th = draw_theta0(p.d, 9);
  Vec avg = Vec::Zero(p.d);
  for (Index i = 0; i < p.n; ++i) avg += sgd_step(th, p, c, i) - th;
  avg /= static_cast<double>(p.n);
  CHECK((avg - (gd_step(th, p, c) - th)).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK_THROWS_AS(sgd_step(th, p, c, p.n), ValidationError);
  CHECK_THROWS_AS(lnsgd_step(th, p, c, -1, Vec::Zero(p.n)), ValidationError);
}

TEST_CASE("Euler-Maruyama step matches the label-noise step") {
  GeneratedInstance gi = generate_gaussian(40, 100, 4, 1);
  const Problem& p = gi.problem;
  NoiseConfig c = NoiseConfig::make(0.1, 1e-3, p.n, 0);
  const Vec th = draw_theta0(p.d, 2);
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Vec z = random_vec(p.n, 100 + s);
    const Vec a = lngd_step(th, p, c, z);
    const Vec b = em_step(th, p, c, z);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12 * a.cwiseAbs().maxCoeff());
  }
  const Vec z0 = Vec::Zero(p.n);
  CHECK((em_step(th, p, c, z0) - gd_step(th, p, c)).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("non-finite steps raise an explosion signal") {
  Problem p = row12();
  NoiseConfig c = NoiseConfig::make(0.1, 0.0, 1, 0);
  const Vec big = Vec::Constant(2, 1e200);
  CHECK_THROWS_AS(lngd_step(big, p, c, Vec::Zero(1)), std::overflow_error);
  CHECK_THROWS_AS(em_step(big, p, c, Vec::Zero(1)), std::overflow_error);
}

TEST_CASE("trajectory layout and determinism") {
  GeneratedInstance gi = generate_gaussian(10, 20, 2, 3);
  const Problem& p = gi.problem;
  NoiseConfig c = NoiseConfig::make(0.1, 1e-2, p.n, 17);
  SimulateOptions opt;
  opt.num_steps = 1000;
  opt.record_every = 100;
  const Vec th0 = draw_theta0(p.d, 17);
  Trajectory a = simulate(th0, p, c, Algorithm::LNGD, opt);
  Trajectory b = simulate(th0, p, c, Algorithm::LNGD, opt);
  CHECK(a.theta == b.theta);
  CHECK(a.gaussians == b.gaussians);
  REQUIRE(a.records() == 11);
  CHECK(a.steps.front() == 0);
  CHECK(a.steps.back() == 1000);
  for (Index r = 0; r < a.records(); ++r) CHECK(a.times[r] == doctest::Approx(0.1 * a.steps[r]));
  CHECK(a.beta == a.theta.cwiseAbs2());
  CHECK(a.theta.row(0).transpose() == th0);
  CHECK(a.gaussians.size() == static_cast<std::size_t>(1000 * p.n));
  CHECK(a.theta_final == a.theta.row(a.records() - 1).transpose());

  IncrementStream replay(stream_seed(17, 1), p.n);
  Vec z(p.n);
  replay.next(z);
  for (Index i = 0; i < p.n; ++i) CHECK(z[i] == a.gaussians[i]);
  CHECK((lngd_step(th0, p, c, z) - a.theta_final).norm() > 0.0);

  NoiseConfig other = NoiseConfig::make(0.1, 1e-2, p.n, 18);
  CHECK(simulate(th0, p, other, Algorithm::LNGD, opt).theta != a.theta);

  opt.record_noise = false;
  Trajectory q = simulate(th0, p, c, Algorithm::LNSGD, opt);
  CHECK(q.gaussians.empty());
  CHECK(q.sample_index.empty());
}

TEST_CASE("geometric record grid") {
  SimulateOptions opt;
  opt.num_steps = 100000;
  opt.record_every = 0;
  opt.log_points_per_decade = 10;
  CHECK(is_recorded(0, opt));
  CHECK(is_recorded(100000, opt));
  CHECK(is_recorded(10, opt));
  CHECK(is_recorded(1000, opt));
  CHECK_FALSE(is_recorded(999, opt));
}

TEST_CASE("LNGD and Euler-Maruyama trajectories coincide with shared noise") {
  GeneratedInstance gi = generate_gaussian(40, 100, 4, 2);
  const Problem& p = gi.problem;
  NoiseConfig c = NoiseConfig::make(0.1, 1e-3, p.n, 5);
  SimulateOptions opt;
  opt.num_steps = 10000;
  opt.record_every = 500;
  const Vec th0 = draw_theta0(p.d, 5);
  Trajectory a = simulate(th0, p, c, Algorithm::LNGD, opt);
  Trajectory b = simulate(th0, p, c, Algorithm::EulerMaruyama, opt);
  CHECK(a.gaussians == b.gaussians);
  CHECK(rel_dev(b.beta, a.beta) <= 1e-12);
}

TEST_CASE("noiseless dynamics reach an interpolator") {
  GeneratedInstance gi = generate_gaussian(10, 20, 2, 6);
  const Problem& p = gi.problem;
  NoiseConfig c = NoiseConfig::make(0.1, 0.0, p.n, 1);
  SimulateOptions opt;
  opt.num_steps = 5'000'000;
  opt.record_every = 0;
  const Vec th0 = draw_theta0(p.d, 1);
  for (Algorithm a : {Algorithm::GD, Algorithm::SGD}) {
    Trajectory t = simulate(th0, p, c, a, opt);
    CHECK_FALSE(t.exploded);
    CHECK(training_loss(p, t.theta_final) < 1e-8);
  }
}

TEST_CASE("noiseless loss decreases under the smoothness step bound") {
  GeneratedInstance gi = generate_gaussian(10, 20, 2, 7);
  const Problem& p = gi.problem;
  const Vec th0 = draw_theta0(p.d, 7);
  const double lmax = Eigen::SelfAdjointEigenSolver<Mat>(p.Xn.transpose() * p.Xn).eigenvalues().maxCoeff();
  // beta stays below 2 * max beta0 + max beta* on this instance; the bound uses that ceiling.
  const double beta_cap = 2.0 * th0.cwiseAbs2().maxCoeff() + gi.truth.beta_star.maxCoeff();
  const double gamma = 1.0 / (2.0 * lmax * beta_cap);
  NoiseConfig c = NoiseConfig::make(gamma, 0.0, p.n, 0);
  Vec th = th0;
  double prev = training_loss(p, th);
  long violations = 0;
  for (int j = 0; j < 20000; ++j) {
    th = gd_step(th, p, c);
    CHECK(th.cwiseAbs2().maxCoeff() <= beta_cap);
    const double cur = training_loss(p, th);
    if (cur > prev * (1.0 + 1e-12) + 1e-300) ++violations;
    prev = cur;
  }
  CHECK(violations == 0);
}

TEST_CASE("LNGD recovers the shrunk sparse solution") {
  GeneratedInstance gi = generate_gaussian(10, 20, 2, 8);
  const Problem& p = gi.problem;
  NoiseConfig c = NoiseConfig::make(0.1, 0.1, p.n, 3);  // delta = 1e-3
  Thresholds th = thresholds(p, gi.truth);
  REQUIRE(c.delta < th.delta_minus);
  LassoSolution sol = closed_form(p, gi.truth, c.delta);
  SimulateOptions opt;
  opt.num_steps = 2'000'000;
  opt.record_every = 0;
  opt.record_noise = false;
  Trajectory t = simulate(draw_theta0(p.d, 3), p, c, Algorithm::LNGD, opt);
  REQUIRE_FALSE(t.exploded);
  const Vec beta = t.theta_final.cwiseAbs2();
  const double tol = 5.0 * std::sqrt(c.delta);
  for (Index k = 0; k < p.d; ++k) {
    if (std::binary_search(gi.truth.support.begin(), gi.truth.support.end(), k))
      CHECK(std::abs(beta[k] - sol.beta_hat[k]) <= tol);
    else
      CHECK(beta[k] < 1e-6);
  }
}

TEST_CASE("explosions truncate the trajectory") {
  GeneratedInstance gi = generate_gaussian(10, 20, 2, 3);
  const Problem& p = gi.problem;
  NoiseConfig c = NoiseConfig::make(50.0, 0.0, p.n, 1);
  SimulateOptions opt;
  opt.num_steps = 1000;
  opt.record_every = 1;
  Trajectory t = simulate(draw_theta0(p.d, 1), p, c, Algorithm::GD, opt);
  CHECK(t.exploded);
  CHECK(t.explosion_step > 0);
  CHECK(t.steps_done == t.explosion_step - 1);
  CHECK(t.beta.allFinite());
  CHECK(t.steps.back() <= t.steps_done);
}

TEST_CASE("sign changes are counted") {
  Mat X(1, 1);
  X << 1;
  Problem p = build_problem(X, Vec::Zero(1));
  NoiseConfig c = NoiseConfig::make(3.0, 0.0, 1, 0);
  SimulateOptions opt;
  opt.num_steps = 1;
  opt.record_every = 1;
  Trajectory t = simulate(Vec::Ones(1), p, c, Algorithm::GD, opt);
  CHECK(t.theta_final[0] == doctest::Approx(-2.0));
  CHECK(t.zero_crossings == 1);
}

#include "lnoise/dynamics.hpp"

#include <algorithm>
#include <cmath>

namespace lnoise {

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::GD:
      return "gd";
    case Algorithm::SGD:
      return "sgd";
    case Algorithm::LNGD:
      return "lngd";
    case Algorithm::LNSGD:
      return "lnsgd";
    case Algorithm::EulerMaruyama:
      return "em";
  }
  return "lngd";
}

Algorithm parse_algorithm(const std::string& s) {
  if (s == "gd") return Algorithm::GD;
  if (s == "sgd") return Algorithm::SGD;
  if (s == "lngd") return Algorithm::LNGD;
  if (s == "lnsgd") return Algorithm::LNSGD;
  if (s == "em") return Algorithm::EulerMaruyama;
  throw ValidationError("unknown algorithm '" + s + "' (expected gd, sgd, lngd, lnsgd, em)");
}

bool uses_label_noise(Algorithm a) {
  return a == Algorithm::LNGD || a == Algorithm::LNSGD || a == Algorithm::EulerMaruyama;
}

bool samples_one_row(Algorithm a) { return a == Algorithm::SGD || a == Algorithm::LNSGD; }

NoiseConfig NoiseConfig::make(double gamma, double Delta, Index n, std::uint64_t seed) {
  if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
  if (!(Delta >= 0.0)) throw ValidationError("Delta must be nonnegative");
  if (n < 1) throw ValidationError("n must be positive");
  NoiseConfig c;
  c.gamma = gamma;
  c.Delta = Delta;
  c.delta = gamma * Delta / static_cast<double>(n);
  c.seed = seed;
  return c;
}

IncrementStream::IncrementStream(std::uint64_t seed, Index n) : rng_(seed), n_(n) {}

void IncrementStream::next(Vec& z) {
  z.resize(n_);
  rng_.fill_normal(z);
}

IndexStream::IndexStream(std::uint64_t seed, Index n) : rng_(seed), n_(n) {}

Index IndexStream::next() { return static_cast<Index>(rng_.uniform_index(static_cast<std::uint64_t>(n_))); }

namespace {

// In-place update kernels with preallocated workspace; the public step
// functions and simulate share them so both paths give identical bits.
struct Kernel {
  const Problem& p;
  Mat Xt;  // rows of X as columns, for the single-sample updates
  Vec beta, r, g, nz;
  double c_full, c_noise, sq_em, gamma;

  Kernel(const Problem& prob, const NoiseConfig& cfg, bool need_rows)
      : p(prob),
        beta(prob.d),
        r(prob.n),
        g(prob.d),
        nz(prob.d),
        c_full(cfg.gamma / static_cast<double>(prob.n)),
        c_noise(std::sqrt(cfg.Delta)),
        sq_em(std::sqrt(cfg.delta * cfg.gamma)),
        gamma(cfg.gamma) {
    if (need_rows) Xt = prob.X.transpose();
  }

  void full(Vec& th, const Vec* z) {
    beta = th.cwiseAbs2();
    r.noalias() = p.X * beta;
    r -= p.y;
    if (z) r.noalias() -= c_noise * *z;
    g.noalias() = p.X.transpose() * r;
    th.array() -= c_full * g.array() * th.array();
  }

  void em(Vec& th, const Vec* z) {
    beta = th.cwiseAbs2();
    r.noalias() = p.Xn * beta;
    r -= p.yn;
    g.noalias() = p.Xn.transpose() * r;
    if (z) {
      nz.noalias() = p.Xn.transpose() * *z;
      th.array() = th.array() - gamma * g.array() * th.array() + sq_em * th.array() * nz.array();
    } else {
      th.array() -= gamma * g.array() * th.array();
    }
  }

  void single(Vec& th, Index i, double zi) {
    const auto xi = Xt.col(i);
    const double res = xi.dot(th.cwiseAbs2()) - p.y[i] - c_noise * zi;
    th.array() -= gamma * res * xi.array() * th.array();
  }
};

void check_theta(const Vec& theta, const Problem& p) {
  if (theta.size() != p.d) throw ValidationError("theta has wrong length");
}

void check_noise(const Vec& z, const Problem& p) {
  if (z.size() != p.n) throw ValidationError("noise vector must have n entries");
}

bool finite_state(const Vec& th) { return th.allFinite() && th.cwiseAbs().maxCoeff() < 1e150; }

void guard(const Vec& th) {
  if (!finite_state(th)) throw std::overflow_error("non-finite iterate");
}

}  // namespace

Vec lngd_step(const Vec& theta, const Problem& p, const NoiseConfig& cfg, const Vec& z) {
  check_theta(theta, p);
  check_noise(z, p);
  Kernel k(p, cfg, false);
  Vec th = theta;
  k.full(th, cfg.Delta > 0.0 ? &z : nullptr);
  guard(th);
  return th;
}

Vec lnsgd_step(const Vec& theta, const Problem& p, const NoiseConfig& cfg, Index i, const Vec& z) {
  check_theta(theta, p);
  check_noise(z, p);
  if (i < 0 || i >= p.n) throw ValidationError("sample index out of range");
  Kernel k(p, cfg, true);
  Vec th = theta;
  k.single(th, i, cfg.Delta > 0.0 ? z[i] : 0.0);
  guard(th);
  return th;
}

Vec gd_step(const Vec& theta, const Problem& p, const NoiseConfig& cfg) {
  NoiseConfig c = cfg;
  c.Delta = 0.0;
  c.delta = 0.0;
  return lngd_step(theta, p, c, Vec::Zero(p.n));
}

Vec sgd_step(const Vec& theta, const Problem& p, const NoiseConfig& cfg, Index i) {
  NoiseConfig c = cfg;
  c.Delta = 0.0;
  c.delta = 0.0;
  return lnsgd_step(theta, p, c, i, Vec::Zero(p.n));
}

Vec em_step(const Vec& theta, const Problem& p, const NoiseConfig& cfg, const Vec& z) {
  check_theta(theta, p);
  check_noise(z, p);
  Kernel k(p, cfg, false);
  Vec th = theta;
  k.em(th, cfg.delta > 0.0 ? &z : nullptr);
  guard(th);
  return th;
}

bool is_recorded(long j, const SimulateOptions& opt) {
  if (j == 0 || j == opt.num_steps) return true;
  if (opt.record_every > 0 && j % opt.record_every == 0) return true;
  if (opt.log_points_per_decade > 0 && j > 0) {
    const double ppd = opt.log_points_per_decade;
    const double k = std::round(ppd * std::log10(static_cast<double>(j)));
    if (std::llround(std::pow(10.0, k / ppd)) == j) return true;
  }
  return false;
}

Trajectory simulate(const Vec& theta0, const Problem& p, const NoiseConfig& cfg, Algorithm algo,
                    const SimulateOptions& opt) {
  check_theta(theta0, p);
  if (!theta0.allFinite()) throw ValidationError("theta0 must be finite");
  if (opt.num_steps < 0) throw ValidationError("num_steps must be nonnegative");
  Trajectory tr;
  tr.algorithm = algo;
  tr.cfg = cfg;
  tr.n = p.n;
  tr.d = p.d;
  const bool noisy = uses_label_noise(algo) && cfg.Delta > 0.0;
  const bool single = samples_one_row(algo);
  Kernel kern(p, cfg, single);
  IncrementStream noise(stream_seed(cfg.seed, 1), p.n);
  IndexStream rows(stream_seed(cfg.seed, 2), p.n);

  std::vector<double> th_rows;
  auto record = [&](long j, const Vec& th) {
    tr.steps.push_back(j);
    tr.times.push_back(static_cast<double>(j) * cfg.gamma);
    th_rows.insert(th_rows.end(), th.data(), th.data() + p.d);
  };

  // Recorded steps in increasing order, so the loop avoids evaluating the log grid.
  std::vector<long> grid;
  {
    std::vector<long> cand{0, opt.num_steps};
    if (opt.record_every > 0)
      for (long k = opt.record_every; k < opt.num_steps; k += opt.record_every) cand.push_back(k);
    if (opt.log_points_per_decade > 0)
      for (int k = 0;; ++k) {
        const long s = std::llround(std::pow(10.0, k / static_cast<double>(opt.log_points_per_decade)));
        if (s > opt.num_steps) break;
        cand.push_back(s);
      }
    std::sort(cand.begin(), cand.end());
    cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
    for (long s : cand)
      if (is_recorded(s, opt)) grid.push_back(s);
  }
  std::size_t next_rec = 1;

  Vec th = theta0, prev(p.d), z = Vec::Zero(p.n);
  if (noisy && opt.record_noise) tr.gaussians.reserve(static_cast<std::size_t>(opt.num_steps * p.n));
  record(0, th);
  long j = 0;
  for (; j < opt.num_steps; ++j) {
    prev = th;
    if (noisy) {
      noise.next(z);
      if (opt.record_noise) tr.gaussians.insert(tr.gaussians.end(), z.data(), z.data() + p.n);
    }
    switch (algo) {
      case Algorithm::GD:
        kern.full(th, nullptr);
        break;
      case Algorithm::LNGD:
        kern.full(th, noisy ? &z : nullptr);
        break;
      case Algorithm::EulerMaruyama:
        kern.em(th, noisy ? &z : nullptr);
        break;
      case Algorithm::SGD:
      case Algorithm::LNSGD: {
        const Index i = rows.next();
        if (opt.record_noise) tr.sample_index.push_back(i);
        kern.single(th, i, noisy ? z[i] : 0.0);
        break;
      }
    }
    if (!finite_state(th)) {
      tr.exploded = true;
      tr.explosion_step = j + 1;
      th = prev;
      break;
    }
    tr.zero_crossings += (prev.array() * th.array() < 0.0).count();
    if (algo == Algorithm::GD && opt.fast_forward_fixed_point && th == prev) {
      tr.fixed_point_step = j + 1;
      for (; next_rec < grid.size(); ++next_rec) record(grid[next_rec], th);
      j = opt.num_steps;
      break;
    }
    if (next_rec < grid.size() && grid[next_rec] == j + 1) {
      record(j + 1, th);
      ++next_rec;
    }
  }
  tr.steps_done = j;
  tr.theta_final = th;
  const Index R = tr.records();
  tr.theta = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      th_rows.data(), R, p.d);
  tr.beta = tr.theta.cwiseAbs2();
  return tr;
}

Vec draw_theta0(Index d, std::uint64_t seed, double lo, double hi) {
  Rng rng(stream_seed(seed, 0));
  Vec th(d);
  for (Index k = 0; k < d; ++k) th[k] = rng.uniform(lo, hi);
  return th;
}

double training_loss(const Problem& p, const Vec& theta) {
  return 0.5 * (p.X * theta.cwiseAbs2() - p.y).squaredNorm() / static_cast<double>(p.n);
}

}  // namespace lnoise

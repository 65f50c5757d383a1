#include "lnoise/harness.hpp"

#include "lnoise/svg.hpp"

#include <omp.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace lnoise {

namespace {

std::string join_algorithms(const std::vector<Algorithm>& a) {
  std::string s;
  for (std::size_t i = 0; i < a.size(); ++i) s += (i ? "," : "") + to_string(a[i]);
  return s;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw ValidationError(key + ": expected true/false, got '" + v + "'");
}

template <class T>
T parse_number(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    T out;
    if constexpr (std::is_same_v<T, double>) {
      out = std::stod(v, &pos);
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      out = std::stoull(v, &pos);
    } else {
      // accept 1e8 style integers
      const double x = std::stod(v, &pos);
      out = static_cast<T>(std::llround(x));
      if (static_cast<double>(out) != x) throw std::invalid_argument("not an integer");
    }
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return out;
  } catch (const std::exception&) {
    throw ValidationError(key + ": cannot parse '" + v + "'");
  }
}

}  // namespace

KeyValues ExperimentConfig::to_key_values() const {
  KeyValues kv;
  kv["n"] = std::to_string(n);
  kv["d"] = std::to_string(d);
  kv["s"] = std::to_string(s);
  kv["seed"] = std::to_string(seed);
  kv["amp_lo"] = format_double(amp_lo);
  kv["amp_hi"] = format_double(amp_hi);
  if (!problem_dir.empty()) kv["problem_dir"] = problem_dir;
  kv["algorithms"] = join_algorithms(algorithms);
  kv["gamma"] = format_double(gamma);
  kv["Delta"] = format_double(Delta);
  kv["delta"] = format_double(delta());
  kv["steps"] = std::to_string(steps);
  kv["record_every"] = std::to_string(record_every);
  kv["log_points_per_decade"] = std::to_string(log_points_per_decade);
  kv["theta_lo"] = format_double(theta_lo);
  kv["theta_hi"] = format_double(theta_hi);
  kv["verify_kkt"] = verify_kkt ? "true" : "false";
  kv["verify_envelopes"] = verify_envelopes ? "true" : "false";
  kv["verify_poincare"] = verify_poincare ? "true" : "false";
  kv["max_noise_values"] = std::to_string(max_noise_values);
  return kv;
}

void ExperimentConfig::apply(const KeyValues& kv) {
  for (const auto& [k, v] : kv) {
    if (k == "n") n = parse_number<Index>(k, v);
    else if (k == "d") d = parse_number<Index>(k, v);
    else if (k == "s") s = parse_number<Index>(k, v);
    else if (k == "seed") seed = parse_number<std::uint64_t>(k, v);
    else if (k == "amp_lo") amp_lo = parse_number<double>(k, v);
    else if (k == "amp_hi") amp_hi = parse_number<double>(k, v);
    else if (k == "problem_dir") problem_dir = v;
    else if (k == "algorithms") {
      algorithms.clear();
      std::istringstream in(v);
      std::string tok;
      while (std::getline(in, tok, ',')) algorithms.push_back(parse_algorithm(tok));
    } else if (k == "gamma") gamma = parse_number<double>(k, v);
    else if (k == "Delta") Delta = parse_number<double>(k, v);
    else if (k == "delta") {
      // derived; accepted only when consistent
    } else if (k == "steps") steps = parse_number<long>(k, v);
    else if (k == "record_every") record_every = parse_number<long>(k, v);
    else if (k == "log_points_per_decade") log_points_per_decade = parse_number<int>(k, v);
    else if (k == "theta_lo") theta_lo = parse_number<double>(k, v);
    else if (k == "theta_hi") theta_hi = parse_number<double>(k, v);
    else if (k == "verify_kkt") verify_kkt = parse_bool(k, v);
    else if (k == "verify_envelopes") verify_envelopes = parse_bool(k, v);
    else if (k == "verify_poincare") verify_poincare = parse_bool(k, v);
    else if (k == "max_noise_values") max_noise_values = parse_number<long>(k, v);
    else if (k == "out_dir") out_dir = v;
    else throw ValidationError("unknown config key '" + k + "'");
  }
  if (kv.count("delta")) {
    const double given = parse_number<double>("delta", kv.at("delta"));
    if (std::abs(given - delta()) > 1e-12 * std::max(1.0, std::abs(given))) {
      throw ValidationError("delta is derived as gamma*Delta/n and cannot be set independently");
    }
  }
}

void ExperimentConfig::validate() const {
  if (problem_dir.empty() && (n < 1 || s < 1 || s > n || n > d)) throw ValidationError("need 1 <= s <= n <= d");
  if (!(gamma > 0.0)) throw ValidationError("gamma must be positive");
  if (!(Delta >= 0.0)) throw ValidationError("Delta must be nonnegative");
  if (steps < 1) throw ValidationError("steps must be positive");
  if (record_every < 0) throw ValidationError("record_every must be nonnegative");
  if (algorithms.empty()) throw ValidationError("no algorithms selected");
  if (!(theta_lo > 0.0) || theta_hi < theta_lo) throw ValidationError("need 0 < theta_lo <= theta_hi");
}

AlgoMetrics terminal_metrics(Algorithm algo, const Vec& beta_T, const GroundTruth& gt, const LassoSolution& sol) {
  AlgoMetrics m;
  m.algorithm = algo;
  const Vec diff = beta_T - gt.beta_star;
  m.param_sq_error = diff.squaredNorm();
  m.linf_error = diff.cwiseAbs().maxCoeff();
  for (Index k : complement(gt.support, beta_T.size())) m.off_support_max = std::max(m.off_support_max, beta_T[k]);
  if (sol.regime == Regime::Standard) {
    for (Index k : gt.support) m.on_support_deviation = std::max(m.on_support_deviation, std::abs(beta_T[k] - sol.beta_hat[k]));
  } else {
    m.on_support_deviation = std::numeric_limits<double>::quiet_NaN();
  }
  return m;
}

Trajectory trajectory_from_table(const TrajectoryTable& t, const NoiseConfig& cfg, Index n,
                                 std::vector<double> gaussians) {
  if (t.steps.empty() || t.steps.front() != 0) throw ValidationError("trajectory must start at step 0");
  if (t.beta.minCoeff() < 0.0) throw ValidationError("trajectory contains negative beta");
  Trajectory tr;
  tr.algorithm = Algorithm::LNGD;
  tr.cfg = cfg;
  tr.n = n;
  tr.d = t.beta.cols();
  tr.steps = t.steps;
  tr.times = t.times;
  tr.beta = t.beta;
  tr.theta = t.beta.cwiseSqrt();
  tr.steps_done = t.steps.back();
  tr.theta_final = tr.theta.row(tr.records() - 1).transpose();
  if (!gaussians.empty() && gaussians.size() != static_cast<std::size_t>(tr.steps_done * n)) {
    throw ValidationError("noise file holds " + std::to_string(gaussians.size()) + " values, expected steps*n = " +
                          std::to_string(tr.steps_done * n));
  }
  tr.gaussians = std::move(gaussians);
  return tr;
}

namespace {

// Runs f and prefixes any error with the stage name, keeping the error type.
template <class F>
auto stage(const char* name, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ValidationError& e) {
    throw ValidationError(std::string(name) + ": " + e.what());
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(std::string(name) + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string(name) + ": " + e.what());
  } catch (const std::logic_error& e) {
    throw std::logic_error(std::string(name) + ": " + e.what());
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(name) + ": " + e.what());
  }
}

}  // namespace

RunReport run_experiment(const ExperimentConfig& cfg, std::vector<Trajectory>* keep) {
  stage("config", [&] { cfg.validate(); });
  const auto t0 = std::chrono::steady_clock::now();
  RunReport rep;
  Problem p;
  GroundTruth gt;
  stage("problem", [&] {
    if (!cfg.problem_dir.empty()) {
      StoredProblem sp = load_problem(cfg.problem_dir);
      if (!sp.truth) throw ValidationError("problem directory lacks a ground-truth support");
      p = std::move(sp.problem);
      gt = std::move(*sp.truth);
    } else {
      GeneratedInstance gi = generate_gaussian(cfg.n, cfg.d, cfg.s, cfg.seed, cfg.amp_lo, cfg.amp_hi);
      p = std::move(gi.problem);
      gt = std::move(gi.truth);
      rep.generator_attempts = gi.attempts;
    }
  });
  const bool write = !cfg.out_dir.empty();
  if (write) {
    stage("write problem", [&] {
      std::filesystem::create_directories(cfg.out_dir);
      write_key_values(cfg.out_dir + "/config.txt", cfg.to_key_values());
      save_problem(cfg.out_dir, p, &gt, cfg.seed);
    });
  }
  const NoiseConfig noise = NoiseConfig::make(cfg.gamma, cfg.Delta, p.n, cfg.seed);
  rep.delta = noise.delta;
  LassoSolution sol;
  stage("weighted lasso", [&] {
    if (noise.delta > 0.0) {
      sol = closed_form(p, gt, noise.delta);
    } else {
      Thresholds th = thresholds(p, gt);
      sol.delta_minus = th.delta_minus;
      sol.delta_plus = th.delta_plus;
      sol.regime = Regime::Untreated;
    }
    rep.regime = sol.regime;
    rep.delta_minus = sol.delta_minus;
    rep.delta_plus = sol.delta_plus;
    if (cfg.verify_kkt && sol.has_solution()) {
      KktResidual r = kkt_residual(p, sol.beta_hat, sol.mu_hat, noise.delta);
      rep.kkt_stationarity = r.stationarity_inf();
      rep.kkt_complementarity = r.complementarity;
      rep.kkt_ok = r.accepted(1e-8);
    }
  });

  const Vec theta0 = draw_theta0(p.d, cfg.seed, cfg.theta_lo, cfg.theta_hi);
  SimulateOptions opt;
  opt.num_steps = cfg.steps;
  opt.record_every = cfg.record_every;
  opt.log_points_per_decade = cfg.log_points_per_decade;
  opt.record_noise = cfg.steps * p.n <= cfg.max_noise_values;

  const std::size_t A = cfg.algorithms.size();
  std::vector<Trajectory> trajs(A);
  std::vector<double> walls(A, 0.0);
  std::vector<std::string> errors(A);
#pragma omp parallel for schedule(dynamic, 1)
  for (std::size_t i = 0; i < A; ++i) {
    try {
      const auto s0 = std::chrono::steady_clock::now();
      trajs[i] = simulate(theta0, p, noise, cfg.algorithms[i], opt);
      walls[i] = std::chrono::duration<double>(std::chrono::steady_clock::now() - s0).count();
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  }
  for (std::size_t i = 0; i < A; ++i)
    if (!errors[i].empty()) throw std::runtime_error("simulate " + to_string(cfg.algorithms[i]) + ": " + errors[i]);

  std::vector<TrajectoryTable> tables;
  if (write) {
    stage("write trajectories", [&] {
      for (const Trajectory& tr : trajs) {
        const std::string name = to_string(tr.algorithm);
        write_trajectory_csv(cfg.out_dir + "/traj_" + name + ".csv", tr);
        if (tr.has_noise()) write_noise_bin(cfg.out_dir + "/noise_" + name + ".bin", tr.gaussians);
        tables.push_back(TrajectoryTable{tr.steps, tr.times, tr.beta});
      }
    });
  }

  for (std::size_t i = 0; i < A; ++i) {
    const Trajectory& tr = trajs[i];
    AlgoMetrics m = terminal_metrics(tr.algorithm, tr.beta.row(tr.records() - 1).transpose(), gt, sol);
    m.steps_done = tr.steps_done;
    m.exploded = tr.exploded;
    m.explosion_step = tr.explosion_step;
    m.zero_crossings = tr.zero_crossings;
    m.wall_seconds = walls[i];
    rep.metrics.push_back(m);
  }

  if (cfg.verify_envelopes && sol.has_solution()) {
    stage("envelopes", [&] {
      for (const Trajectory& tr : trajs) {
        if (!(tr.algorithm == Algorithm::LNGD || tr.algorithm == Algorithm::EulerMaruyama)) continue;
        if (tr.zero_crossings > 0 || tr.exploded) {
          rep.envelopes_ok = false;
          continue;
        }
        const DualDecomposition dec = decompose_init(p, tr.beta.row(0).transpose());
        const DualConstants k = dual_constants(p, gt, sol, dec);
        const DualTrajectory dt = simulate_dual(tr, p, dec, k);
        if (sol.regime == Regime::Large) {
          BesselResult b = bessel_envelope(tr, dt, k, p);
          rep.envelopes.push_back(b.envelope);
          rep.envelopes.push_back(b.domination);
          rep.envelopes_ok = rep.envelopes_ok && b.envelope.violation_fraction() <= 0.01;
        } else {
          XiResult x = xi_process(dt, k, p.n);
          SupportEnvelopeResult se = support_envelopes(tr, sol, x.xi, k);
          rep.envelopes.insert(rep.envelopes.end(), {se.lower, se.upper, se.off_support, x.domination});
          rep.envelopes_ok = rep.envelopes_ok && se.lower.violation_fraction() <= 0.01 &&
                             se.upper.violation_fraction() <= 0.01 && se.off_support.violation_fraction() <= 0.01;
        }
      }
    });
  }

  if (cfg.verify_poincare && sol.regime == Regime::Standard) {
    stage("poincare", [&] {
      const DualDecomposition dec = decompose_init(p, theta0.cwiseAbs2());
      const DualConstants k = dual_constants(p, gt, sol, dec);
      const double relax = 1.0 / (k.a * k.rho);
      StationaryOptions so;
      so.gamma = 0.05 * relax;
      so.burn_in = 20.0 * relax;
      so.T = so.burn_in + 12000.0 * relax;
      so.thin = 20;
      so.seed = stream_seed(cfg.seed, 3);
      const PoincareResult pr = poincare_bound(stationary_R(k, p.n, so), p.n, sol.delta, k);
      rep.poincare_checked = true;
      rep.kappa_bound = pr.kappa_bound;
      rep.laplace_estimate = pr.laplace_estimate;
      for (const TailCheck& tc : pr.tail) rep.poincare_ok = rep.poincare_ok && tc.ok;
    });
  }

  if (write) {
    stage("write report", [&] {
      write_report_csv(cfg.out_dir + "/report.csv", rep);
      if (!rep.envelopes.empty()) write_envelope_csv(cfg.out_dir + "/envelope_report.csv", rep.envelopes);
      write_figure1(cfg.out_dir, cfg.algorithms, tables, gt);
      std::ofstream timing(cfg.out_dir + "/timing.txt");
      for (const AlgoMetrics& m : rep.metrics) timing << to_string(m.algorithm) << "_seconds=" << m.wall_seconds << '\n';
    });
  }
  rep.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (keep) *keep = std::move(trajs);
  return rep;
}

void write_report_csv(const std::string& path, const RunReport& rep) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot write " + path);
  f << "algorithm,steps,exploded,explosion_step,zero_crossings,param_sq_error,linf_error,off_support_max,"
       "on_support_deviation,regime,delta,delta_minus,delta_plus\n";
  for (const AlgoMetrics& m : rep.metrics) {
    f << to_string(m.algorithm) << ',' << m.steps_done << ',' << (m.exploded ? 1 : 0) << ',' << m.explosion_step << ','
      << m.zero_crossings << ',' << format_double(m.param_sq_error) << ',' << format_double(m.linf_error) << ','
      << format_double(m.off_support_max) << ',' << format_double(m.on_support_deviation) << ','
      << to_string(rep.regime) << ',' << format_double(rep.delta) << ',' << format_double(rep.delta_minus) << ','
      << format_double(rep.delta_plus) << '\n';
  }
}

void write_envelope_csv(const std::string& path, const std::vector<EnvelopeReport>& reps) {
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot write " + path);
  f << "bound_kind,checked_steps,violations,max_violation_ratio\n";
  for (const auto& r : reps)
    f << to_string(r.bound_kind) << ',' << r.checked_steps << ',' << r.violations << ','
      << format_double(r.max_violation_ratio) << '\n';
}

void write_figure1(const std::string& dir, const std::vector<Algorithm>& algos,
                   const std::vector<TrajectoryTable>& tables, const GroundTruth& gt) {
  static const char* colors[] = {"#d62728", "#ff7f0e", "#1f77b4", "#2ca02c", "#9467bd"};
  const Index d = gt.beta_star.size();
  const Support Sc = complement(gt.support, d);
  const Index on = gt.support.empty() ? 0 : gt.support.front();
  // Off-support coordinate: the largest terminal value among the noiseless runs,
  // which is where the label noise makes the visible difference.
  Index off = Sc.empty() ? 0 : Sc.front();
  double best = -1.0;
  for (std::size_t a = 0; a < algos.size(); ++a) {
    if (uses_label_noise(algos[a])) continue;
    const auto& t = tables[a];
    for (Index k : Sc)
      if (t.beta(t.beta.rows() - 1, k) > best) best = t.beta(t.beta.rows() - 1, k), off = k;
  }

  std::vector<Series> err, sup, offs;
  for (std::size_t a = 0; a < algos.size(); ++a) {
    const auto& t = tables[a];
    Series e{to_string(algos[a]), {}, {}, colors[a % 5]}, s = e, o = e;
    for (Index i = 0; i < t.beta.rows(); ++i) {
      const double x = t.times[static_cast<std::size_t>(i)];
      if (x <= 0.0) continue;
      e.x.push_back(x);
      e.y.push_back((t.beta.row(i).transpose() - gt.beta_star).squaredNorm());
      s.x.push_back(x);
      s.y.push_back(t.beta(i, on));
      o.x.push_back(x);
      o.y.push_back(t.beta(i, off));
    }
    err.push_back(std::move(e));
    sup.push_back(std::move(s));
    offs.push_back(std::move(o));
  }
  if (!tables.empty() && !gt.support.empty()) {
    const auto& ts = sup.front().x;
    sup.push_back(Series{"target", ts, std::vector<double>(ts.size(), gt.beta_star[on]), "#000000", true});
  }
  auto save = [&](const std::string& name, const std::vector<Series>& s, const std::string& title, const std::string& yl) {
    ChartOptions o;
    o.title = title;
    o.xlabel = "t = step * gamma";
    o.ylabel = yl;
    o.log_x = true;
    o.log_y = true;
    std::ofstream f(dir + "/" + name);
    f << line_chart_svg(s, o);
  };
  save("fig1_error.svg", err, "Parameter error", "||beta(t) - beta*||^2");
  save("fig1_support.svg", sup, "On-support coordinate " + std::to_string(on + 1), "beta_k(t)");
  save("fig1_offsupport.svg", offs, "Off-support coordinate " + std::to_string(off + 1), "beta_k(t)");
}

}  // namespace lnoise

#include "lnoise/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

using namespace lnoise;

namespace {

constexpr int kOk = 0;
constexpr int kValidation = 1;
constexpr int kVerification = 2;


int cmd_generate(Index n, Index d, std::optional<Index> s, std::uint64_t seed, double lo, double hi,
                 const std::string& out) {
  if (!s) throw ValidationError("--s is required");
  GeneratedInstance gi = generate_gaussian(n, d, *s, seed, lo, hi);
  save_problem(out, gi.problem, &gi.truth, seed);
  Thresholds th = thresholds(gi.problem, gi.truth);
  std::cout << "attempts=" << gi.attempts << "\ndelta_minus=" << format_double(th.delta_minus)
            << "\ndelta_plus=" << format_double(th.delta_plus) << '\n';
  for (const auto& r : gi.rejections) std::cerr << "rejected " << r << '\n';
  return kOk;
}

int cmd_simulate(const std::string& dir, const std::string& algo, double gamma, double Delta, long steps,
                 std::uint64_t seed, long record_every, const std::string& out, const std::string& noise_out) {
  StoredProblem sp = load_problem(dir);
  const NoiseConfig cfg = NoiseConfig::make(gamma, Delta, sp.problem.n, seed);
  SimulateOptions opt;
  opt.num_steps = steps;
  opt.record_every = record_every;
  opt.record_noise = !noise_out.empty();
  const Trajectory tr = simulate(draw_theta0(sp.problem.d, seed), sp.problem, cfg, parse_algorithm(algo), opt);
  write_trajectory_csv(out, tr);
  if (!noise_out.empty()) write_noise_bin(noise_out, tr.gaussians);
  std::cout << "steps_done=" << tr.steps_done << "\ndelta=" << format_double(cfg.delta)
            << "\nzero_crossings=" << tr.zero_crossings << "\nexploded=" << (tr.exploded ? 1 : 0) << '\n';
  if (tr.exploded) {
    std::cout << "explosion_step=" << tr.explosion_step << '\n';
    return kVerification;
  }
  return kOk;
}

int cmd_verify_kkt(const std::string& dir, double delta) {
  StoredProblem sp = load_problem(dir);
  if (!sp.truth) throw ValidationError("meta.txt with a support is required");
  const Problem& p = sp.problem;
  LassoSolution sol = closed_form(p, *sp.truth, delta);
  std::cout << "key,value\nregime," << to_string(sol.regime) << "\ndelta," << format_double(delta) << "\ndelta_minus,"
            << format_double(sol.delta_minus) << "\ndelta_plus," << format_double(sol.delta_plus) << '\n';
  if (!sol.has_solution()) {
    std::cerr << "delta lies in [delta_minus, delta_plus]; no closed form is available there\n";
    return kValidation;
  }
  KktResidual r = kkt_residual(p, sol.beta_hat, sol.mu_hat, delta);
  std::cout << "stationarity_inf," << format_double(r.stationarity_inf()) << "\ncomplementarity,"
            << format_double(r.complementarity) << "\nnonneg_violation," << format_double(r.nonneg_violation) << '\n';
  std::cout << "index,beta_hat,mu_hat\n";
  for (Index k = 0; k < p.d; ++k)
    std::cout << k + 1 << ',' << format_double(sol.beta_hat[k]) << ',' << format_double(sol.mu_hat[k]) << '\n';
  return r.accepted(1e-8) ? kOk : kVerification;
}

int cmd_verify(const std::string& dir, const std::string& traj, const std::string& noise, double gamma, double Delta,
               std::uint64_t seed, const std::string& out) {
  StoredProblem sp = load_problem(dir);
  if (!sp.truth) throw ValidationError("meta.txt with a support is required");
  const Problem& p = sp.problem;
  const NoiseConfig cfg = NoiseConfig::make(gamma, Delta, p.n, seed);
  if (!(cfg.delta > 0.0)) throw ValidationError("verification needs Delta > 0");
  std::vector<double> g;
  if (!noise.empty()) g = read_noise_bin(noise);
  Trajectory tr = trajectory_from_table(read_trajectory_csv(traj), cfg, p.n, std::move(g));
  LassoSolution sol = closed_form(p, *sp.truth, cfg.delta);
  if (!sol.has_solution()) throw ValidationError("delta lies in the untreated band");
  DualDecomposition dec = decompose_init(p, tr.beta.row(0).transpose());
  DualConstants k = dual_constants(p, *sp.truth, sol, dec);
  DualTrajectory dt = simulate_dual(tr, p, dec, k);
  std::vector<EnvelopeReport> reps;
  bool ok = true;
  if (sol.regime == Regime::Large) {
    BesselResult b = bessel_envelope(tr, dt, k, p);
    reps = {b.envelope, b.domination};
    ok = b.envelope.violation_fraction() <= 0.01;
  } else {
    XiResult x = xi_process(dt, k, p.n);
    SupportEnvelopeResult se = support_envelopes(tr, sol, x.xi, k);
    reps = {se.lower, se.upper, se.off_support, x.domination};
    ok = se.lower.violation_fraction() <= 0.01 && se.upper.violation_fraction() <= 0.01 &&
         se.off_support.violation_fraction() <= 0.01;
  }
  std::filesystem::create_directories(out);
  write_envelope_csv(out + "/envelope_report.csv", reps);
  {
    auto vec = [](const Vec& v) {
      std::string s;
      for (Index i = 0; i < v.size(); ++i) s += (i ? ";" : "") + format_double(v[i]);
      return s;
    };
    std::ofstream f(out + "/constants.csv");
    f << "name,value\n";
    f << "regime," << to_string(k.regime) << "\ndelta," << format_double(k.delta) << "\nc," << vec(k.c)
      << "\nv_hat," << vec(k.v_hat) << "\nv_inf," << vec(k.v_inf) << "\nu_star_prime," << vec(k.u_star_prime)
      << "\na," << format_double(k.a) << "\nOmega," << format_double(k.Omega) << "\nrho," << format_double(k.rho)
      << "\nb," << format_double(k.b) << "\nmu_min," << format_double(k.mu_min) << "\nc_min,"
      << format_double(k.c_min) << "\nC_off," << format_double(k.C_off) << "\nlemma_i_residual,"
      << format_double(k.lemma_i_residual) << "\nlemma_ii_residual," << format_double(k.lemma_ii_residual) << '\n';
  }
  for (const auto& r : reps)
    std::cout << to_string(r.bound_kind) << ": " << r.violations << "/" << r.checked_steps
              << " violations, max ratio " << r.max_violation_ratio << '\n';
  return ok ? kOk : kVerification;
}

int finish_report(const RunReport& rep) {
  for (const AlgoMetrics& m : rep.metrics) {
    std::cout << to_string(m.algorithm) << ": linf_error=" << m.linf_error << " (" << m.linf_error / std::sqrt(rep.delta)
              << " sqrt(delta)) off_support_max=" << m.off_support_max << (m.exploded ? " EXPLODED at step " + std::to_string(m.explosion_step) : "")
              << '\n';
  }
  std::cout << "regime=" << to_string(rep.regime) << " delta=" << rep.delta << " wall=" << rep.wall_seconds << "s\n";
  if (!rep.kkt_ok) std::cout << "KKT check failed\n";
  if (!rep.envelopes_ok) std::cout << "envelope check failed\n";
  if (rep.poincare_checked)
    std::cout << "kappa_bound=" << rep.kappa_bound << " laplace=" << rep.laplace_estimate
              << (rep.poincare_ok ? "" : " tail check failed") << '\n';
  return rep.kkt_ok && rep.envelopes_ok && rep.poincare_ok ? kOk : kVerification;
}

int cmd_report(const std::string& dir) {
  ExperimentConfig cfg;
  cfg.apply(read_key_values(dir + "/config.txt"));
  StoredProblem sp = load_problem(dir);
  if (!sp.truth) throw ValidationError("meta.txt with a support is required");
  const NoiseConfig noise = NoiseConfig::make(cfg.gamma, cfg.Delta, sp.problem.n, cfg.seed);
  RunReport rep;
  rep.delta = noise.delta;
  LassoSolution sol;
  if (noise.delta > 0.0) sol = closed_form(sp.problem, *sp.truth, noise.delta);
  rep.regime = sol.regime;
  rep.delta_minus = sol.delta_minus;
  rep.delta_plus = sol.delta_plus;
  std::vector<TrajectoryTable> tables;
  for (Algorithm a : cfg.algorithms) {
    TrajectoryTable t = read_trajectory_csv(dir + "/traj_" + to_string(a) + ".csv");
    AlgoMetrics m = terminal_metrics(a, t.beta.row(t.beta.rows() - 1).transpose(), *sp.truth, sol);
    m.steps_done = t.steps.back();
    m.exploded = m.steps_done < cfg.steps;
    rep.metrics.push_back(m);
    tables.push_back(std::move(t));
  }
  write_figure1(dir, cfg.algorithms, tables, *sp.truth);
  for (const AlgoMetrics& m : rep.metrics) {
    std::cout << to_string(m.algorithm) << ",param_sq_error=" << format_double(m.param_sq_error)
              << ",linf_error=" << format_double(m.linf_error) << ",off_support_max=" << format_double(m.off_support_max)
              << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Label-noise gradient dynamics and weighted-Lasso verification"};
  app.require_subcommand(1);

  Index n = 0, d = 0;
  std::optional<Index> s;
  std::uint64_t seed = 1;
  double amp_lo = 0.5, amp_hi = 1.5, gamma = 0.1, Delta = 1e-3, delta = 0.0;
  long steps = 200'000, record_every = 100;
  std::string out, problem, algo = "lngd", noise, traj, config;

  auto* gen = app.add_subcommand("generate", "Draw a Gaussian instance with a planted sparse vector");
  gen->add_option("--n", n, "samples")->required();
  gen->add_option("--d", d, "dimension")->required();
  gen->add_option("--s", s, "support size");
  gen->add_option("--seed", seed);
  gen->add_option("--amp-lo", amp_lo);
  gen->add_option("--amp-hi", amp_hi);
  gen->add_option("--out", out, "output directory")->required();

  auto* sim = app.add_subcommand("simulate", "Run one optimiser and write traj.csv / noise.bin");
  sim->add_option("--problem", problem, "directory with X.csv, y.csv, meta.txt")->required();
  sim->add_option("--algo", algo)->check(CLI::IsMember({"gd", "sgd", "lngd", "lnsgd", "em"}));
  sim->add_option("--gamma", gamma);
  sim->add_option("--Delta", Delta);
  sim->add_option("--steps", steps);
  sim->add_option("--seed", seed);
  sim->add_option("--record-every", record_every);
  sim->add_option("--out", out, "trajectory CSV")->required();
  sim->add_option("--noise", noise, "noise.bin path");

  auto* kkt = app.add_subcommand("verify-kkt", "Closed-form weighted Lasso solution and KKT residuals");
  kkt->add_option("--problem", problem)->required();
  kkt->add_option("--delta", delta)->required();

  auto* ver = app.add_subcommand("verify", "Dual replay and envelope checks for a recorded trajectory");
  ver->add_option("--problem", problem)->required();
  ver->add_option("--traj", traj)->required();
  ver->add_option("--noise", noise, "noise.bin; regenerated from --seed when omitted");
  ver->add_option("--gamma", gamma);
  ver->add_option("--Delta", Delta);
  ver->add_option("--seed", seed);
  ver->add_option("--out", out)->required();

  auto* rep = app.add_subcommand("report", "Recompute report metrics and plots from an experiment directory");
  rep->add_option("--dir", out)->required();

  ExperimentConfig fig;
  auto* f1 = app.add_subcommand("figure1", "Reproduce the four-optimiser sparse regression experiment");
  f1->add_option("--config", config, "key=value file applied before the flags");
  f1->add_option("--seed", seed);
  f1->add_option("--steps", steps);
  f1->add_option("--gamma", gamma);
  f1->add_option("--Delta", Delta);
  f1->add_option("--out", out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kValidation;
  }

  try {
    if (*gen) return cmd_generate(n, d, s, seed, amp_lo, amp_hi, out);
    if (*sim) return cmd_simulate(problem, algo, gamma, Delta, steps, seed, record_every, out, noise);
    if (*kkt) return cmd_verify_kkt(problem, delta);
    if (*ver) return cmd_verify(problem, traj, noise, gamma, Delta, seed, out);
    if (*rep) return cmd_report(out);
    if (*f1) {
      if (!config.empty()) fig.apply(read_key_values(config));
      if (f1->count("--seed")) fig.seed = seed;
      if (f1->count("--steps")) fig.steps = steps;
      if (f1->count("--gamma")) fig.gamma = gamma;
      if (f1->count("--Delta")) fig.Delta = Delta;
      fig.out_dir = out;
      return finish_report(run_experiment(fig));
    }
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kVerification;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const std::logic_error& e) {
    std::cerr << "verification failure: " << e.what() << '\n';
    return kVerification;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }
  return kValidation;
}

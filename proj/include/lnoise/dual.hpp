#pragma once

#include "lnoise/dynamics.hpp"
#include "lnoise/wlasso.hpp"

#include <string>
#include <vector>

namespace lnoise {

struct DualDecomposition {
  Vec u_star;
  Vec v0;
  /// ||Xn u_star||, zero up to rounding when Xn has full row rank.
  double residual_norm = 0.0;
};

/// log beta0 = u_star + Xn^T v0 with u_star in ker Xn (minimum-norm v0).
DualDecomposition decompose_init(const Problem& p, const Vec& beta0);

struct DualConstants {
  Regime regime = Regime::Untreated;
  double delta = 0.0;
  Vec c;
  // standard regime
  Vec v_hat;
  Vec v_inf;
  Vec u_star_prime;  // indexed like complement(support)
  Vec r_shift;       // Xn_S (Xn_S^T Xn_S)^{-1} [u_star]_S
  double a = 0.0;
  double Omega = 0.0;
  double rho = 0.0;
  double b = 0.0;
  double mu_min = 0.0;
  double C_off = 0.0;
  // large regime
  double c_min = 0.0;
  // operator norms used by the envelopes
  double norm_Xn = 0.0;
  double norm_XnS_T = 0.0;
  double norm_XnSc_T = 0.0;
  double lemma_i_residual = 0.0;
  double lemma_ii_residual = 0.0;
  Support support;
};

/// Throws std::logic_error when a structural identity fails beyond 1e-8.
DualConstants dual_constants(const Problem& p, const GroundTruth& gt, const LassoSolution& sol,
                             const DualDecomposition& dec);

/// F(t, v) = ||exp(Xn^T v + u* - c t)||_1.
double dual_potential(const Problem& p, const Vec& u_star, const Vec& c, double t, const Vec& v);
/// beta(t, v) = exp(Xn^T v + u* - c t).
Vec dual_beta(const Problem& p, const Vec& u_star, const Vec& c, double t, const Vec& v);

/// Replays the standard normal increments of a trajectory: the recorded ones
/// when present, otherwise the seeded stream that produced them.
class IncrementReplay {
 public:
  explicit IncrementReplay(const Trajectory& tr);
  IncrementReplay(const std::vector<double>* recorded, std::uint64_t seed, Index n);
  void next(Vec& z);

 private:
  const std::vector<double>* recorded_;
  std::size_t pos_ = 0;
  IncrementStream stream_;
  Index n_;
};

/// Increment of the scalar Brownian motion <q, dB>/||q||. When q = 0 the first
/// coordinate of dB is used instead and `degenerate` is set.
double radial_increment(const Vec& q, const Vec& dB, bool& degenerate);

struct RadialBrownian {
  std::vector<double> dW;
  long degenerate_steps = 0;
};

/// Path version of radial_increment over q(t_j) and dB_j.
RadialBrownian extract_radial_brownian(const std::vector<Vec>& q, const std::vector<Vec>& dB);

struct DualOptions {
  /// Per-step scalar series (Y, ||r||^2, dW) are always kept; vectors only at the
  /// trajectory's recorded steps.
  bool compute_residual = true;
};

struct DualTrajectory {
  std::vector<long> steps;  // same record grid as the primal trajectory
  std::vector<double> times;
  Mat vbar;      // shifted dual v(t) - 2 yn t, one row per record
  Mat w;         // noiseless flow from the same start
  Mat beta_rec;  // exp(Xn^T vbar + u* - c t)
  Mat r;         // residual process (standard regime)
  // per-step series, index j refers to time j*gamma
  std::vector<double> Y;       // ||vbar - w||^2
  std::vector<double> dW_vw;   // radial Brownian driving Y
  std::vector<double> r2;      // ||r||^2
  std::vector<double> dW_r;    // radial Brownian driving ||r||^2
  long degenerate_vw = 0;
  long degenerate_r = 0;
  bool exploded = false;
  double gamma = 0.0;
};

/// Euler-Maruyama for the dual process with the replayed increments, plus the
/// noiseless flow w. Requires a label-noise trajectory without zero crossings.
DualTrajectory simulate_dual(const Trajectory& tr, const Problem& p, const DualDecomposition& dec,
                             const DualConstants& k, const DualOptions& opt = {});

/// r(t) = vbar(t) - v_inf t - v_hat + r_shift.
Vec residual_process(const Vec& vbar, double t, const DualConstants& k);

enum class BoundKind { LargeNoiseThm2, SupportLower, SupportUpper, OffSupportThm3, BesselDomination, XiDomination };

std::string to_string(BoundKind b);

struct EnvelopeReport {
  BoundKind bound_kind = BoundKind::LargeNoiseThm2;
  long checked_steps = 0;
  long violations = 0;
  double max_violation_ratio = 0.0;

  double violation_fraction() const {
    return checked_steps ? static_cast<double>(violations) / static_cast<double>(checked_steps) : 0.0;
  }
};

struct BesselResult {
  std::vector<double> zeta;  // per step, zeta[j] at time j*gamma
  EnvelopeReport envelope;   // beta against the exponential bound, at records
  EnvelopeReport domination; // Y <= zeta, every step
  double terminal_beta_inf = 0.0;
};

/// Integrates dzeta = 4 n delta dt + 4 sqrt(delta zeta) dW from zero.
std::vector<double> integrate_zeta(const std::vector<double>& dW, Index n, double delta, double gamma);

BesselResult bessel_envelope(const Trajectory& tr, const DualTrajectory& dt, const DualConstants& k,
                             const Problem& p);

struct XiResult {
  std::vector<double> xi;  // per step
  EnvelopeReport domination;  // ||r||^2 <= xi, every step
  long floor_incidents = 0;
};

std::vector<double> integrate_xi(const std::vector<double>& dW, double xi0, const DualConstants& k, Index n,
                                 double gamma, long* floor_incidents = nullptr);

XiResult xi_process(const DualTrajectory& dt, const DualConstants& k, Index n);

struct SupportEnvelopeResult {
  EnvelopeReport lower;
  EnvelopeReport upper;
  EnvelopeReport off_support;
  double terminal_off_support_max = 0.0;
  double terminal_on_support_deviation = 0.0;  // ||beta_S(T) - beta_hat_S||_2
};

SupportEnvelopeResult support_envelopes(const Trajectory& tr, const LassoSolution& sol,
                                        const std::vector<double>& xi, const DualConstants& k);

// Potential of the residual comparison process.
double potential_V(const Vec& r, double a, double rho, double Omega);
Vec potential_grad(const Vec& r, double a, double rho, double Omega);
Mat potential_hessian(const Vec& r, double a, double rho, double Omega);

struct StationaryOptions {
  double gamma = 1e-2;
  double T = 0.0;
  double burn_in = 0.0;
  long thin = 10;
  std::uint64_t seed = 0;
};

/// Thinned samples of ||Rbar||^2 after burn-in, Rbar started at 0.
std::vector<double> stationary_R(const DualConstants& k, Index n, const StationaryOptions& opt);

struct TailCheck {
  double u = 0.0;
  double empirical = 0.0;
  double ci_low = 0.0;  // one-sided lower confidence limit of the empirical tail
  double bound = 0.0;
  bool ok = false;
};

struct PoincareResult {
  double sigma2 = 0.0;
  double kappa_bound = 0.0;
  double laplace_estimate = 0.0;
  std::vector<TailCheck> tail;
};

/// Needs at least 1e4 samples (ValidationError otherwise).
PoincareResult poincare_bound(const std::vector<double>& samples, Index n, double delta, const DualConstants& k,
                              const std::vector<double>& u_grid = {1, 2, 5, 10, 20});

struct CouplingResult {
  double sup_gap = 0.0;
  double terminal_gap = 0.0;
  /// 2 b / mu_min: the forcing 2b e^{-mu_min t} integrated over time.
  double cap = 0.0;
  /// b / mu_min, the tighter cap sometimes quoted; simulations exceed it.
  double half_cap = 0.0;
};

/// R and Rbar from r0 with shared increments.
CouplingResult couple_R_Rbar(const DualConstants& k, const Vec& r0, double T, double gamma, std::uint64_t seed);

/// Right-hand side of the Gronwall-type square-root bound.
double gronwall_bound(double mu_prime, double mu, double b, double u1, double t1, double t);

/// RK4 for u' = -2 mu' u + 2 b exp(-mu t) sqrt(u) on [t1, t2], clamping u at 0.
std::vector<double> gronwall_ode(double mu_prime, double mu, double b, double u1, double t1, double t2, long steps);

}  // namespace lnoise

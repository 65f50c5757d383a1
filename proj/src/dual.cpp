#include "lnoise/dual.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lnoise {

namespace {

double op_norm(const Mat& A) {
  if (A.size() == 0) return 0.0;
  return Eigen::JacobiSVD<Mat>(A).singularValues()[0];
}

Mat columns(const Mat& A, const Support& S) {
  Mat out(A.rows(), static_cast<Index>(S.size()));
  for (std::size_t j = 0; j < S.size(); ++j) out.col(static_cast<Index>(j)) = A.col(S[j]);
  return out;
}

Vec entries(const Vec& v, const Support& S) {
  Vec out(static_cast<Index>(S.size()));
  for (std::size_t j = 0; j < S.size(); ++j) out[static_cast<Index>(j)] = v[S[j]];
  return out;
}

}  // namespace

DualDecomposition decompose_init(const Problem& p, const Vec& beta0) {
  if (beta0.size() != p.d) throw ValidationError("beta0 has wrong length");
  if (!(beta0.minCoeff() > 0.0)) throw ValidationError("beta0 must be strictly positive");
  DualDecomposition dec;
  const Vec lb = beta0.array().log().matrix();
  Eigen::CompleteOrthogonalDecomposition<Mat> cod(p.Xn.transpose());
  dec.v0 = cod.solve(lb);
  dec.u_star = lb - p.Xn.transpose() * dec.v0;
  dec.residual_norm = (p.Xn * dec.u_star).norm();
  return dec;
}

DualConstants dual_constants(const Problem& p, const GroundTruth& gt, const LassoSolution& sol,
                             const DualDecomposition& dec) {
  if (!sol.has_solution()) throw ValidationError("no closed-form solution in the untreated band");
  DualConstants k;
  k.regime = sol.regime;
  k.delta = sol.delta;
  k.support = gt.support;
  k.c = sol.delta * p.hn - 2.0 * p.Xn.transpose() * p.yn;
  k.c_min = k.c.minCoeff();
  k.norm_Xn = op_norm(p.Xn);
  const Support Sc = complement(gt.support, p.d);
  if (sol.regime == Regime::Large || gt.support.empty()) {
    k.norm_XnS_T = 0.0;
    k.norm_XnSc_T = k.norm_Xn;
    k.v_inf = Vec::Zero(p.n);
    k.lemma_ii_residual = (k.c - sol.mu_hat).norm();
    if (k.lemma_ii_residual > 1e-8 * (1.0 + k.c.norm())) throw std::logic_error("c differs from mu_hat");
    return k;
  }
  const Support& S = gt.support;
  const Mat XS = columns(p.Xn, S);
  const Mat XSc = columns(p.Xn, Sc);
  k.norm_XnS_T = op_norm(XS);
  k.norm_XnSc_T = op_norm(XSc);
  const Mat G = XS.transpose() * XS;
  Eigen::LDLT<Mat> Gf(G);
  const Vec bS = entries(sol.beta_hat, S);
  if (!(bS.minCoeff() > 0.0)) throw std::logic_error("standard regime requires positive beta_hat on the support");
  k.v_hat = XS * Gf.solve(bS.array().log().matrix());
  k.v_inf = -2.0 * XS * bS;
  k.lemma_i_residual = (k.v_inf + 2.0 * XS * (XS.transpose() * k.v_hat).array().exp().matrix()).norm();
  k.lemma_ii_residual = (-p.Xn.transpose() * k.v_inf + k.c - sol.mu_hat).norm();
  const double scale = 1.0 + k.v_inf.norm() + sol.mu_hat.norm();
  if (k.lemma_i_residual > 1e-8 * scale || k.lemma_ii_residual > 1e-8 * scale) {
    throw std::logic_error("dual identities violated: " + std::to_string(k.lemma_i_residual) + ", " +
                           std::to_string(k.lemma_ii_residual));
  }
  k.r_shift = XS * Gf.solve(entries(dec.u_star, S));
  k.u_star_prime = XSc.transpose() * k.r_shift;
  k.a = bS.minCoeff();
  k.Omega = XS.colwise().norm().maxCoeff();
  k.rho = Eigen::SelfAdjointEigenSolver<Mat>(G, Eigen::EigenvaluesOnly).eigenvalues().minCoeff();
  k.b = 0.0;
  k.C_off = 0.0;
  k.mu_min = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < Sc.size(); ++j) {
    const Index kk = Sc[j];
    const double e = std::exp(p.Xn.col(kk).dot(k.v_hat) + dec.u_star[kk] - k.u_star_prime[static_cast<Index>(j)]);
    k.b += e * p.Xn.col(kk).norm();
    k.C_off = std::max(k.C_off, e);
    k.mu_min = std::min(k.mu_min, sol.mu_hat[kk]);
  }
  return k;
}

Vec dual_beta(const Problem& p, const Vec& u_star, const Vec& c, double t, const Vec& v) {
  return (p.Xn.transpose() * v + u_star - c * t).array().exp().matrix();
}

double dual_potential(const Problem& p, const Vec& u_star, const Vec& c, double t, const Vec& v) {
  return dual_beta(p, u_star, c, t, v).sum();
}

IncrementReplay::IncrementReplay(const Trajectory& tr)
    : IncrementReplay(tr.has_noise() ? &tr.gaussians : nullptr, stream_seed(tr.cfg.seed, 1), tr.n) {}

IncrementReplay::IncrementReplay(const std::vector<double>* recorded, std::uint64_t seed, Index n)
    : recorded_(recorded), stream_(seed, n), n_(n) {}

void IncrementReplay::next(Vec& z) {
  if (recorded_) {
    if (pos_ + static_cast<std::size_t>(n_) > recorded_->size()) throw ValidationError("recorded increments exhausted");
    z = Eigen::Map<const Vec>(recorded_->data() + pos_, n_);
    pos_ += static_cast<std::size_t>(n_);
  } else {
    stream_.next(z);
  }
}

double radial_increment(const Vec& q, const Vec& dB, bool& degenerate) {
  const double nq = q.norm();
  if (nq == 0.0 || !std::isfinite(nq)) {
    degenerate = true;
    return dB[0];
  }
  degenerate = false;
  return q.dot(dB) / nq;
}

RadialBrownian extract_radial_brownian(const std::vector<Vec>& q, const std::vector<Vec>& dB) {
  if (q.size() != dB.size()) throw ValidationError("q and dB must have the same length");
  RadialBrownian out;
  out.dW.reserve(q.size());
  for (std::size_t j = 0; j < q.size(); ++j) {
    bool deg = false;
    out.dW.push_back(radial_increment(q[j], dB[j], deg));
    out.degenerate_steps += deg;
  }
  return out;
}

Vec residual_process(const Vec& vbar, double t, const DualConstants& k) {
  return vbar - k.v_inf * t - k.v_hat + k.r_shift;
}

DualTrajectory simulate_dual(const Trajectory& tr, const Problem& p, const DualDecomposition& dec,
                             const DualConstants& k, const DualOptions& opt) {
  if (!uses_label_noise(tr.algorithm) || tr.algorithm == Algorithm::LNSGD) {
    throw ValidationError("dual replay needs a full-batch label-noise trajectory (lngd or em)");
  }
  if (tr.zero_crossings > 0) throw ValidationError("trajectory has zero crossings; the dual decomposition needs beta > 0");
  if (tr.exploded) throw ValidationError("trajectory exploded");
  const double gamma = tr.cfg.gamma;
  const double delta = tr.cfg.delta;
  if (std::abs(delta - k.delta) > 1e-12 * std::max(1.0, delta)) throw ValidationError("constants built for another delta");
  const bool with_r = opt.compute_residual && k.regime == Regime::Standard;
  const long N = tr.steps_done;
  const Index n = p.n;
  const Index d = p.d;

  DualTrajectory out;
  out.gamma = gamma;
  const Index R = tr.records();
  out.vbar.resize(R, n);
  out.w.resize(R, n);
  out.beta_rec.resize(R, d);
  if (with_r) out.r.resize(R, n);
  out.Y.reserve(static_cast<std::size_t>(N + 1));
  out.dW_vw.reserve(static_cast<std::size_t>(N));
  if (with_r) {
    out.r2.reserve(static_cast<std::size_t>(N + 1));
    out.dW_r.reserve(static_cast<std::size_t>(N));
  }

  IncrementReplay replay(tr);
  Vec v = dec.v0, w = dec.v0, z(n), dB(n), a(d), r(n), q(n);
  const double sg = std::sqrt(gamma);
  const double noise = 2.0 * std::sqrt(delta);
  Index rec = 0;
  for (long j = 0; j <= N; ++j) {
    const double t = static_cast<double>(j) * gamma;
    if (with_r) r = residual_process(v, t, k);
    q = v - w;
    out.Y.push_back(q.squaredNorm());
    if (with_r) out.r2.push_back(r.squaredNorm());
    if (rec < R && tr.steps[static_cast<std::size_t>(rec)] == j) {
      out.steps.push_back(j);
      out.times.push_back(t);
      out.vbar.row(rec) = v.transpose();
      out.w.row(rec) = w.transpose();
      out.beta_rec.row(rec) = dual_beta(p, dec.u_star, k.c, t, v).transpose();
      if (with_r) out.r.row(rec) = r.transpose();
      ++rec;
    }
    if (j == N) break;
    replay.next(z);
    dB = sg * z;
    bool deg = false;
    out.dW_vw.push_back(radial_increment(q, dB, deg));
    out.degenerate_vw += deg;
    if (with_r) {
      out.dW_r.push_back(radial_increment(r, dB, deg));
      out.degenerate_r += deg;
    }
    a = (p.Xn.transpose() * v + dec.u_star - k.c * t).array().exp().matrix();
    v.noalias() -= 2.0 * gamma * (p.Xn * a);
    v += noise * dB;
    a = (p.Xn.transpose() * w + dec.u_star - k.c * t).array().exp().matrix();
    w.noalias() -= 2.0 * gamma * (p.Xn * a);
    if (!v.allFinite() || !w.allFinite()) {
      out.exploded = true;
      break;
    }
  }
  out.vbar.conservativeResize(rec, n);
  out.w.conservativeResize(rec, n);
  out.beta_rec.conservativeResize(rec, d);
  if (with_r) out.r.conservativeResize(rec, n);
  return out;
}

std::string to_string(BoundKind b) {
  switch (b) {
    case BoundKind::LargeNoiseThm2:
      return "LargeNoiseThm2";
    case BoundKind::SupportLower:
      return "SupportLower";
    case BoundKind::SupportUpper:
      return "SupportUpper";
    case BoundKind::OffSupportThm3:
      return "OffSupportThm3";
    case BoundKind::BesselDomination:
      return "BesselDomination";
    case BoundKind::XiDomination:
      return "XiDomination";
  }
  return "";
}

namespace {

void tally(EnvelopeReport& rep, double ratio) {
  ++rep.checked_steps;
  if (ratio > 1.0) ++rep.violations;
  if (std::isnan(ratio)) {
    ++rep.violations;
    rep.max_violation_ratio = std::numeric_limits<double>::infinity();
    return;
  }
  rep.max_violation_ratio = std::max(rep.max_violation_ratio, ratio);
}

// Scalar domination a <= b, with a relative rounding allowance.
double domination_ratio(double a, double b) {
  if (a <= b * (1.0 + 1e-12) + 1e-300) return b > 0.0 ? a / b : 0.0;
  return b > 0.0 ? a / b : std::numeric_limits<double>::infinity();
}

}  // namespace

std::vector<double> integrate_zeta(const std::vector<double>& dW, Index n, double delta, double gamma) {
  std::vector<double> z(dW.size() + 1, 0.0);
  const double drift = 4.0 * static_cast<double>(n) * delta * gamma;
  for (std::size_t j = 0; j < dW.size(); ++j) {
    const double next = z[j] + drift + 4.0 * std::sqrt(delta * z[j]) * dW[j];
    z[j + 1] = std::max(next, 0.0);
  }
  return z;
}

BesselResult bessel_envelope(const Trajectory& tr, const DualTrajectory& dt, const DualConstants& k,
                             const Problem& p) {
  if (k.regime != Regime::Large) throw ValidationError("Bessel envelope applies to the large-noise regime");
  if (!(k.c_min > 0.0)) throw ValidationError("c_min must be positive");
  BesselResult out;
  out.envelope.bound_kind = BoundKind::LargeNoiseThm2;
  out.domination.bound_kind = BoundKind::BesselDomination;
  out.zeta = integrate_zeta(dt.dW_vw, p.n, tr.cfg.delta, tr.cfg.gamma);
  for (std::size_t j = 1; j < dt.Y.size(); ++j) tally(out.domination, domination_ratio(dt.Y[j], out.zeta[j]));
  const Vec beta0 = tr.beta.row(0).transpose();
  const double shift = 2.0 * k.norm_Xn * beta0.norm() / k.c_min;
  for (Index i = 0; i < tr.records(); ++i) {
    const long j = tr.steps[static_cast<std::size_t>(i)];
    if (static_cast<std::size_t>(j) >= out.zeta.size()) break;
    const double t = tr.times[static_cast<std::size_t>(i)];
    const double lead = k.norm_Xn * (std::sqrt(out.zeta[static_cast<std::size_t>(j)]) + shift);
    double worst = 0.0;
    for (Index c = 0; c < p.d; ++c) {
      const double log_bound = lead + std::log(beta0[c]) - k.c[c] * t;
      worst = std::max(worst, std::exp(std::log(tr.beta(i, c)) - log_bound));
    }
    tally(out.envelope, worst);
  }
  out.terminal_beta_inf = tr.beta.row(tr.records() - 1).cwiseAbs().maxCoeff();
  return out;
}

std::vector<double> integrate_xi(const std::vector<double>& dW, double xi0, const DualConstants& k, Index n,
                                 double gamma, long* floor_incidents) {
  constexpr double floor = 1e-300;
  std::vector<double> xi(dW.size() + 1);
  xi[0] = std::max(xi0, floor);
  long incidents = 0;
  const double nd = 4.0 * static_cast<double>(n) * k.delta;
  for (std::size_t j = 0; j < dW.size(); ++j) {
    const double x = xi[j];
    const double sx = std::sqrt(x);
    const double t = static_cast<double>(j) * gamma;
    const double drift = nd - 4.0 * k.a * k.rho * x / (1.0 + k.Omega * sx) + 4.0 * k.b * std::exp(-k.mu_min * t) * sx;
    double next = x + drift * gamma + 4.0 * std::sqrt(k.delta * x) * dW[j];
    if (next < floor) {
      next = floor;
      ++incidents;
    }
    xi[j + 1] = next;
  }
  if (floor_incidents) *floor_incidents = incidents;
  return xi;
}

XiResult xi_process(const DualTrajectory& dt, const DualConstants& k, Index n) {
  if (k.regime != Regime::Standard) throw ValidationError("xi process applies to the standard regime");
  if (dt.r2.empty()) throw ValidationError("dual trajectory has no residual series");
  if (n < 2) throw ValidationError("xi process needs n >= 2");
  if (!(dt.r2[0] > 0.0)) throw ValidationError("r(0) = 0 is excluded");
  XiResult out;
  out.domination.bound_kind = BoundKind::XiDomination;
  out.xi = integrate_xi(dt.dW_r, dt.r2[0], k, n, dt.gamma, &out.floor_incidents);
  for (std::size_t j = 1; j < dt.r2.size(); ++j) tally(out.domination, domination_ratio(dt.r2[j], out.xi[j]));
  return out;
}

SupportEnvelopeResult support_envelopes(const Trajectory& tr, const LassoSolution& sol,
                                        const std::vector<double>& xi, const DualConstants& k) {
  if (k.regime != Regime::Standard) throw ValidationError("support envelopes apply to the standard regime");
  SupportEnvelopeResult out;
  out.lower.bound_kind = BoundKind::SupportLower;
  out.upper.bound_kind = BoundKind::SupportUpper;
  out.off_support.bound_kind = BoundKind::OffSupportThm3;
  const Support Sc = complement(k.support, tr.d);
  for (Index i = 0; i < tr.records(); ++i) {
    const long j = tr.steps[static_cast<std::size_t>(i)];
    if (static_cast<std::size_t>(j) >= xi.size()) break;
    const double t = tr.times[static_cast<std::size_t>(i)];
    const double sx = std::sqrt(xi[static_cast<std::size_t>(j)]);
    double lo = 0.0, hi = 0.0, off = 0.0;
    for (Index c : k.support) {
      const double lb = std::log(tr.beta(i, c)) - std::log(sol.beta_hat[c]);
      lo = std::max(lo, std::exp(-k.norm_XnS_T * sx - lb));
      hi = std::max(hi, std::exp(lb - k.norm_XnS_T * sx));
    }
    const double logC = std::log(k.C_off);
    for (Index c : Sc) {
      const double log_bound = logC + k.norm_XnSc_T * sx - sol.mu_hat[c] * t;
      off = std::max(off, std::exp(std::log(tr.beta(i, c)) - log_bound));
    }
    tally(out.lower, lo);
    tally(out.upper, hi);
    if (!Sc.empty()) tally(out.off_support, off);
  }
  const Index last = tr.records() - 1;
  for (Index c : Sc) out.terminal_off_support_max = std::max(out.terminal_off_support_max, tr.beta(last, c));
  double dev = 0.0;
  for (Index c : k.support) dev += std::pow(tr.beta(last, c) - sol.beta_hat[c], 2);
  out.terminal_on_support_deviation = std::sqrt(dev);
  return out;
}

double potential_V(const Vec& r, double a, double rho, double Omega) {
  const double x = Omega * r.norm();
  return 2.0 * a * rho / (Omega * Omega) * (x - std::log1p(x));
}

Vec potential_grad(const Vec& r, double a, double rho, double Omega) {
  return 2.0 * a * rho * r / (1.0 + Omega * r.norm());
}

Mat potential_hessian(const Vec& r, double a, double rho, double Omega) {
  const Index n = r.size();
  const double nr = r.norm();
  const double s = 1.0 + Omega * nr;
  Mat H = s * Mat::Identity(n, n);
  if (nr > 0.0) H -= Omega * r * r.transpose() / nr;
  return 2.0 * a * rho / (s * s) * H;
}

std::vector<double> stationary_R(const DualConstants& k, Index n, const StationaryOptions& opt) {
  if (k.regime != Regime::Standard) throw ValidationError("stationary process needs standard-regime constants");
  if (opt.gamma <= 0.0 || opt.T <= opt.burn_in || opt.thin < 1) throw ValidationError("bad stationary options");
  Rng rng(opt.seed);
  Vec R = Vec::Zero(n), z(n);
  const long steps = static_cast<long>(std::llround(opt.T / opt.gamma));
  const long burn = static_cast<long>(std::llround(opt.burn_in / opt.gamma));
  const double sc = 2.0 * std::sqrt(k.delta * opt.gamma);
  std::vector<double> out;
  out.reserve(static_cast<std::size_t>((steps - burn) / opt.thin + 1));
  for (long j = 1; j <= steps; ++j) {
    rng.fill_normal(z);
    R += -opt.gamma * potential_grad(R, k.a, k.rho, k.Omega) + sc * z;
    if (j > burn && (j - burn) % opt.thin == 0) out.push_back(R.squaredNorm());
  }
  return out;
}

PoincareResult poincare_bound(const std::vector<double>& samples, Index n, double delta, const DualConstants& k,
                              const std::vector<double>& u_grid) {
  if (samples.size() < 10000) throw ValidationError("poincare_bound needs at least 1e4 samples");
  PoincareResult out;
  double s = 0.0;
  for (double x : samples) s += x;
  out.sigma2 = s / static_cast<double>(samples.size());
  out.kappa_bound = 13.0 * out.sigma2 / static_cast<double>(n);
  out.laplace_estimate = 13.0 * delta / (k.a * k.rho);
  const double N = static_cast<double>(samples.size());
  for (double u : u_grid) {
    TailCheck tc;
    tc.u = u;
    long cnt = 0;
    for (double x : samples) cnt += x >= u * delta;
    tc.empirical = static_cast<double>(cnt) / N;
    // Wilson score lower limit at z = 3.
    const double zq = 3.0, ph = tc.empirical;
    const double den = 1.0 + zq * zq / N;
    const double centre = ph + zq * zq / (2.0 * N);
    const double half = zq * std::sqrt(ph * (1.0 - ph) / N + zq * zq / (4.0 * N * N));
    tc.ci_low = std::max(0.0, (centre - half) / den);
    tc.bound = 6.0 * std::exp(-std::sqrt(u * delta / out.kappa_bound));
    tc.ok = tc.ci_low <= tc.bound;
    out.tail.push_back(tc);
  }
  return out;
}

CouplingResult couple_R_Rbar(const DualConstants& k, const Vec& r0, double T, double gamma, std::uint64_t seed) {
  if (k.regime != Regime::Standard) throw ValidationError("coupling needs standard-regime constants");
  const Index n = r0.size();
  Rng rng(seed);
  Vec R = r0, Rb = r0, z(n);
  const long steps = static_cast<long>(std::llround(T / gamma));
  const double sc = 2.0 * std::sqrt(k.delta * gamma);
  CouplingResult out;
  out.cap = 2.0 * k.b / k.mu_min;
  out.half_cap = k.b / k.mu_min;
  for (long j = 0; j < steps; ++j) {
    const double t = static_cast<double>(j) * gamma;
    rng.fill_normal(z);
    Vec gR = -potential_grad(R, k.a, k.rho, k.Omega);
    const double nr = R.norm();
    if (nr > 0.0) gR += 2.0 * k.b * std::exp(-k.mu_min * t) * R / nr;
    R += gamma * gR + sc * z;
    Rb += -gamma * potential_grad(Rb, k.a, k.rho, k.Omega) + sc * z;
    out.sup_gap = std::max(out.sup_gap, (R - Rb).norm());
  }
  out.terminal_gap = (R - Rb).norm();
  return out;
}

double gronwall_bound(double mu_prime, double mu, double b, double u1, double t1, double t) {
  const double dm = mu - mu_prime;
  return std::exp(-mu_prime * (t - t1)) * std::sqrt(u1) +
         b * std::exp(-mu_prime * t) / dm * (std::exp(-dm * t1) - std::exp(-dm * t));
}

std::vector<double> gronwall_ode(double mu_prime, double mu, double b, double u1, double t1, double t2, long steps) {
  auto f = [&](double t, double u) { return -2.0 * mu_prime * u + 2.0 * b * std::exp(-mu * t) * std::sqrt(std::max(u, 0.0)); };
  std::vector<double> u(static_cast<std::size_t>(steps) + 1);
  u[0] = u1;
  const double h = (t2 - t1) / static_cast<double>(steps);
  for (long j = 0; j < steps; ++j) {
    const double t = t1 + static_cast<double>(j) * h, x = u[static_cast<std::size_t>(j)];
    const double k1 = f(t, x);
    const double k2 = f(t + h / 2, x + h / 2 * k1);
    const double k3 = f(t + h / 2, x + h / 2 * k2);
    const double k4 = f(t + h, x + h * k3);
    u[static_cast<std::size_t>(j) + 1] = std::max(0.0, x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4));
  }
  return u;
}

}  // namespace lnoise

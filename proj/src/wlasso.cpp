#include "lnoise/wlasso.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <limits>

namespace lnoise {

std::string to_string(Regime r) {
  switch (r) {
    case Regime::Standard:
      return "standard";
    case Regime::Large:
      return "large";
    case Regime::Untreated:
      return "untreated";
  }
  return "untreated";
}

double wl_objective(const Problem& p, const Vec& beta, double delta) {
  if (beta.size() != p.d) throw ValidationError("beta has wrong length");
  if (beta.minCoeff() < 0.0) throw ValidationError("beta must be nonnegative");
  return (p.Xn * beta - p.yn).squaredNorm() + delta * p.hn.dot(beta);
}

namespace {

struct SupportBlocks {
  Mat XS;   // Xn restricted to S
  Vec hS;   // hn restricted to S
  Eigen::LDLT<Mat> G;  // XS^T XS
};

SupportBlocks blocks(const Problem& p, const Support& S) {
  SupportBlocks b;
  b.XS.resize(p.n, static_cast<Index>(S.size()));
  b.hS.resize(static_cast<Index>(S.size()));
  for (std::size_t j = 0; j < S.size(); ++j) {
    b.XS.col(static_cast<Index>(j)) = p.Xn.col(S[j]);
    b.hS[static_cast<Index>(j)] = p.hn[S[j]];
  }
  b.G.compute(b.XS.transpose() * b.XS);
  return b;
}

}  // namespace

Thresholds thresholds(const Problem& p, const GroundTruth& gt) {
  Thresholds t;
  t.delta_plus = 0.0;
  for (Index k = 0; k < p.d; ++k) {
    if (p.hn[k] > 0.0) t.delta_plus = std::max(t.delta_plus, 2.0 * p.Xn.col(k).dot(p.yn) / p.hn[k]);
  }
  if (gt.support.empty()) {
    t.delta_minus = std::numeric_limits<double>::infinity();
    t.delta_plus = 0.0;
    return t;
  }
  SupportBlocks b = blocks(p, gt.support);
  Vec q = b.G.solve(b.hS) / 2.0;
  t.delta_minus = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < gt.support.size(); ++j) {
    const double den = q[static_cast<Index>(j)];
    if (den <= 0.0) {
      t.unconstrained.push_back(gt.support[j]);
      continue;
    }
    t.delta_minus = std::min(t.delta_minus, gt.beta_star[gt.support[j]] / den);
  }
  return t;
}

LassoSolution closed_form(const Problem& p, const GroundTruth& gt, double delta) {
  if (!(delta > 0.0)) throw ValidationError("delta must be positive");
  Thresholds t = thresholds(p, gt);
  LassoSolution sol;
  sol.delta = delta;
  sol.delta_minus = t.delta_minus;
  sol.delta_plus = t.delta_plus;
  if (gt.support.empty()) {
    sol.regime = Regime::Large;
    sol.beta_hat = Vec::Zero(p.d);
    sol.mu_hat = delta * p.hn;
    return sol;
  }
  if (delta < t.delta_minus) {
    sol.regime = Regime::Standard;
    SupportBlocks b = blocks(p, gt.support);
    Vec g = b.G.solve(b.hS);
    Vec fit = b.XS * g;
    sol.beta_hat = Vec::Zero(p.d);
    for (std::size_t j = 0; j < gt.support.size(); ++j) {
      const Index k = gt.support[j];
      sol.beta_hat[k] = gt.beta_star[k] - delta * g[static_cast<Index>(j)] / 2.0;
    }
    sol.mu_hat = Vec::Zero(p.d);
    for (Index k : complement(gt.support, p.d)) {
      sol.mu_hat[k] = delta * (p.hn[k] - p.Xn.col(k).dot(fit));
    }
    return sol;
  }
  if (delta > t.delta_plus) {
    sol.regime = Regime::Large;
    sol.beta_hat = Vec::Zero(p.d);
    sol.mu_hat = delta * p.hn - 2.0 * p.Xn.transpose() * p.yn;
    return sol;
  }
  sol.regime = Regime::Untreated;
  return sol;
}

KktResidual kkt_residual(const Problem& p, const Vec& beta, const Vec& mu, double delta) {
  KktResidual r;
  r.stationarity = 2.0 * p.Xn.transpose() * (p.Xn * beta - p.yn) + delta * p.hn - mu;
  r.complementarity = mu.dot(beta);
  r.nonneg_violation = std::max({0.0, -beta.minCoeff(), -mu.minCoeff()});
  return r;
}

NumericSolution solve_numeric(const Problem& p, double delta, double tol, long max_iter, const Vec* init) {
  if (!(delta > 0.0)) throw ValidationError("delta must be positive");
  Mat A = p.Xn.transpose() * p.Xn;
  const double lmax = Eigen::SelfAdjointEigenSolver<Mat>(A, Eigen::EigenvaluesOnly).eigenvalues().maxCoeff();
  const double eta = 1.0 / (2.0 * lmax);
  Vec lin = delta * p.hn - 2.0 * p.Xn.transpose() * p.yn;
  NumericSolution out;
  out.beta = init ? *init : Vec::Ones(p.d);
  if (out.beta.size() != p.d) throw ValidationError("initial point has wrong length");
  out.beta = out.beta.cwiseMax(0.0);
  // Accelerated projected gradient with adaptive restart. Plain projected
  // gradient moves along the null space of Xn at speed eta*delta only.
  Vec grad(p.d), next(p.d), yk = out.beta, prev = out.beta;
  double t = 1.0;
  auto mapping_norm = [&](const Vec& x) {
    grad.noalias() = 2.0 * A * x;
    grad += lin;
    return (x - (x - eta * grad).cwiseMax(0.0)).norm() / eta;
  };
  for (long it = 0; it < max_iter; ++it) {
    out.iterations = it;
    out.projected_gradient_norm = mapping_norm(out.beta);
    if (out.projected_gradient_norm <= tol) {
      out.converged = true;
      return out;
    }
    grad.noalias() = 2.0 * A * yk;
    grad += lin;
    next = (yk - eta * grad).cwiseMax(0.0);
    if ((yk - next).dot(next - out.beta) > 0.0) {
      t = 1.0;
      next = (out.beta - eta * (2.0 * A * out.beta + lin)).cwiseMax(0.0);
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    prev.swap(out.beta);
    out.beta = next;
    yk = out.beta + ((t - 1.0) / t_next) * (out.beta - prev);
    t = t_next;
  }
  out.iterations = max_iter;
  return out;
}

}  // namespace lnoise

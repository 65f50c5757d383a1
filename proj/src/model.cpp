#include "lnoise/model.hpp"

#include "lnoise/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace lnoise {

bool AssumptionReport::domination_holds() const {
  return invertibility_ok && (a3_domination_margin.size() == 0 || a3_domination_margin.minCoeff() > 0.0);
}

Problem build_problem(Mat X, Vec y) {
  if (X.rows() != y.size()) {
    throw ValidationError("X has " + std::to_string(X.rows()) + " rows but y has " +
                          std::to_string(y.size()) + " entries");
  }
  if (X.rows() < 1) throw ValidationError("empty design");
  if (X.cols() < X.rows()) throw ValidationError("need d >= n");
  Problem p;
  p.n = X.rows();
  p.d = X.cols();
  const double sn = std::sqrt(static_cast<double>(p.n));
  p.h = X.colwise().squaredNorm().transpose();
  p.Xn = X / sn;
  p.yn = y / sn;
  p.hn = p.h / static_cast<double>(p.n);
  p.X = std::move(X);
  p.y = std::move(y);
  return p;
}

bool check_no_degenerate(const Problem& p) {
  for (Index k = 0; k < p.d; ++k) {
    if ((p.X.col(k).array() == 0.0).all()) return false;
  }
  return true;
}

NnlsResult nnls(const Mat& A, const Vec& b, int max_iter) {
  const Index m = A.cols();
  if (max_iter <= 0) max_iter = static_cast<int>(3 * m + 30);
  NnlsResult res;
  res.x = Vec::Zero(m);
  std::vector<bool> passive(m, false);
  const double tol = 10.0 * std::numeric_limits<double>::epsilon() * A.norm() * std::max<Index>(A.rows(), m);

  auto solve_passive = [&](Vec& z) {
    std::vector<Index> P;
    for (Index j = 0; j < m; ++j)
      if (passive[j]) P.push_back(j);
    z.setZero(m);
    if (P.empty()) return;
    Mat AP(A.rows(), static_cast<Index>(P.size()));
    for (std::size_t j = 0; j < P.size(); ++j) AP.col(static_cast<Index>(j)) = A.col(P[j]);
    Vec zp = AP.colPivHouseholderQr().solve(b);
    for (std::size_t j = 0; j < P.size(); ++j) z[P[j]] = zp[static_cast<Index>(j)];
  };

  Vec w = A.transpose() * (b - A * res.x);
  int it = 0;
  while (true) {
    Index best = -1;
    double wmax = tol;
    for (Index j = 0; j < m; ++j) {
      if (!passive[j] && w[j] > wmax) {
        wmax = w[j];
        best = j;
      }
    }
    if (best < 0) {
      res.converged = true;
      break;
    }
    if (++it > max_iter) break;
    passive[best] = true;
    Vec z;
    while (true) {
      solve_passive(z);
      bool feasible = true;
      for (Index j = 0; j < m; ++j)
        if (passive[j] && z[j] <= 0.0) feasible = false;
      if (feasible) break;
      double alpha = std::numeric_limits<double>::infinity();
      for (Index j = 0; j < m; ++j) {
        if (passive[j] && z[j] <= 0.0) alpha = std::min(alpha, res.x[j] / (res.x[j] - z[j]));
      }
      res.x += alpha * (z - res.x);
      for (Index j = 0; j < m; ++j) {
        if (passive[j] && res.x[j] <= tol) {
          passive[j] = false;
          res.x[j] = 0.0;
        }
      }
    }
    res.x = z;
    w = A.transpose() * (b - A * res.x);
  }
  res.iterations = it;
  res.residual_inf = (A * res.x - b).cwiseAbs().maxCoeff();
  return res;
}

bool check_nonneg_interpolator(const Problem& p, double tol) {
  NnlsResult r = nnls(p.X, p.y);
  if (!r.converged) throw ConvergenceError("nnls did not converge in " + std::to_string(r.iterations) + " iterations");
  return r.residual_inf <= tol;
}

Support complement(const Support& S, Index d) {
  std::vector<bool> in(d, false);
  for (Index k : S) in[k] = true;
  Support c;
  c.reserve(d - static_cast<Index>(S.size()));
  for (Index k = 0; k < d; ++k)
    if (!in[k]) c.push_back(k);
  return c;
}

namespace {

Mat columns(const Mat& A, const Support& S) {
  Mat out(A.rows(), static_cast<Index>(S.size()));
  for (std::size_t j = 0; j < S.size(); ++j) out.col(static_cast<Index>(j)) = A.col(S[j]);
  return out;
}

void check_support(const Support& S, Index d) {
  if (S.empty()) throw ValidationError("support must be nonempty");
  for (std::size_t j = 0; j < S.size(); ++j) {
    if (S[j] < 0 || S[j] >= d) throw ValidationError("support index out of range");
    if (j > 0 && S[j] <= S[j - 1]) throw ValidationError("support must be sorted and distinct");
  }
}

}  // namespace

double gram_conditioning(const Problem& p, const Support& S) {
  Mat XS = columns(p.X, S);
  Eigen::JacobiSVD<Mat> svd(XS.transpose() * XS);
  const Vec& sv = svd.singularValues();
  if (sv[0] <= 0.0) return 0.0;
  return sv[sv.size() - 1] / sv[0];
}

AssumptionReport domination_condition(const Problem& p, const Support& S) {
  check_support(S, p.d);
  AssumptionReport rep;
  rep.a2_no_degenerate_column = check_no_degenerate(p);
  rep.a3_candidate_support = S;
  rep.invertibility_ok = gram_conditioning(p, S) > 1e-10;
  if (!rep.invertibility_ok) return rep;
  Mat XS = columns(p.X, S);
  Support Sc = complement(S, p.d);
  Vec hS(static_cast<Index>(S.size()));
  for (std::size_t j = 0; j < S.size(); ++j) hS[static_cast<Index>(j)] = p.h[S[j]];
  Vec g = (XS.transpose() * XS).ldlt().solve(hS);
  Vec proj = XS * g;
  rep.a3_domination_margin.resize(static_cast<Index>(Sc.size()));
  for (std::size_t j = 0; j < Sc.size(); ++j) {
    rep.a3_domination_margin[static_cast<Index>(j)] = p.h[Sc[j]] - p.X.col(Sc[j]).dot(proj);
  }
  return rep;
}

GroundTruth ground_truth(const Problem& p, const Support& S, double tol) {
  GroundTruth gt;
  gt.beta_star = Vec::Zero(p.d);
  if (S.empty()) {
    if (p.y.cwiseAbs().maxCoeff() > 0.0) throw ValidationError("empty support requires y = 0");
    gt.domination_ok = true;
    gt.invertibility_ok = true;
    return gt;
  }
  if (static_cast<Index>(S.size()) > p.n) throw ValidationError("support larger than n");
  AssumptionReport rep = domination_condition(p, S);
  gt.invertibility_ok = rep.invertibility_ok;
  if (!rep.invertibility_ok) throw ValidationError("X_S^T X_S is singular");
  gt.domination_ok = rep.domination_holds();
  if (!gt.domination_ok) throw ValidationError("domination condition fails on the support");
  Mat XS = columns(p.X, S);
  Vec bS = (XS.transpose() * XS).ldlt().solve(XS.transpose() * p.y);
  if (bS.minCoeff() <= tol * std::max(1.0, bS.maxCoeff()))
    throw ValidationError("least-squares solution on the support is not positive");
  for (std::size_t j = 0; j < S.size(); ++j) gt.beta_star[S[j]] = bS[static_cast<Index>(j)];
  const double scale = std::max(1.0, p.yn.cwiseAbs().maxCoeff());
  if ((p.Xn * gt.beta_star - p.yn).cwiseAbs().maxCoeff() > tol * scale) {
    throw ValidationError("support does not interpolate the outputs");
  }
  gt.support = S;
  return gt;
}

GeneratedInstance generate_gaussian(Index n, Index d, Index s, std::uint64_t seed, double amp_lo,
                                    double amp_hi, int max_attempts) {
  if (n < 1 || s < 1 || s > n || n > d) throw ValidationError("need 1 <= s <= n <= d");
  if (!(amp_lo > 0.0) || amp_hi < amp_lo) throw ValidationError("need 0 < amplitude_lo <= amplitude_hi");
  Rng rng(seed);
  GeneratedInstance out;
  std::string last;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    Mat X(n, d);
    for (Index j = 0; j < d; ++j)
      for (Index i = 0; i < n; ++i) X(i, j) = rng.normal();
    std::vector<Index> idx(d);
    std::iota(idx.begin(), idx.end(), Index{0});
    for (Index k = 0; k < s; ++k) {
      Index j = k + static_cast<Index>(rng.uniform_index(static_cast<std::uint64_t>(d - k)));
      std::swap(idx[k], idx[j]);
    }
    Support S(idx.begin(), idx.begin() + s);
    std::sort(S.begin(), S.end());
    Vec planted = Vec::Zero(d);
    for (Index k : S) planted[k] = rng.uniform(amp_lo, amp_hi);
    Vec y = X * planted;
    Problem p = build_problem(std::move(X), std::move(y));
    out.attempts = attempt;
    if (!check_no_degenerate(p)) {
      last = "attempt " + std::to_string(attempt) + ": assumption 2 (degenerate column)";
      out.rejections.push_back(last);
      continue;
    }
    AssumptionReport rep = domination_condition(p, S);
    if (!rep.invertibility_ok) {
      last = "attempt " + std::to_string(attempt) + ": assumption 3 (singular Gram matrix)";
      out.rejections.push_back(last);
      continue;
    }
    if (!rep.domination_holds()) {
      last = "attempt " + std::to_string(attempt) + ": assumption 3 (domination margin " +
             std::to_string(rep.a3_domination_margin.minCoeff()) + ")";
      out.rejections.push_back(last);
      continue;
    }
    GroundTruth gt;
    try {
      gt = ground_truth(p, S);
    } catch (const ValidationError& e) {
      last = "attempt " + std::to_string(attempt) + ": assumption 1 (" + e.what() + ")";
      out.rejections.push_back(last);
      continue;
    }
    out.problem = std::move(p);
    out.truth = std::move(gt);
    return out;
  }
  throw ValidationError("generator exhausted " + std::to_string(max_attempts) + " attempts; last failure: " + last);
}

SupportEnumeration enumerate_supports(const Problem& p, double tol) {
  if (p.d > 20) throw ValidationError("enumeration limited to d <= 20");
  SupportEnumeration out;
  const double scale = std::max(1.0, p.yn.cwiseAbs().maxCoeff());
  const std::uint64_t total = std::uint64_t{1} << p.d;
  for (std::uint64_t mask = 1; mask < total; ++mask) {
    Support S;
    for (Index k = 0; k < p.d; ++k)
      if (mask & (std::uint64_t{1} << k)) S.push_back(k);
    if (static_cast<Index>(S.size()) > p.n) continue;
    if (gram_conditioning(p, S) <= 1e-10) continue;
    Mat XS = columns(p.X, S);
    Vec bS = (XS.transpose() * XS).ldlt().solve(XS.transpose() * p.y);
    // entries at rounding level mean the true interpolator has a smaller support
    if (bS.minCoeff() <= tol * std::max(1.0, bS.maxCoeff())) continue;
    if ((XS * bS - p.y).cwiseAbs().maxCoeff() / std::sqrt(static_cast<double>(p.n)) > tol * scale) continue;
    out.interpolating.push_back(S);
    if (domination_condition(p, S).domination_holds()) out.dominating.push_back(S);
  }
  return out;
}

}  // namespace lnoise

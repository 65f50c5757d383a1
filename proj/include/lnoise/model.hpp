#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lnoise {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;
/// Sorted, 0-based column indices.
using Support = std::vector<Index>;

/// Raised on malformed inputs (dimension mismatch, out-of-range arguments).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an iterative subroutine fails to converge.
class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Regression problem with its renormalised form.
 *
 * Rows of X are the data vectors. Xn = X/sqrt(n), yn = y/sqrt(n),
 * h = diag(X^T X) and hn = h/n.
 */
struct Problem {
  Mat X;
  Vec y;
  Vec h;
  Mat Xn;
  Vec yn;
  Vec hn;
  Index n = 0;
  Index d = 0;
};

struct GroundTruth {
  Support support;
  Vec beta_star;
  bool domination_ok = false;
  bool invertibility_ok = false;
};

struct AssumptionReport {
  bool a1_nonneg_interpolator = false;
  bool a2_no_degenerate_column = false;
  std::optional<Support> a3_candidate_support;
  /// h_{S^c} - X_{S^c}^T X_S (X_S^T X_S)^{-1} h_S, indexed like complement(S).
  Vec a3_domination_margin;
  bool invertibility_ok = false;

  bool domination_holds() const;
};

Problem build_problem(Mat X, Vec y);

bool check_no_degenerate(const Problem& p);

struct NnlsResult {
  Vec x;
  double residual_inf = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Lawson-Hanson active set method for min ||Ax - b||^2 subject to x >= 0.
NnlsResult nnls(const Mat& A, const Vec& b, int max_iter = 0);

/// True iff some beta >= 0 has ||X beta - y||_inf <= tol. Throws ConvergenceError
/// when the NNLS subroutine does not converge.
bool check_nonneg_interpolator(const Problem& p, double tol = 1e-8);

/// Columns not in S, in increasing order.
Support complement(const Support& S, Index d);

/// Smallest over largest singular value of the Gram matrix of the columns S.
double gram_conditioning(const Problem& p, const Support& S);

/// Margin of the domination condition on the complement of S.
AssumptionReport domination_condition(const Problem& p, const Support& S);

/// Least-squares interpolator on S. Throws ValidationError when S is not an
/// admissible ground-truth support (entry not above tol relative to the largest,
/// residual, degenerate Gram).
GroundTruth ground_truth(const Problem& p, const Support& S, double tol = 1e-10);

struct GeneratedInstance {
  Problem problem;
  GroundTruth truth;
  int attempts = 0;
  std::vector<std::string> rejections;
};

/**
 * Gaussian design with a planted nonnegative s-sparse vector.
 *
 * Draws are repeated until assumptions 1 to 3 hold on the planted support.
 * @param max_attempts retry budget; exhausting it throws ValidationError naming
 *        the last failed assumption.
 */
GeneratedInstance generate_gaussian(Index n, Index d, Index s, std::uint64_t seed,
                                    double amp_lo = 0.5, double amp_hi = 1.5,
                                    int max_attempts = 100);

struct SupportEnumeration {
  /// Invertible supports whose least-squares solution is positive and interpolates.
  std::vector<Support> interpolating;
  /// The subset of those that also pass the domination condition.
  std::vector<Support> dominating;
};

/// Brute force over every nonempty support of size <= n.
SupportEnumeration enumerate_supports(const Problem& p, double tol = 1e-10);

}  // namespace lnoise

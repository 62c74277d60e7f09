#pragma once

#include <Eigen/Core>

namespace bgi {

/// Column means of an n x p matrix.
Eigen::VectorXd column_means(const Eigen::MatrixXd& X);

/// Unbiased (n - 1) sample covariance of the rows of X.
Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& X);

/// Inverse of a symmetric PSD matrix with the ridge rule for ill-conditioned input:
/// when the condition number exceeds 1e12 the matrix is replaced by
/// S + 1e-8 * trace(S) / p * I (or 1e-8 * I when the trace is zero).
struct RegularizedInverse {
  Eigen::MatrixXd inverse;
  double condition = 1.0;
  double ridge = 0.0;
  bool ridged() const { return ridge > 0.0; }
};

inline constexpr double kMaxCondition = 1e12;
inline constexpr double kRidgeScale = 1e-8;

RegularizedInverse regularized_inverse(const Eigen::MatrixXd& S);

/// Largest over smallest eigenvalue; +inf when the smallest is not positive.
double condition_number(const Eigen::MatrixXd& S);

bool is_symmetric(const Eigen::MatrixXd& S, double tol = 1e-10);

}  // namespace bgi

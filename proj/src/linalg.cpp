#include "bgi/linalg.hpp"

#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include "bgi/error.hpp"

namespace bgi {

Eigen::VectorXd column_means(const Eigen::MatrixXd& X) {
  if (X.rows() == 0) throw ContractError("column_means: empty matrix");
  return X.colwise().mean().transpose();
}

Eigen::MatrixXd sample_covariance(const Eigen::MatrixXd& X) {
  if (X.rows() < 2) throw ContractError("sample_covariance: need at least two rows");
  const Eigen::RowVectorXd mean = X.colwise().mean();
  const Eigen::MatrixXd centered = X.rowwise() - mean;
  Eigen::MatrixXd S = (centered.transpose() * centered) / static_cast<double>(X.rows() - 1);
  return 0.5 * (S + S.transpose());
}

double condition_number(const Eigen::MatrixXd& S) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(S, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0)) return std::numeric_limits<double>::infinity();
  return hi / lo;
}

RegularizedInverse regularized_inverse(const Eigen::MatrixXd& S) {
  if (S.rows() != S.cols() || S.rows() == 0) throw ContractError("regularized_inverse: matrix must be square");
  if (!S.allFinite()) throw NumericalError("regularized_inverse: non-finite entries");
  RegularizedInverse out;
  out.condition = condition_number(S);
  Eigen::MatrixXd A = S;
  if (!(out.condition <= kMaxCondition)) {
    const double p = static_cast<double>(S.rows());
    const double tr = S.trace();
    out.ridge = tr > 0.0 ? kRidgeScale * tr / p : kRidgeScale;
    A.diagonal().array() += out.ridge;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) throw NumericalError("regularized_inverse: matrix not positive definite after ridge");
  out.inverse = llt.solve(Eigen::MatrixXd::Identity(S.rows(), S.cols()));
  out.inverse = 0.5 * (out.inverse + out.inverse.transpose());
  return out;
}

bool is_symmetric(const Eigen::MatrixXd& S, double tol) {
  if (S.rows() != S.cols()) return false;
  const double scale = std::max(1.0, S.cwiseAbs().maxCoeff());
  return (S - S.transpose()).cwiseAbs().maxCoeff() <= tol * scale;
}

}  // namespace bgi

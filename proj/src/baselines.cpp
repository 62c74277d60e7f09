#include "bgi/baselines.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <boost/math/distributions/normal.hpp>

#include "bgi/error.hpp"
#include "bgi/linalg.hpp"

namespace bgi {

double normal_quantile(double prob) {
  if (!(prob > 0.0 && prob < 1.0)) throw ContractError("normal quantile probability must lie in (0, 1)");
  return boost::math::quantile(boost::math::normal_distribution<double>(), prob);
}

double normal_cdf(double x) {
  if (std::isnan(x)) return x;
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  return boost::math::cdf(boost::math::normal_distribution<double>(), x);
}

namespace {

MatrixXd with_intercept(const MatrixXd& X, bool intercept) {
  if (!intercept) return X;
  MatrixXd D(X.rows(), X.cols() + 1);
  D.col(0).setOnes();
  D.rightCols(X.cols()) = X;
  return D;
}

double two_sided_p(double coef, double se) {
  if (se > 0.0) return 2.0 * (1.0 - normal_cdf(std::abs(coef / se)));
  return coef == 0.0 ? 1.0 : 0.0;
}

}  // namespace

VectorXd OlsFit::slopes() const { return intercept ? VectorXd(coefficients.tail(coefficients.size() - 1)) : coefficients; }

VectorXd OlsFit::slope_pvalues() const { return intercept ? VectorXd(pvalues.tail(pvalues.size() - 1)) : pvalues; }

VectorXd OlsFit::predict(const MatrixXd& X0) const {
  const Index p = coefficients.size() - (intercept ? 1 : 0);
  if (X0.cols() != p) throw ContractError("OLS predict: expected " + std::to_string(p) + " covariates");
  return with_intercept(X0, intercept) * coefficients;
}

OlsFit ols_fit(const MatrixXd& X, const VectorXd& Y, bool intercept) {
  if (X.rows() != Y.size()) throw ContractError("OLS: X and Y have different row counts");
  const MatrixXd D = with_intercept(X, intercept);
  const Index n = D.rows();
  const Index k = D.cols();
  if (n <= k) throw ContractError("OLS: need more observations than coefficients");
  OlsFit fit;
  fit.intercept = intercept;
  fit.n = n;
  MatrixXd A = D.transpose() * D;
  const VectorXd rhs = D.transpose() * Y;
  if (condition_number(A) > kMaxCondition) {
    const double tr = A.trace();
    const double ridge = tr > 0.0 ? kRidgeScale * tr / static_cast<double>(k) : kRidgeScale;
    A.diagonal().array() += ridge;
    fit.warnings.push_back("OLS design is rank deficient or ill-conditioned; added ridge " + format_double(ridge));
  }
  Eigen::LLT<MatrixXd> llt(A);
  if (llt.info() != Eigen::Success) throw NumericalError("OLS: normal equations are singular even after ridge");
  fit.coefficients = llt.solve(rhs);
  const VectorXd resid = Y - D * fit.coefficients;
  fit.sigma2 = resid.squaredNorm() / static_cast<double>(n - k);
  const MatrixXd inv = llt.solve(MatrixXd::Identity(k, k));
  fit.se = (fit.sigma2 * inv.diagonal().array()).max(0.0).sqrt();
  fit.pvalues.resize(k);
  for (Index j = 0; j < k; ++j) fit.pvalues(j) = two_sided_p(fit.coefficients(j), fit.se(j));
  return fit;
}

OlsFit ols_fit(const TrainingData& data, bool intercept) { return ols_fit(pooled_X(data), pooled_Y(data), intercept); }

MatrixXd ols_predict_interval(const OlsFit& fit, const MatrixXd& X0, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ContractError("alpha must lie in (0, 1)");
  const VectorXd yhat = fit.predict(X0);
  const double half = normal_quantile(1.0 - alpha / 2.0) * std::sqrt(fit.sigma2);
  MatrixXd out(yhat.size(), 2);
  out.col(0) = yhat.array() - half;
  out.col(1) = yhat.array() + half;
  return out;
}

VectorXd IvFit::slopes() const { return intercept ? VectorXd(coefficients.tail(coefficients.size() - 1)) : coefficients; }

VectorXd IvFit::predict(const MatrixXd& X0) const {
  const Index p = coefficients.size() - (intercept ? 1 : 0);
  if (X0.cols() != p) throw ContractError("IV predict: expected " + std::to_string(p) + " covariates");
  return with_intercept(X0, intercept) * coefficients;
}

IvFit two_stage_least_squares(const MatrixXd& R, const MatrixXd& Z, const VectorXd& Y) {
  if (R.rows() != Z.rows() || R.rows() != Y.size()) throw ContractError("2SLS: row counts differ");
  const Index n = R.rows();
  const Index k = R.cols();
  if (Z.cols() < k) {
    throw ContractError("instrument insufficient: " + std::to_string(Z.cols()) + " instruments for " +
                        std::to_string(k) + " regressors");
  }
  Eigen::ColPivHouseholderQR<MatrixXd> zqr(Z);
  if (zqr.rank() < k) throw ContractError("instrument insufficient: instrument matrix has rank " + std::to_string(zqr.rank()));
  // First stage: project the regressors on the instrument space.
  const MatrixXd fitted = Z * zqr.solve(R);
  Eigen::ColPivHouseholderQR<MatrixXd> fqr(fitted);
  if (fqr.rank() < k) throw ContractError("instrument insufficient: first stage is rank deficient");
  IvFit fit;
  fit.n_instruments = Z.cols();
  fit.coefficients = fqr.solve(Y);
  const VectorXd resid = Y - R * fit.coefficients;
  fit.sigma2 = n > k ? resid.squaredNorm() / static_cast<double>(n - k) : 0.0;
  const MatrixXd inv = (fitted.transpose() * fitted).ldlt().solve(MatrixXd::Identity(k, k));
  fit.se = (fit.sigma2 * inv.diagonal().array()).max(0.0).sqrt();
  return fit;
}

IvFit iv_fit(const TrainingData& data, bool intercept) {
  const MatrixXd X = pooled_X(data);
  const VectorXd Y = pooled_Y(data);
  const MatrixXd R = with_intercept(X, intercept);
  if (data.E == 1) {
    if (intercept || data.p > 1) {
      throw ContractError("instrument insufficient: a single environment identifies only the no-intercept, p = 1 model");
    }
    if (X.col(0).sum() == 0.0) throw ContractError("instrument insufficient: covariate mean is zero");
    IvFit fit = two_stage_least_squares(R, MatrixXd::Ones(X.rows(), 1), Y);
    fit.ratio_estimator = true;
    return fit;
  }
  MatrixXd Z = MatrixXd::Zero(data.m, data.E);
  Index r = 0;
  for (Index e = 0; e < data.E; ++e) {
    const Index ne = data.environments[static_cast<std::size_t>(e)].n();
    Z.block(r, e, ne, 1).setOnes();
    r += ne;
  }
  IvFit fit = two_stage_least_squares(R, Z, Y);
  fit.intercept = intercept;
  return fit;
}

MatrixXd iv_predict_interval(const IvFit& fit, const MatrixXd& X0, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ContractError("alpha must lie in (0, 1)");
  const VectorXd yhat = fit.predict(X0);
  const double half = normal_quantile(1.0 - alpha / 2.0) * std::sqrt(fit.sigma2);
  MatrixXd out(yhat.size(), 2);
  out.col(0) = yhat.array() - half;
  out.col(1) = yhat.array() + half;
  return out;
}

}  // namespace bgi

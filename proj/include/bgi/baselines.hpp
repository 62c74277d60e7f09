#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "bgi/core_model.hpp"

namespace bgi {

struct OlsFit {
  VectorXd coefficients;  // intercept first when present
  double sigma2 = 0;      // RSS / (n - k)
  VectorXd se;
  VectorXd pvalues;       // two-sided, normal approximation
  bool intercept = false;
  Index n = 0;
  std::vector<std::string> warnings;

  /// Slope coefficients (intercept removed).
  VectorXd slopes() const;
  VectorXd slope_pvalues() const;
  VectorXd predict(const MatrixXd& X0) const;
};

/// Least squares via the normal equations on a raw design.
OlsFit ols_fit(const MatrixXd& X, const VectorXd& Y, bool intercept);
/// Pools all environments.
OlsFit ols_fit(const TrainingData& data, bool intercept);

/// yhat0 +- z_{1 - alpha/2} * sigma_hat (predictive form, parameter uncertainty ignored).
MatrixXd ols_predict_interval(const OlsFit& fit, const MatrixXd& X0, double alpha);

struct IvFit {
  VectorXd coefficients;
  VectorXd se;
  double sigma2 = 0;
  bool intercept = false;
  bool ratio_estimator = false;
  Index n_instruments = 0;

  VectorXd slopes() const;
  VectorXd predict(const MatrixXd& X0) const;
};

/// Generic two-stage least squares: regressors R, instruments Z.
/// Throws ContractError("instrument insufficient") when Z has fewer columns than R.
IvFit two_stage_least_squares(const MatrixXd& R, const MatrixXd& Z, const VectorXd& Y);

/// 2SLS with environment dummies as instruments. For E = 1 without intercept this is the
/// ratio estimator mean(Y) / mean(X) (p = 1 only).
IvFit iv_fit(const TrainingData& data, bool intercept);

MatrixXd iv_predict_interval(const IvFit& fit, const MatrixXd& X0, double alpha);

/// Standard normal quantile.
double normal_quantile(double prob);
double normal_cdf(double x);

}  // namespace bgi

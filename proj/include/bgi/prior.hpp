#pragma once

#include <optional>

#include <Eigen/Core>

namespace bgi {

/// Hyperparameters of the hierarchical prior.
///
///   mu_e            ~ N(center, Sigma_mu),      center = grand_mu_hat unless overridden
///   w = (beta, K)   ~ N(0, tau^2 sigma_Y^2 I)   (or N(0, tau^2 I) with CoefScale::Absolute)
///   sigma_Y^2       ~ 1 / sigma_Y^2             (or inverse-gamma(a_y, b_y))
///   tau             ~ half-Cauchy(0, 1)         (or tau^2 fixed)
struct PriorSpec {
  enum class Tau { HalfCauchy, Fixed };
  enum class SigmaY { Jeffreys, InverseGamma };
  enum class MuCovariance { DiagonalHierarchical, Fixed, Lkj };
  enum class CoefScale { SigmaScaled, Absolute };

  Tau tau = Tau::HalfCauchy;
  double tau2_fixed = 1.0;

  SigmaY sigma_y = SigmaY::Jeffreys;
  double a_y = 1.0;
  double b_y = 1.0;

  MuCovariance mu_cov = MuCovariance::DiagonalHierarchical;
  Eigen::MatrixXd mu_cov_fixed;
  // Per-coordinate inverse-gamma on the scales of Sigma_mu (diagonal and LKJ modes).
  double a_mu = 1.0;
  double b_mu = 1.0;
  double lkj_eta = 2.0;

  std::optional<Eigen::VectorXd> mu_center;

  CoefScale coef_scale = CoefScale::SigmaScaled;

  /// Throws ContractError on non-positive shapes/rates or a non-SPD fixed matrix.
  void validate(Eigen::Index p) const;
};

}  // namespace bgi

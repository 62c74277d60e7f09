#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bgi/core_model.hpp"

namespace bgi {

/// One posterior draw.
///
/// sigmaY2 is the training residual variance of the likelihood; sigma_eps2 is the implied
/// invariant error variance Var(eps_Y) = sigmaY2 + K' Sigma_train^{-1} K, which is what the
/// test-domain noise scale S_0 is built from.
struct ParamDraw {
  VectorXd beta;  // p + intercept; intercept first when present
  VectorXd K;     // p, always on the covariance scale Cov(eps_Y, X)
  MatrixXd mu;    // E x p
  double sigmaY2 = 1.0;
  double sigma_eps2 = 1.0;
  double tau2 = 1.0;
  double aux_phi = 1.0;
  VectorXd mu_prior_scales;  // p, variances of Sigma_mu's diagonal
};

struct DiagnosticRow {
  std::string param;
  double rhat = 0.0;  // NaN when undefined
  double ess = 0.0;
  bool flagged = false;
};

/// Layout shared by every draw of a fit; determines scalar parameter names and order.
struct DrawLayout {
  Index p = 0;
  Index E = 0;
  bool intercept = true;

  Index beta_dim() const { return p + (intercept ? 1 : 0); }
  Index scalar_count() const;
  std::vector<std::string> scalar_names() const;
  /// Flattens in scalar_names() order.
  VectorXd flatten(const ParamDraw& d) const;
  ParamDraw unflatten(const VectorXd& v) const;
};

struct PosteriorSamples {
  DrawLayout layout;
  LikelihoodForm form = LikelihoodForm::RawCentered;
  std::vector<std::vector<ParamDraw>> chains;
  int n_chains = 0;
  int n_warmup = 0;
  int n_kept = 0;
  std::uint64_t base_seed = 0;
  std::vector<std::uint64_t> chain_seeds;
  std::vector<std::string> covariate_names;
  double rhat_threshold = 1.01;
  std::vector<DiagnosticRow> diagnostics;
  std::vector<std::string> warnings;
  /// Resolved configuration echo (JSON text) carried into every artifact.
  std::string config_json;

  Index total_draws() const;
  /// All draws merged by chain index.
  std::vector<ParamDraw> merged() const;
  /// Draws of one scalar parameter, one vector per chain.
  std::vector<VectorXd> scalar_chains(Index scalar_index) const;
  Index scalar_index(const std::string& name) const;
  /// N x (p + intercept) matrix of beta draws in merged order.
  MatrixXd beta_matrix() const;
};

}  // namespace bgi

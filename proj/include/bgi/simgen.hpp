#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "bgi/core_model.hpp"

namespace bgi {

/// Single training source with one confounder H:
///   H ~ N(0, sigma_H^2),  X = train_mean + 0.5 H + eps_X,  Y = X - 2 H + eps'_Y.
/// The test domain uses the same equations with X shifted by `shift`.
struct SingleSourceConfig {
  Index n1 = 500;
  Index n0 = 200;
  double sigma_H = 0.5;
  double noise_sd_x = 0.1;
  double noise_sd_y = 0.1;
  /// Mean of X in the training domain. Zero makes (beta, K) unidentifiable.
  double train_mean = 2.0;
  double shift = 3.0;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Multi-environment design with q hidden confounders:
///   V ~ N(mu_e, Sigma_V), X = V + Psi' H, Y = beta' X + phi' H + eps'_Y,
///   mu_{e,j} = 2j/p - 1 + u_{e,j}, u ~ Unif(-1, 1) frozen per dataset and redrawn per environment,
///   test V ~ N(mu0, Sigma_V + 0.5 I), mu0_j = 2j/p + 2 U_j, U ~ Unif(-1, 1).
struct MultiSourceConfig {
  Index n = 1000;  // total training size; each environment gets ceil(n / E)
  Index p = 2;
  Index q = 2;
  Index E = 0;     // 0 means p + 1
  Index n0 = 200;
  std::uint64_t seed = 1;
  bool intercept = true;
  std::optional<Eigen::VectorXd> beta;  // default all ones
  std::optional<Eigen::MatrixXd> psi;   // q x p, default iid N(0, 1)
  std::optional<Eigen::VectorXd> phi;   // q, default iid N(0, 1)

  Index environments() const { return E > 0 ? E : p + 1; }
  void validate() const;
};

struct GroundTruth {
  Eigen::VectorXd beta;
  Eigen::VectorXd K;     // Cov(eps_Y, X)
  double error_variance = 0;  // Var(eps_Y)
};

struct SimDataset {
  TrainingData train;
  TestCovariates test;
  Eigen::VectorXd test_y;
  GroundTruth truth;
  /// Frozen dataset-level draws (empty for the single-source design).
  Eigen::MatrixXd env_means;  // E x p
  Eigen::VectorXd test_mean;  // p
  Eigen::MatrixXd psi;
  Eigen::VectorXd phi;
  Eigen::MatrixXd u;          // E x p
  Eigen::VectorXd U;          // p
  /// Hidden confounder draws for the training rows (environment order), m x q; m x 1 for single source.
  Eigen::MatrixXd hidden;
  /// Manifest (JSON text) recording the config, seed and every frozen draw.
  std::string manifest_json;
};

SimDataset gen_single_source(const SingleSourceConfig& cfg, bool intercept = false);
SimDataset gen_multi_source(const MultiSourceConfig& cfg);

/// Sigma_V = 0.5 * 1 1' + 0.5 * I.
Eigen::MatrixXd sigma_v(Index p);

}  // namespace bgi

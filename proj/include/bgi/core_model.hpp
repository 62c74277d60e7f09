#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace bgi {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

/// How the confounding correction enters the training likelihood.
///
/// PrecisionWeighted: K' Sigma_e^{-1} (x - mu_e), so K is the invariant Cov(eps_Y, X).
/// RawCentered:       K' (x - mu_e); reported K is mapped back through the n-weighted Sigma_hat.
enum class LikelihoodForm { PrecisionWeighted, RawCentered };

const char* to_string(LikelihoodForm form);
LikelihoodForm likelihood_form_from_string(const std::string& s);

/// Observations from one training environment together with their plug-in moments.
struct EnvironmentData {
  int env_id = 0;
  std::string label;
  MatrixXd X;          // n_e x p, no intercept column
  VectorXd Y;          // n_e
  VectorXd mu_hat;     // column means of X
  MatrixXd sigma_hat;  // (n_e - 1) sample covariance of X

  Index n() const { return X.rows(); }
  Index p() const { return X.cols(); }
};

/// Builds an environment and its moments. Throws ParseError when n_e < 2.
EnvironmentData make_environment(int env_id, std::string label, MatrixXd X, VectorXd Y);

struct TrainingData {
  std::vector<EnvironmentData> environments;
  std::vector<std::string> covariate_names;
  Index p = 0;
  Index E = 0;
  Index m = 0;
  bool intercept = true;
  VectorXd grand_mu_hat;  // mean of the per-environment means
  std::vector<std::string> warnings;

  /// Number of columns of the coefficient block beta (p plus the intercept).
  Index beta_dim() const { return p + (intercept ? 1 : 0); }
  /// Dimension of w = (beta, K).
  Index coef_dim() const { return beta_dim() + p; }
};

/// Assembles TrainingData, reassigning env_id to position. Checks shared p and warns when
/// an intercept model has fewer than p + 1 environments.
TrainingData make_training_data(std::vector<EnvironmentData> environments, bool intercept,
                                std::vector<std::string> covariate_names = {});

/// Reads `env,x1,...,xp,y`. Environment labels map to dense ids in first-appearance order.
TrainingData load_training_csv(const std::filesystem::path& path, bool intercept);
TrainingData parse_training_csv(std::istream& in, bool intercept, const std::string& source = "<stream>");

/// Writes rows grouped by environment, values at 17 significant digits.
void write_training_csv(const TrainingData& data, std::ostream& out);
void write_training_csv(const TrainingData& data, const std::filesystem::path& path);

/// Pools all environments into one design (rows in environment order).
MatrixXd pooled_X(const TrainingData& data);
VectorXd pooled_Y(const TrainingData& data);

/// Unlabelled test-domain covariates with their plug-in moments.
struct TestCovariates {
  MatrixXd X0;
  VectorXd mu0_hat;
  MatrixXd sigma0_hat;

  Index n0() const { return X0.rows(); }
  Index p() const { return X0.cols(); }
};

TestCovariates make_test_covariates(MatrixXd X0);

/// A test CSV: covariates plus the optional `y` column used only for coverage evaluation.
struct TestTable {
  TestCovariates covariates;
  std::optional<VectorXd> truth;
  std::vector<std::string> covariate_names;
};

TestTable load_test_csv(const std::filesystem::path& path);
TestTable parse_test_csv(std::istream& in, const std::string& source = "<stream>");
void write_test_csv(const TestCovariates& test, const VectorXd* truth, std::ostream& out);
void write_test_csv(const TestCovariates& test, const VectorXd* truth,
                    const std::filesystem::path& path);

/// One row of the BGI design: [1 (if intercept), x, Sigma_e^{-1} (x - mu_e)].
/// With RawCentered the last block is (x - mu_e). `draw_mu` is E x p.
VectorXd design_row(const VectorXd& x, Index env, const MatrixXd& draw_mu, const MatrixXd& sigma_hat,
                    bool intercept, LikelihoodForm form = LikelihoodForm::RawCentered);

/// Stacked design over all training rows (environment order), evaluated at `draw_mu`.
MatrixXd design_matrix(const TrainingData& data, const MatrixXd& draw_mu,
                       LikelihoodForm form = LikelihoodForm::RawCentered);

/// E x p matrix of the empirical environment means.
MatrixXd empirical_means(const TrainingData& data);

/// printf("%.17g") formatting used by every CSV writer.
std::string format_double(double v);

}  // namespace bgi

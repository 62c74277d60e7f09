#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "bgi/core_model.hpp"
#include "bgi/posterior.hpp"
#include "bgi/prior.hpp"
#include "bgi/random.hpp"

namespace bgi {

struct SamplerConfig {
  int n_chains = 4;
  int n_warmup = 1000;
  int n_kept = 1000;
  std::uint64_t base_seed = 1;
  LikelihoodForm likelihood_form = LikelihoodForm::RawCentered;
  /// Initial random-walk step for the LKJ Sigma_mu block (only used in that mode).
  double mh_step = 0.1;
  double rhat_threshold = 1.01;
  /// Worker threads for chains; 0 picks min(n_chains, hardware threads).
  int threads = 0;
  /// Extra Metropolis move on the environment means with the coefficients integrated out.
  bool collapsed_moves = true;

  void validate() const;
  /// Chain c runs with base_seed + c.
  std::uint64_t chain_seed(int chain) const { return base_seed + static_cast<std::uint64_t>(chain); }
};

/// Random-walk Metropolis kernel for Sigma_mu = diag(s) R diag(s) with R ~ LKJ(eta) and
/// s_j^2 ~ inverse-gamma(a, b), on the unconstrained (atanh of canonical partial correlations,
/// log s^2) parameterization. The step size adapts only when asked to (warmup).
class LkjScaleSampler {
 public:
  LkjScaleSampler(Index p, double eta, double a, double b, double step);

  /// One Metropolis step given the E x p deviations mu_e - center.
  void step(Rng& rng, const MatrixXd& deviations, bool adapt);

  MatrixXd covariance() const;
  MatrixXd correlation() const;
  VectorXd scales2() const;
  double log_target(const VectorXd& theta, const MatrixXd& deviations) const;
  double step_size() const { return step_; }
  double acceptance_rate() const;

 private:
  MatrixXd corr_cholesky(const VectorXd& theta) const;

  Index p_;
  double eta_, a_, b_, step_;
  VectorXd theta_;  // p(p-1)/2 atanh-CPCs followed by p log-scales
  long proposals_ = 0;
  long accepted_ = 0;
};

/// Mutable state of one chain.
struct ChainState {
  VectorXd w;   // (beta, K)
  MatrixXd mu;  // E x p
  double sigma2 = 1.0;
  double tau2 = 1.0;
  double phi = 1.0;
  VectorXd s2_mu;         // diagonal of Sigma_mu in hierarchical mode
  MatrixXd mu_prior_prec; // current Sigma_mu^{-1}
};

/// Metropolis-within-Gibbs chain over (beta, K), {mu_e}, sigma_Y^2, (tau^2, phi), Sigma_mu.
/// All data enter through per-environment sufficient statistics.
class GibbsChain {
 public:
  GibbsChain(const TrainingData& data, const PriorSpec& prior, LikelihoodForm form,
             std::uint64_t seed, double mh_step = 0.1);

  /// One full sweep in the order: collapsed mean move, coefficients, environment means,
  /// sigma_Y^2, tau^2/phi, Sigma_mu.
  void sweep(bool warmup = false);

  void set_collapsed_moves(bool on) { collapsed_moves_ = on; }
  double collapsed_acceptance() const;
  /// Log-density of mu (all rows) given sigma_Y^2, tau^2, Sigma_mu with w integrated out, up to a constant.
  double collapsed_log_target(const MatrixXd& mu) const;

  void update_coefficients();
  /// Random-walk Metropolis on each mu_e with (beta, K) integrated out; breaks the strong
  /// posterior coupling between the means and the coefficients.
  void update_env_means_collapsed();
  void update_env_means();
  void update_sigma();
  void update_tau();
  void update_mu_prior(bool adapt = false);

  /// Replaces the data (same E, p, intercept) keeping the current state.
  void set_data(const TrainingData& data);

  /// Log-density of each model block at the current state; throws NumericalError naming the
  /// first non-finite block.
  void check_finite() const;

  ParamDraw draw() const;
  const ChainState& state() const { return state_; }
  ChainState& mutable_state() { return state_; }
  Rng& rng() { return rng_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Conditional-posterior parameters, exposed for verification.
  struct Gaussian {
    VectorXd mean;
    MatrixXd precision;
  };
  Gaussian coefficient_conditional() const;
  Gaussian env_mean_conditional(Index e) const;
  /// (shape, scale) of the inverse-gamma conditionals.
  std::pair<double, double> sigma_conditional() const;
  std::pair<double, double> tau_conditional() const;
  std::pair<double, double> phi_conditional() const;
  std::pair<double, double> mu_scale_conditional(Index j) const;

  Index coef_dim() const { return d_; }
  double residual_sum_squares() const;

 private:
  struct EnvStats {
    double n = 0;
    MatrixXd x_prec;  // regularised Sigma_hat_e^{-1}
    MatrixXd kmap;    // x_prec or I
    MatrixXd szz;     // sum z z', z = [1; x]
    VectorXd szy;     // sum z y
    double syy = 0;
  };

  void load_stats(const TrainingData& data);
  MatrixXd env_map(Index e, const MatrixXd& mu) const;
  void accumulate_normal_equations(const MatrixXd& mu, MatrixXd& G, VectorXd& b) const;
  void accumulate_normal_equations(MatrixXd& G, VectorXd& b) const { accumulate_normal_equations(state_.mu, G, b); }
  double coef_prior_precision() const;
  void warn(const std::string& msg);

  PriorSpec prior_;
  LikelihoodForm form_;
  Index p_ = 0, E_ = 0, q_ = 0, d_ = 0;
  double m_ = 0;
  std::vector<EnvStats> env_;
  VectorXd center_;
  MatrixXd k_quad_;  // maps K to the quadratic form giving Var(eps_Y) - sigma_Y^2
  ChainState state_;
  Rng rng_;
  std::optional<LkjScaleSampler> lkj_;
  std::vector<std::string> warnings_;
  bool collapsed_moves_ = true;
  long collapsed_proposals_ = 0;
  long collapsed_accepted_ = 0;
};

/// Runs cfg.n_chains independent chains and returns kept draws plus diagnostics.
PosteriorSamples fit(const TrainingData& data, const PriorSpec& prior, const SamplerConfig& cfg);

/// Summary of one identifiability-sweep point.
struct SweepRow {
  double lambda = 0;
  double beta_mean = 0;
  double beta_sd = 0;
  double prior_sd = 0;
};

struct SingleSourceConfig;

/// Refits the single-source scenario with its covariate mean scaled by each lambda
/// (same seed, so the noise is shared across the grid).
std::vector<SweepRow> identifiability_sweep(const std::vector<double>& lambdas,
                                            const SingleSourceConfig& base, const PriorSpec& prior,
                                            const SamplerConfig& cfg);

/// Prior used by the sweep: N(0, 1) on every coefficient, independent of sigma_Y.
PriorSpec sweep_prior();

}  // namespace bgi

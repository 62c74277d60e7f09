#include "bgi/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <set>
#include <thread>

#include <json.hpp>

#include "bgi/diagnostics.hpp"
#include "bgi/error.hpp"
#include "bgi/experiments.hpp"
#include "bgi/linalg.hpp"
#include "bgi/simgen.hpp"

namespace bgi {

namespace {

constexpr double kLog2Pi = 1.8378770664093453;

double log_inv_gamma(double x, double shape, double scale) {
  return shape * std::log(scale) - std::lgamma(shape) - (shape + 1.0) * std::log(x) - scale / x;
}

}  // namespace

void SamplerConfig::validate() const {
  if (n_chains < 1) throw ContractError("sampler: n_chains must be at least 1");
  if (n_kept < 1) throw ContractError("sampler: n_kept must be at least 1");
  if (n_warmup < 0) throw ContractError("sampler: n_warmup must be non-negative");
  if (!(mh_step > 0.0)) throw ContractError("sampler: Metropolis step must be positive");
  if (!(rhat_threshold > 1.0)) throw ContractError("sampler: R-hat threshold must exceed 1");
  if (threads < 0) throw ContractError("sampler: threads must be non-negative");
}

// ---------------------------------------------------------------------------
// LKJ block

LkjScaleSampler::LkjScaleSampler(Index p, double eta, double a, double b, double step)
    : p_(p), eta_(eta), a_(a), b_(b), step_(step), theta_(VectorXd::Zero(p * (p - 1) / 2 + p)) {}

MatrixXd LkjScaleSampler::corr_cholesky(const VectorXd& theta) const {
  MatrixXd L = MatrixXd::Zero(p_, p_);
  L(0, 0) = 1.0;
  Index k = 0;
  for (Index i = 1; i < p_; ++i) {
    double used = 0.0;
    for (Index j = 0; j < i; ++j) {
      const double z = std::tanh(theta(k++));
      L(i, j) = z * std::sqrt(std::max(0.0, 1.0 - used));
      used += L(i, j) * L(i, j);
    }
    L(i, i) = std::sqrt(std::max(0.0, 1.0 - used));
  }
  return L;
}

MatrixXd LkjScaleSampler::correlation() const {
  const MatrixXd L = corr_cholesky(theta_);
  return L * L.transpose();
}

VectorXd LkjScaleSampler::scales2() const {
  return theta_.tail(p_).array().exp();
}

MatrixXd LkjScaleSampler::covariance() const {
  const VectorXd s = scales2().array().sqrt();
  return s.asDiagonal() * correlation() * s.asDiagonal();
}

double LkjScaleSampler::log_target(const VectorXd& theta, const MatrixXd& deviations) const {
  const Index nc = p_ * (p_ - 1) / 2;
  double lp = 0.0;
  Index k = 0;
  for (Index i = 1; i < p_; ++i) {
    for (Index j = 0; j < i; ++j) {
      const double z = std::tanh(theta(k++));
      const double shape = eta_ + 0.5 * static_cast<double>(p_ - 2 - j);
      const double one_minus = 1.0 - z * z;
      if (!(one_minus > 0.0)) return -std::numeric_limits<double>::infinity();
      lp += shape * std::log(one_minus);  // includes the tanh Jacobian
    }
  }
  const VectorXd u = theta.segment(nc, p_);
  for (Index j = 0; j < p_; ++j) lp += -a_ * u(j) - b_ * std::exp(-u(j));

  const VectorXd s = (0.5 * u).array().exp();
  const MatrixXd L = s.asDiagonal() * corr_cholesky(theta);
  double log_det = 0.0;
  for (Index j = 0; j < p_; ++j) {
    if (!(L(j, j) > 0.0)) return -std::numeric_limits<double>::infinity();
    log_det += 2.0 * std::log(L(j, j));
  }
  const MatrixXd solved = L.triangularView<Eigen::Lower>().solve(deviations.transpose());
  lp += -0.5 * static_cast<double>(deviations.rows()) * log_det - 0.5 * solved.squaredNorm();
  return lp;
}

void LkjScaleSampler::step(Rng& rng, const MatrixXd& deviations, bool adapt) {
  const VectorXd proposal = theta_ + step_ * rng.normal_vector(theta_.size());
  const double log_ratio = log_target(proposal, deviations) - log_target(theta_, deviations);
  const bool accept = std::log(rng.uniform(0.0, 1.0)) < log_ratio;
  ++proposals_;
  if (accept) {
    theta_ = proposal;
    ++accepted_;
  }
  if (adapt) step_ *= std::exp(0.05 * ((accept ? 1.0 : 0.0) - 0.3));
}

double LkjScaleSampler::acceptance_rate() const {
  return proposals_ > 0 ? static_cast<double>(accepted_) / static_cast<double>(proposals_) : 0.0;
}

// ---------------------------------------------------------------------------
// Gibbs chain

GibbsChain::GibbsChain(const TrainingData& data, const PriorSpec& prior, LikelihoodForm form,
                       std::uint64_t seed, double mh_step)
    : prior_(prior), form_(form), rng_(seed) {
  if (data.E < 1 || data.p < 1) throw ContractError("sampler: training data is empty");
  prior_.validate(data.p);
  p_ = data.p;
  E_ = data.E;
  q_ = data.intercept ? 1 : 0;
  d_ = q_ + 2 * p_;
  load_stats(data);

  state_.w = VectorXd::Zero(d_);
  state_.mu = empirical_means(data);
  const VectorXd y = pooled_Y(data);
  const double var_y = y.size() > 1 ? (y.array() - y.mean()).square().sum() / static_cast<double>(y.size() - 1) : 0.0;
  state_.sigma2 = var_y > 0.0 ? var_y : 1.0;
  state_.tau2 = prior_.tau == PriorSpec::Tau::Fixed ? prior_.tau2_fixed : 1.0;
  state_.phi = 1.0;
  state_.s2_mu = VectorXd::Ones(p_);
  switch (prior_.mu_cov) {
    case PriorSpec::MuCovariance::DiagonalHierarchical:
      state_.mu_prior_prec = MatrixXd::Identity(p_, p_);
      break;
    case PriorSpec::MuCovariance::Fixed:
      state_.s2_mu = prior_.mu_cov_fixed.diagonal();
      state_.mu_prior_prec = prior_.mu_cov_fixed.llt().solve(MatrixXd::Identity(p_, p_));
      break;
    case PriorSpec::MuCovariance::Lkj:
      lkj_.emplace(p_, prior_.lkj_eta, prior_.a_mu, prior_.b_mu, mh_step);
      state_.mu_prior_prec = lkj_->covariance().llt().solve(MatrixXd::Identity(p_, p_));
      break;
  }
}

void GibbsChain::warn(const std::string& msg) {
  if (std::find(warnings_.begin(), warnings_.end(), msg) == warnings_.end()) warnings_.push_back(msg);
}

void GibbsChain::load_stats(const TrainingData& data) {
  m_ = static_cast<double>(data.m);
  env_.clear();
  MatrixXd avg = MatrixXd::Zero(p_, p_);
  for (Index e = 0; e < data.E; ++e) {
    const auto& env = data.environments[static_cast<std::size_t>(e)];
    EnvStats s;
    s.n = static_cast<double>(env.n());
    const auto reg = regularized_inverse(env.sigma_hat);
    if (reg.ridged()) {
      warn("covariance of environment '" + env.label + "' is singular or ill-conditioned (condition " +
           format_double(reg.condition) + "); added ridge " + format_double(reg.ridge));
    }
    s.x_prec = reg.inverse;
    s.kmap = form_ == LikelihoodForm::PrecisionWeighted ? s.x_prec : MatrixXd::Identity(p_, p_);
    MatrixXd Z(env.n(), p_ + 1);
    Z.col(0).setOnes();
    Z.rightCols(p_) = env.X;
    s.szz = Z.transpose() * Z;
    s.szy = Z.transpose() * env.Y;
    s.syy = env.Y.squaredNorm();
    avg += s.n * (form_ == LikelihoodForm::PrecisionWeighted ? s.x_prec : env.sigma_hat);
    env_.push_back(std::move(s));
  }
  k_quad_ = avg / m_;
  center_ = prior_.mu_center ? *prior_.mu_center : data.grand_mu_hat;
}

void GibbsChain::set_data(const TrainingData& data) {
  if (data.E != E_ || data.p != p_ || (data.intercept ? 1 : 0) != q_) {
    throw ContractError("set_data: replacement data must keep E, p and the intercept flag");
  }
  load_stats(data);
}

MatrixXd GibbsChain::env_map(Index e, const MatrixXd& mu) const {
  const auto& s = env_[static_cast<std::size_t>(e)];
  MatrixXd M = MatrixXd::Zero(d_, p_ + 1);
  if (q_ == 1) M(0, 0) = 1.0;
  M.block(q_, 1, p_, p_).setIdentity();
  M.block(q_ + p_, 0, p_, 1) = -s.kmap * mu.row(e).transpose();
  M.block(q_ + p_, 1, p_, p_) = s.kmap;
  return M;
}

void GibbsChain::accumulate_normal_equations(const MatrixXd& mu, MatrixXd& G, VectorXd& b) const {
  G = MatrixXd::Zero(d_, d_);
  b = VectorXd::Zero(d_);
  for (Index e = 0; e < E_; ++e) {
    const MatrixXd M = env_map(e, mu);
    const auto& s = env_[static_cast<std::size_t>(e)];
    G.noalias() += M * s.szz * M.transpose();
    b.noalias() += M * s.szy;
  }
  G = 0.5 * (G + G.transpose());
}

double GibbsChain::coef_prior_precision() const {
  if (prior_.coef_scale == PriorSpec::CoefScale::SigmaScaled) return 1.0 / (state_.tau2 * state_.sigma2);
  return 1.0 / state_.tau2;
}

GibbsChain::Gaussian GibbsChain::coefficient_conditional() const {
  MatrixXd G;
  VectorXd b;
  accumulate_normal_equations(G, b);
  Gaussian g;
  g.precision = G / state_.sigma2;
  g.precision.diagonal().array() += coef_prior_precision();
  g.mean = g.precision.llt().solve(b / state_.sigma2);
  return g;
}

void GibbsChain::update_coefficients() {
  MatrixXd G;
  VectorXd b;
  accumulate_normal_equations(G, b);
  MatrixXd Q = G / state_.sigma2;
  Q.diagonal().array() += coef_prior_precision();
  Eigen::LLT<MatrixXd> llt(Q);
  if (llt.info() != Eigen::Success) {
    const double ridge = kRidgeScale * std::max(Q.trace() / static_cast<double>(d_), 1.0);
    Q.diagonal().array() += ridge;
    llt.compute(Q);
    warn("coefficient conditional precision was not positive definite; added ridge");
    if (llt.info() != Eigen::Success) throw NumericalError("coefficient conditional precision is singular");
  }
  state_.w = draw_gaussian_canonical(rng_, llt, b / state_.sigma2);
}

GibbsChain::Gaussian GibbsChain::env_mean_conditional(Index e) const {
  const auto& s = env_[static_cast<std::size_t>(e)];
  const VectorXd K = state_.w.tail(p_);
  const VectorXd g = s.kmap * K;
  VectorXd h(p_ + 1);
  h(0) = q_ == 1 ? state_.w(0) : 0.0;
  h.tail(p_) = state_.w.segment(q_, p_) + g;
  const double sum_c = s.szy(0) - h.dot(s.szz.col(0));
  const VectorXd sum_x = s.szz.col(0).tail(p_);
  Gaussian out;
  out.precision = s.n * s.x_prec + (s.n / state_.sigma2) * g * g.transpose() + state_.mu_prior_prec;
  out.precision = 0.5 * (out.precision + out.precision.transpose());
  const VectorXd lin = s.x_prec * sum_x - g * (sum_c / state_.sigma2) + state_.mu_prior_prec * center_;
  out.mean = out.precision.llt().solve(lin);
  return out;
}

double GibbsChain::collapsed_log_target(const MatrixXd& mu) const {
  MatrixXd G;
  VectorXd b;
  accumulate_normal_equations(mu, G, b);
  MatrixXd Q = G / state_.sigma2;
  Q.diagonal().array() += coef_prior_precision();
  Eigen::LLT<MatrixXd> llt(Q);
  if (llt.info() != Eigen::Success) return -std::numeric_limits<double>::infinity();
  const VectorXd bs = b / state_.sigma2;
  const MatrixXd& L = llt.matrixL();
  double lp = 0.5 * bs.dot(llt.solve(bs)) - L.diagonal().array().log().sum();
  for (Index e = 0; e < E_; ++e) {
    const auto& s = env_[static_cast<std::size_t>(e)];
    const VectorXd m = mu.row(e).transpose();
    const VectorXd xbar = s.szz.col(0).tail(p_) / s.n;
    const VectorXd dx = m - xbar;
    const VectorXd dc = m - center_;
    lp -= 0.5 * s.n * dx.dot(s.x_prec * dx) + 0.5 * dc.dot(state_.mu_prior_prec * dc);
  }
  return lp;
}

void GibbsChain::update_env_means_collapsed() {
  const double scale = 2.38 / std::sqrt(static_cast<double>(p_));
  double current = collapsed_log_target(state_.mu);
  for (Index e = 0; e < E_; ++e) {
    const auto& s = env_[static_cast<std::size_t>(e)];
    // Proposal shaped like the X-likelihood of mu_e.
    Eigen::LLT<MatrixXd> llt(s.x_prec * s.n);
    const VectorXd z = rng_.normal_vector(p_);
    MatrixXd proposal = state_.mu;
    proposal.row(e) += scale * llt.matrixU().solve(z).transpose();
    const double cand = collapsed_log_target(proposal);
    ++collapsed_proposals_;
    if (std::log(rng_.uniform(0.0, 1.0)) < cand - current) {
      state_.mu = std::move(proposal);
      current = cand;
      ++collapsed_accepted_;
    }
  }
}

double GibbsChain::collapsed_acceptance() const {
  return collapsed_proposals_ > 0 ? static_cast<double>(collapsed_accepted_) / static_cast<double>(collapsed_proposals_) : 0.0;
}

void GibbsChain::update_env_means() {
  for (Index e = 0; e < E_; ++e) {
    const auto& s = env_[static_cast<std::size_t>(e)];
    const VectorXd g = s.kmap * state_.w.tail(p_);
    VectorXd h(p_ + 1);
    h(0) = q_ == 1 ? state_.w(0) : 0.0;
    h.tail(p_) = state_.w.segment(q_, p_) + g;
    const double sum_c = s.szy(0) - h.dot(s.szz.col(0));
    MatrixXd P = s.n * s.x_prec + (s.n / state_.sigma2) * g * g.transpose() + state_.mu_prior_prec;
    P = 0.5 * (P + P.transpose());
    const VectorXd lin = s.x_prec * s.szz.col(0).tail(p_) - g * (sum_c / state_.sigma2) + state_.mu_prior_prec * center_;
    Eigen::LLT<MatrixXd> llt(P);
    if (llt.info() != Eigen::Success) throw NumericalError("environment mean conditional precision is singular");
    state_.mu.row(e) = draw_gaussian_canonical(rng_, llt, lin).transpose();
  }
}

double GibbsChain::residual_sum_squares() const {
  MatrixXd G;
  VectorXd b;
  accumulate_normal_equations(G, b);
  double syy = 0.0;
  for (const auto& s : env_) syy += s.syy;
  const double rss = syy - 2.0 * state_.w.dot(b) + state_.w.dot(G * state_.w);
  return std::max(rss, 0.0);
}

std::pair<double, double> GibbsChain::sigma_conditional() const {
  double shape = 0.5 * m_;
  double scale = 0.5 * residual_sum_squares();
  if (prior_.sigma_y == PriorSpec::SigmaY::InverseGamma) {
    shape += prior_.a_y;
    scale += prior_.b_y;
  }
  if (prior_.coef_scale == PriorSpec::CoefScale::SigmaScaled) {
    shape += 0.5 * static_cast<double>(d_);
    scale += state_.w.squaredNorm() / (2.0 * state_.tau2);
  }
  return {shape, scale};
}

void GibbsChain::update_sigma() {
  const auto [shape, scale] = sigma_conditional();
  if (!(scale > 0.0)) {
    throw NumericalError(
        "residual variance conditional is degenerate (zero residuals under the improper prior); "
        "use a proper inverse-gamma prior on sigma_Y^2");
  }
  state_.sigma2 = rng_.inv_gamma(shape, scale);
}

std::pair<double, double> GibbsChain::tau_conditional() const {
  const double denom = prior_.coef_scale == PriorSpec::CoefScale::SigmaScaled ? 2.0 * state_.sigma2 : 2.0;
  return {0.5 * static_cast<double>(d_ + 1), 1.0 / state_.phi + state_.w.squaredNorm() / denom};
}

std::pair<double, double> GibbsChain::phi_conditional() const { return {1.0, 1.0 + 1.0 / state_.tau2}; }

void GibbsChain::update_tau() {
  if (prior_.tau == PriorSpec::Tau::Fixed) return;
  const auto [a, b] = tau_conditional();
  state_.tau2 = rng_.inv_gamma(a, b);
  const auto [pa, pb] = phi_conditional();
  state_.phi = rng_.inv_gamma(pa, pb);
}

std::pair<double, double> GibbsChain::mu_scale_conditional(Index j) const {
  const double ss = (state_.mu.col(j).array() - center_(j)).square().sum();
  return {prior_.a_mu + 0.5 * static_cast<double>(E_), prior_.b_mu + 0.5 * ss};
}

void GibbsChain::update_mu_prior(bool adapt) {
  switch (prior_.mu_cov) {
    case PriorSpec::MuCovariance::Fixed:
      return;
    case PriorSpec::MuCovariance::DiagonalHierarchical:
      for (Index j = 0; j < p_; ++j) {
        const auto [a, b] = mu_scale_conditional(j);
        state_.s2_mu(j) = rng_.inv_gamma(a, b);
      }
      state_.mu_prior_prec = state_.s2_mu.cwiseInverse().asDiagonal();
      return;
    case PriorSpec::MuCovariance::Lkj: {
      const MatrixXd dev = state_.mu.rowwise() - center_.transpose();
      lkj_->step(rng_, dev, adapt);
      state_.s2_mu = lkj_->scales2();
      const MatrixXd cov = lkj_->covariance();
      state_.mu_prior_prec = cov.llt().solve(MatrixXd::Identity(p_, p_));
      return;
    }
  }
}

void GibbsChain::sweep(bool warmup) {
  if (collapsed_moves_) update_env_means_collapsed();
  update_coefficients();
  update_env_means();
  update_sigma();
  update_tau();
  update_mu_prior(warmup);
}

void GibbsChain::check_finite() const {
  auto fail = [](const std::string& block) {
    throw NumericalError("non-finite log-density at initialization in block '" + block + "'");
  };
  double x_ll = 0.0;
  for (Index e = 0; e < E_; ++e) {
    const auto& s = env_[static_cast<std::size_t>(e)];
    const VectorXd mu = state_.mu.row(e).transpose();
    const VectorXd sum_x = s.szz.col(0).tail(p_);
    const MatrixXd sxx = s.szz.bottomRightCorner(p_, p_);
    // sum_i (x_i - mu)' P (x_i - mu)
    const double quad = (s.x_prec * sxx).trace() - 2.0 * mu.dot(s.x_prec * sum_x) + s.n * mu.dot(s.x_prec * mu);
    x_ll += -0.5 * quad;
  }
  if (!std::isfinite(x_ll)) fail("X-likelihood");
  const double rss = residual_sum_squares();
  const double y_ll = -0.5 * m_ * (kLog2Pi + std::log(state_.sigma2)) - 0.5 * rss / state_.sigma2;
  if (!std::isfinite(y_ll)) fail("Y-likelihood");
  const double w_lp = -0.5 * state_.w.squaredNorm() * coef_prior_precision();
  if (!std::isfinite(w_lp)) fail("coefficient prior");
  if (!std::isfinite(log_inv_gamma(state_.tau2, 0.5, 1.0 / state_.phi)) ||
      !std::isfinite(log_inv_gamma(state_.phi, 0.5, 1.0))) {
    fail("shrinkage prior");
  }
  const MatrixXd dev = state_.mu.rowwise() - center_.transpose();
  const double mu_lp = -0.5 * (dev * state_.mu_prior_prec * dev.transpose()).trace();
  if (!std::isfinite(mu_lp) || !state_.mu_prior_prec.allFinite()) fail("environment-mean prior");
  if (!(state_.sigma2 > 0.0) || !std::isfinite(state_.sigma2)) fail("residual variance");
}

ParamDraw GibbsChain::draw() const {
  ParamDraw d;
  d.beta = state_.w.head(q_ + p_);
  const VectorXd k = state_.w.tail(p_);
  d.K = form_ == LikelihoodForm::PrecisionWeighted ? k : VectorXd(k_quad_ * k);
  d.mu = state_.mu;
  d.sigmaY2 = state_.sigma2;
  d.sigma_eps2 = state_.sigma2 + k.dot(k_quad_ * k);
  d.tau2 = state_.tau2;
  d.aux_phi = state_.phi;
  d.mu_prior_scales = state_.s2_mu;
  return d;
}

// ---------------------------------------------------------------------------
// fit

namespace {

nlohmann::json prior_json(const PriorSpec& prior) {
  nlohmann::json j;
  j["tau_prior"] = prior.tau == PriorSpec::Tau::HalfCauchy ? "half_cauchy" : "fixed";
  if (prior.tau == PriorSpec::Tau::Fixed) j["tau2_fixed"] = prior.tau2_fixed;
  j["sigmaY_prior"] = prior.sigma_y == PriorSpec::SigmaY::Jeffreys ? "jeffreys" : "inverse_gamma";
  if (prior.sigma_y == PriorSpec::SigmaY::InverseGamma) {
    j["a_y"] = prior.a_y;
    j["b_y"] = prior.b_y;
  }
  switch (prior.mu_cov) {
    case PriorSpec::MuCovariance::DiagonalHierarchical: j["mu_cov"] = "diagonal_hierarchical"; break;
    case PriorSpec::MuCovariance::Fixed: j["mu_cov"] = "fixed"; break;
    case PriorSpec::MuCovariance::Lkj: j["mu_cov"] = "lkj"; j["lkj_eta"] = prior.lkj_eta; break;
  }
  if (prior.mu_cov != PriorSpec::MuCovariance::Fixed) {
    j["a_mu"] = prior.a_mu;
    j["b_mu"] = prior.b_mu;
  }
  j["coef_scale"] = prior.coef_scale == PriorSpec::CoefScale::SigmaScaled ? "sigma_scaled" : "absolute";
  if (prior.mu_center) j["mu_center"] = std::vector<double>(prior.mu_center->data(), prior.mu_center->data() + prior.mu_center->size());
  return j;
}

}  // namespace

PosteriorSamples fit(const TrainingData& data, const PriorSpec& prior, const SamplerConfig& cfg) {
  cfg.validate();
  prior.validate(data.p);
  const int n_chains = cfg.n_chains;
  std::vector<std::vector<ParamDraw>> chains(static_cast<std::size_t>(n_chains));
  std::vector<std::vector<std::string>> chain_warnings(static_cast<std::size_t>(n_chains));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n_chains));

  auto run_chain = [&](std::size_t c) {
    try {
      GibbsChain chain(data, prior, cfg.likelihood_form, cfg.chain_seed(static_cast<int>(c)), cfg.mh_step);
      chain.set_collapsed_moves(cfg.collapsed_moves);
      chain.check_finite();
      for (int it = 0; it < cfg.n_warmup; ++it) chain.sweep(true);
      auto& out = chains[c];
      out.reserve(static_cast<std::size_t>(cfg.n_kept));
      for (int it = 0; it < cfg.n_kept; ++it) {
        chain.sweep(false);
        out.push_back(chain.draw());
      }
      chain_warnings[c] = chain.warnings();
    } catch (...) {
      errors[c] = std::current_exception();
    }
  };
  int threads = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  threads = std::min(threads, n_chains);
  parallel_for(static_cast<std::size_t>(n_chains), threads, run_chain);
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  PosteriorSamples out;
  out.layout = DrawLayout{data.p, data.E, data.intercept};
  out.form = cfg.likelihood_form;
  out.chains = std::move(chains);
  out.n_chains = n_chains;
  out.n_warmup = cfg.n_warmup;
  out.n_kept = cfg.n_kept;
  out.base_seed = cfg.base_seed;
  for (int c = 0; c < n_chains; ++c) out.chain_seeds.push_back(cfg.chain_seed(c));
  out.covariate_names = data.covariate_names;
  out.rhat_threshold = cfg.rhat_threshold;

  std::set<std::string> seen;
  auto add_warning = [&](const std::string& w) {
    if (seen.insert(w).second) out.warnings.push_back(w);
  };
  for (const auto& w : data.warnings) add_warning(w);
  for (const auto& cw : chain_warnings)
    for (const auto& w : cw) add_warning(w);

  if (cfg.n_kept >= 4) {
    out.diagnostics = diagnostics(out, cfg.rhat_threshold);
    if (n_chains < 2) {
      add_warning("R-hat undefined with a single chain");
    } else {
      std::string flagged;
      for (const auto& row : out.diagnostics) {
        // Parameters held fixed by the prior have no variance and no meaningful R-hat.
        if (std::isnan(row.rhat) && std::isnan(row.ess)) continue;
        if (row.flagged) flagged += (flagged.empty() ? "" : ", ") + row.param;
      }
      if (!flagged.empty()) add_warning("R-hat above " + format_double(cfg.rhat_threshold) + " or undefined for: " + flagged);
    }
  } else {
    add_warning("too few kept draws for diagnostics");
  }

  nlohmann::json config;
  config["n_chains"] = cfg.n_chains;
  config["n_warmup"] = cfg.n_warmup;
  config["n_kept"] = cfg.n_kept;
  config["base_seed"] = cfg.base_seed;
  config["chain_seeds"] = out.chain_seeds;
  config["likelihood_form"] = to_string(cfg.likelihood_form);
  config["mh_step"] = cfg.mh_step;
  config["collapsed_moves"] = cfg.collapsed_moves;
  config["rhat_threshold"] = cfg.rhat_threshold;
  config["intercept"] = data.intercept;
  config["prior"] = prior_json(prior);
  out.config_json = config.dump();
  return out;
}

// ---------------------------------------------------------------------------
// Identifiability sweep

PriorSpec sweep_prior() {
  PriorSpec prior;
  prior.tau = PriorSpec::Tau::Fixed;
  prior.tau2_fixed = 1.0;
  prior.coef_scale = PriorSpec::CoefScale::Absolute;
  return prior;
}

std::vector<SweepRow> identifiability_sweep(const std::vector<double>& lambdas, const SingleSourceConfig& base,
                                            const PriorSpec& prior, const SamplerConfig& cfg) {
  std::vector<SweepRow> rows;
  const bool absolute_fixed =
      prior.coef_scale == PriorSpec::CoefScale::Absolute && prior.tau == PriorSpec::Tau::Fixed;
  for (const double lambda : lambdas) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw ContractError("sweep: lambda values must be non-negative");
    SingleSourceConfig sc = base;
    sc.train_mean = lambda * base.train_mean;
    const SimDataset ds = gen_single_source(sc, false);
    const PosteriorSamples post = fit(ds.train, prior, cfg);
    const MatrixXd B = post.beta_matrix();
    const VectorXd b = B.col(0);
    SweepRow row;
    row.lambda = lambda;
    row.beta_mean = b.mean();
    row.beta_sd = std::sqrt((b.array() - row.beta_mean).square().sum() / static_cast<double>(b.size() - 1));
    row.prior_sd = absolute_fixed ? std::sqrt(prior.tau2_fixed) : std::numeric_limits<double>::quiet_NaN();
    rows.push_back(row);
  }
  return rows;
}

}  // namespace bgi

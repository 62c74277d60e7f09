#include "bgi/simgen.hpp"

#include <cmath>

#include <Eigen/Cholesky>
#include <json.hpp>

#include "bgi/error.hpp"
#include "bgi/random.hpp"

namespace bgi {

namespace {

std::vector<double> to_vec(const VectorXd& v) { return {v.data(), v.data() + v.size()}; }

std::vector<std::vector<double>> to_rows(const MatrixXd& M) {
  std::vector<std::vector<double>> rows;
  for (Index r = 0; r < M.rows(); ++r) rows.push_back(to_vec(M.row(r).transpose()));
  return rows;
}

std::vector<std::string> default_names(Index p) {
  std::vector<std::string> names;
  for (Index j = 0; j < p; ++j) names.push_back("x" + std::to_string(j + 1));
  return names;
}

}  // namespace

void SingleSourceConfig::validate() const {
  if (n1 < 2 || n0 < 2) throw ContractError("single-source: n1 and n0 must be at least 2");
  if (!(sigma_H >= 0.0) || !std::isfinite(sigma_H)) throw ContractError("single-source: sigma_H must be non-negative");
  if (!(noise_sd_x > 0.0) || !(noise_sd_y > 0.0)) throw ContractError("single-source: noise SDs must be positive");
  if (!std::isfinite(train_mean) || !std::isfinite(shift)) throw ContractError("single-source: non-finite mean or shift");
}

void MultiSourceConfig::validate() const {
  if (p < 1) throw ContractError("multi-source: p must be at least 1");
  if (q < 0) throw ContractError("multi-source: q must be non-negative");
  if (E < 0) throw ContractError("multi-source: E must be non-negative");
  const Index e = environments();
  if ((n + e - 1) / e < 2) throw ContractError("multi-source: each environment needs at least 2 observations");
  if (n0 < 2) throw ContractError("multi-source: n0 must be at least 2");
  if (beta && beta->size() != p) throw ContractError("multi-source: beta must have length p");
  if (psi && (psi->rows() != q || psi->cols() != p)) throw ContractError("multi-source: Psi must be q x p");
  if (phi && phi->size() != q) throw ContractError("multi-source: phi must have length q");
}

MatrixXd sigma_v(Index p) {
  MatrixXd S = MatrixXd::Constant(p, p, 0.5);
  S.diagonal().array() += 0.5;
  return S;
}

SimDataset gen_single_source(const SingleSourceConfig& cfg, bool intercept) {
  cfg.validate();
  Rng rng(cfg.seed);
  SimDataset ds;
  auto draw = [&](Index n, double mean, MatrixXd& X, VectorXd& Y, MatrixXd* H) {
    X.resize(n, 1);
    Y.resize(n);
    if (H) H->resize(n, 1);
    for (Index i = 0; i < n; ++i) {
      const double h = cfg.sigma_H * rng.normal();
      if (H) (*H)(i, 0) = h;
      const double ex = cfg.noise_sd_x * rng.normal();
      const double ey = cfg.noise_sd_y * rng.normal();
      X(i, 0) = mean + 0.5 * h + ex;
      Y(i) = X(i, 0) - 2.0 * h + ey;
    }
  };
  MatrixXd X, X0;
  VectorXd Y, Y0;
  draw(cfg.n1, cfg.train_mean, X, Y, &ds.hidden);
  draw(cfg.n0, cfg.train_mean + cfg.shift, X0, Y0, nullptr);

  std::vector<EnvironmentData> envs;
  envs.push_back(make_environment(0, "e1", std::move(X), std::move(Y)));
  ds.train = make_training_data(std::move(envs), intercept, default_names(1));
  ds.test = make_test_covariates(std::move(X0));
  ds.test_y = std::move(Y0);
  ds.truth.beta = intercept ? VectorXd((VectorXd(2) << 0.0, 1.0).finished()) : VectorXd::Ones(1);
  ds.truth.K = VectorXd::Constant(1, -cfg.sigma_H * cfg.sigma_H);
  ds.truth.error_variance = 4.0 * cfg.sigma_H * cfg.sigma_H + cfg.noise_sd_y * cfg.noise_sd_y;
  ds.env_means = MatrixXd::Constant(1, 1, cfg.train_mean);
  ds.test_mean = VectorXd::Constant(1, cfg.train_mean + cfg.shift);

  nlohmann::json m;
  m["generator"] = "single_source";
  m["seed"] = cfg.seed;
  m["config"] = {{"n1", cfg.n1},           {"n0", cfg.n0},
                 {"sigma_H", cfg.sigma_H}, {"noise_sd_x", cfg.noise_sd_x},
                 {"noise_sd_y", cfg.noise_sd_y}, {"train_mean", cfg.train_mean},
                 {"shift", cfg.shift},     {"intercept", intercept}};
  m["equations"] = "H ~ N(0, sigma_H^2); X = train_mean + 0.5 H + eps_X; Y = X - 2 H + eps_Y; test X shifted by shift";
  m["truth"] = {{"beta", to_vec(ds.truth.beta)}, {"K", to_vec(ds.truth.K)}, {"error_variance", ds.truth.error_variance}};
  ds.manifest_json = m.dump(2);
  return ds;
}

SimDataset gen_multi_source(const MultiSourceConfig& cfg) {
  cfg.validate();
  const Index p = cfg.p;
  const Index q = cfg.q;
  const Index E = cfg.environments();
  const Index n_e = (cfg.n + E - 1) / E;
  Rng rng(cfg.seed);

  // Dataset-level draws come first so that overrides leave the observation stream unchanged.
  SimDataset ds;
  ds.u.resize(E, p);
  for (Index e = 0; e < E; ++e)
    for (Index j = 0; j < p; ++j) ds.u(e, j) = rng.uniform(-1.0, 1.0);
  ds.U.resize(p);
  for (Index j = 0; j < p; ++j) ds.U(j) = rng.uniform(-1.0, 1.0);
  ds.psi.resize(q, p);
  for (Index r = 0; r < q; ++r)
    for (Index j = 0; j < p; ++j) ds.psi(r, j) = rng.normal();
  ds.phi = rng.normal_vector(q);
  if (cfg.psi) ds.psi = *cfg.psi;
  if (cfg.phi) ds.phi = *cfg.phi;
  const VectorXd beta = cfg.beta ? *cfg.beta : VectorXd::Ones(p);

  ds.env_means.resize(E, p);
  for (Index e = 0; e < E; ++e)
    for (Index j = 0; j < p; ++j)
      ds.env_means(e, j) = 2.0 * static_cast<double>(j + 1) / static_cast<double>(p) - 1.0 + ds.u(e, j);
  ds.test_mean.resize(p);
  for (Index j = 0; j < p; ++j) ds.test_mean(j) = 2.0 * static_cast<double>(j + 1) / static_cast<double>(p) + 2.0 * ds.U(j);

  const MatrixXd sv = sigma_v(p);
  const MatrixXd L_train = sv.llt().matrixL();
  MatrixXd s0 = sv;
  s0.diagonal().array() += 0.5;
  const MatrixXd L_test = s0.llt().matrixL();

  auto draw = [&](Index n, const VectorXd& mean, const MatrixXd& L, MatrixXd& X, VectorXd& Y, MatrixXd* H) {
    X.resize(n, p);
    Y.resize(n);
    for (Index i = 0; i < n; ++i) {
      const VectorXd v = mean + L * rng.normal_vector(p);
      const VectorXd h = rng.normal_vector(q);
      if (H) H->row(i) = h.transpose();
      const VectorXd x = v + ds.psi.transpose() * h;
      X.row(i) = x.transpose();
      Y(i) = beta.dot(x) + ds.phi.dot(h) + rng.normal();
    }
  };

  std::vector<EnvironmentData> envs;
  ds.hidden.resize(n_e * E, q);
  for (Index e = 0; e < E; ++e) {
    MatrixXd X;
    VectorXd Y;
    MatrixXd H(n_e, q);
    draw(n_e, ds.env_means.row(e).transpose(), L_train, X, Y, &H);
    ds.hidden.middleRows(e * n_e, n_e) = H;
    envs.push_back(make_environment(static_cast<int>(e), "e" + std::to_string(e + 1), std::move(X), std::move(Y)));
  }
  ds.train = make_training_data(std::move(envs), cfg.intercept, default_names(p));
  MatrixXd X0;
  draw(cfg.n0, ds.test_mean, L_test, X0, ds.test_y, nullptr);
  ds.test = make_test_covariates(std::move(X0));

  if (cfg.intercept) {
    ds.truth.beta.resize(p + 1);
    ds.truth.beta(0) = 0.0;
    ds.truth.beta.tail(p) = beta;
  } else {
    ds.truth.beta = beta;
  }
  ds.truth.K = ds.psi.transpose() * ds.phi;
  ds.truth.error_variance = ds.phi.squaredNorm() + 1.0;

  nlohmann::json m;
  m["generator"] = "multi_source";
  m["seed"] = cfg.seed;
  m["config"] = {{"n", cfg.n}, {"p", p}, {"q", q}, {"E", E}, {"n_per_env", n_e}, {"n0", cfg.n0}, {"intercept", cfg.intercept}};
  m["overrides"] = {{"beta", cfg.beta.has_value()}, {"psi", cfg.psi.has_value()}, {"phi", cfg.phi.has_value()}};
  m["environment_offsets"] = "u redrawn independently for every environment, frozen per dataset";
  m["frozen"] = {{"u", to_rows(ds.u)},
                 {"U", to_vec(ds.U)},
                 {"psi", to_rows(ds.psi)},
                 {"phi", to_vec(ds.phi)},
                 {"beta", to_vec(beta)},
                 {"env_means", to_rows(ds.env_means)},
                 {"test_mean", to_vec(ds.test_mean)}};
  m["truth"] = {{"beta", to_vec(ds.truth.beta)}, {"K", to_vec(ds.truth.K)}, {"error_variance", ds.truth.error_variance}};
  ds.manifest_json = m.dump(2);
  return ds;
}

}  // namespace bgi

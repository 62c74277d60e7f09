#include "oracles.hpp"

#include <cmath>
#include <limits>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>

namespace bgi::oracle {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Moments moments(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  double m = 0;
  for (double v : x) m += v;
  m /= n;
  double m2 = 0, m4 = 0;
  for (double v : x) {
    const double d = (v - m) * (v - m);
    m2 += d;
    m4 += d * d;
  }
  m2 /= n;
  m4 /= n;
  Moments out;
  out.mean = m;
  out.var = m2 * n / (n - 1);
  out.se_mean = std::sqrt(out.var / n);
  out.se_var = std::sqrt(std::max(m4 - m2 * m2, 0.0) / n);
  return out;
}

double batch_se(const std::vector<double>& x, int batches) {
  const std::size_t len = x.size() / static_cast<std::size_t>(batches);
  std::vector<double> means;
  for (int b = 0; b < batches; ++b) {
    double s = 0;
    for (std::size_t i = 0; i < len; ++i) s += x[static_cast<std::size_t>(b) * len + i];
    means.push_back(s / static_cast<double>(len));
  }
  return moments(means).se_mean;
}

VectorXd qr_least_squares(const MatrixXd& D, const VectorXd& y) { return D.householderQr().solve(y); }

MatrixXd dense_design(const TrainingData& data, const MatrixXd& mu, LikelihoodForm form) {
  const Index p = data.p;
  const Index q = data.intercept ? 1 : 0;
  MatrixXd W(data.m, q + 2 * p);
  Index r = 0;
  for (Index e = 0; e < data.E; ++e) {
    const auto& env = data.environments[static_cast<std::size_t>(e)];
    const Eigen::LDLT<MatrixXd> ldlt(env.sigma_hat);
    for (Index i = 0; i < env.n(); ++i, ++r) {
      const VectorXd x = env.X.row(i).transpose();
      const VectorXd c = x - mu.row(e).transpose();
      if (q == 1) W(r, 0) = 1.0;
      W.block(r, q, 1, p) = x.transpose();
      W.block(r, q + p, 1, p) = (form == LikelihoodForm::PrecisionWeighted ? VectorXd(ldlt.solve(c)) : c).transpose();
    }
  }
  return W;
}

namespace {

VectorXd stacked_y(const TrainingData& data) {
  VectorXd y(data.m);
  Index r = 0;
  for (const auto& env : data.environments) {
    y.segment(r, env.n()) = env.Y;
    r += env.n();
  }
  return y;
}

double log_mvn(const VectorXd& x, const VectorXd& mean, const MatrixXd& cov) {
  const Eigen::LLT<MatrixXd> llt(cov);
  const VectorXd z = llt.matrixL().solve(x - mean);
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  return -0.5 * z.squaredNorm() - 0.5 * logdet - 0.5 * static_cast<double>(x.size()) * std::log(2.0 * M_PI);
}

}  // namespace

Gaussian dense_coefficient_conditional(const TrainingData& data, const MatrixXd& mu, double sigma2, double prior_prec,
                                       LikelihoodForm form) {
  const MatrixXd W = dense_design(data, mu, form);
  const VectorXd y = stacked_y(data);
  MatrixXd Q = W.transpose() * W / sigma2;
  Q.diagonal().array() += prior_prec;
  Gaussian g;
  g.cov = Q.inverse();
  g.mean = g.cov * (W.transpose() * y / sigma2);
  return g;
}

double log_density_mu(const TrainingData& data, Index e, const VectorXd& mu_e, const MatrixXd& mu, const VectorXd& w,
                      double sigma2, const MatrixXd& prior_cov, const VectorXd& center, LikelihoodForm form) {
  const auto& env = data.environments[static_cast<std::size_t>(e)];
  const Index p = data.p;
  const Index q = data.intercept ? 1 : 0;
  MatrixXd m = mu;
  m.row(e) = mu_e.transpose();
  const Eigen::LDLT<MatrixXd> ldlt(env.sigma_hat);
  double lp = 0;
  for (Index i = 0; i < env.n(); ++i) {
    const VectorXd x = env.X.row(i).transpose();
    const VectorXd dx = x - mu_e;
    lp -= 0.5 * dx.dot(ldlt.solve(dx));
    const VectorXd c = form == LikelihoodForm::PrecisionWeighted ? VectorXd(ldlt.solve(dx)) : dx;
    double f = (q == 1 ? w(0) : 0.0) + w.segment(q, p).dot(x) + w.tail(p).dot(c);
    lp -= 0.5 * (env.Y(i) - f) * (env.Y(i) - f) / sigma2;
  }
  const VectorXd dc = mu_e - center;
  lp -= 0.5 * dc.dot(prior_cov.ldlt().solve(dc));
  return lp;
}

double log_collapsed_density(const TrainingData& data, const MatrixXd& mu, double sigma2, double prior_prec,
                             const MatrixXd& prior_cov, const VectorXd& center, LikelihoodForm form) {
  const MatrixXd W = dense_design(data, mu, form);
  const VectorXd y = stacked_y(data);
  MatrixXd C = W * W.transpose() / prior_prec;
  C.diagonal().array() += sigma2;
  double lp = log_mvn(y, VectorXd::Zero(y.size()), C);
  for (Index e = 0; e < data.E; ++e) {
    const auto& env = data.environments[static_cast<std::size_t>(e)];
    const VectorXd m = mu.row(e).transpose();
    for (Index i = 0; i < env.n(); ++i) lp += log_mvn(env.X.row(i).transpose(), m, env.sigma_hat);
    lp += log_mvn(m, center, prior_cov);
  }
  return lp;
}

Gaussian quadrature_1d(const std::function<double(double)>& logf, double lo, double hi, int n) {
  std::vector<double> lv(static_cast<std::size_t>(n));
  const double h = (hi - lo) / (n - 1);
  double mx = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) mx = std::max(mx, lv[static_cast<std::size_t>(i)] = logf(lo + i * h));
  double z = 0, s1 = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = lo + i * h;
    const double wt = ((i == 0 || i == n - 1) ? 0.5 : 1.0) * std::exp(lv[static_cast<std::size_t>(i)] - mx);
    z += wt;
    s1 += wt * x;
    s2 += wt * x * x;
  }
  Gaussian g;
  g.mean = VectorXd::Constant(1, s1 / z);
  g.cov = MatrixXd::Constant(1, 1, s2 / z - (s1 / z) * (s1 / z));
  return g;
}

Gaussian quadrature_2d(const std::function<double(double, double)>& logf, double lo0, double hi0, double lo1, double hi1,
                       int n) {
  MatrixXd lv(n, n);
  const double h0 = (hi0 - lo0) / (n - 1), h1 = (hi1 - lo1) / (n - 1);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) lv(i, j) = logf(lo0 + i * h0, lo1 + j * h1);
  const double mx = lv.maxCoeff();
  double z = 0;
  Eigen::Vector2d s1 = Eigen::Vector2d::Zero();
  Eigen::Matrix2d s2 = Eigen::Matrix2d::Zero();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double wt = ((i == 0 || i == n - 1) ? 0.5 : 1.0) * ((j == 0 || j == n - 1) ? 0.5 : 1.0) * std::exp(lv(i, j) - mx);
      const Eigen::Vector2d v(lo0 + i * h0, lo1 + j * h1);
      z += wt;
      s1 += wt * v;
      s2 += wt * v * v.transpose();
    }
  }
  Gaussian g;
  g.mean = s1 / z;
  g.cov = s2 / z - g.mean * g.mean.transpose();
  return g;
}

double inv_gamma_log_mean(double shape, double scale) { return std::log(scale) - boost::math::digamma(shape); }

double inv_gamma_log_var(double shape) { return boost::math::trigamma(shape); }

double binomial_se(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

}  // namespace bgi::oracle

#include <doctest.h>

#include <set>

#include <Eigen/Dense>

#include "bgi/error.hpp"
#include "bgi/linalg.hpp"
#include "bgi/random.hpp"
#include "oracles.hpp"

using namespace bgi;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("sample moments") {
  const MatrixXd X = (MatrixXd(4, 2) << 1, 2, 3, 4, 5, 7, 7, 3).finished();
  const VectorXd m = column_means(X);
  CHECK(m(0) == doctest::Approx(4.0));
  CHECK(m(1) == doctest::Approx(4.0));
  const MatrixXd S = sample_covariance(X);
  const MatrixXd C = X.rowwise() - m.transpose();
  CHECK((S - C.transpose() * C / 3.0).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("regularized inverse leaves well-conditioned matrices alone") {
  const MatrixXd S = (MatrixXd(2, 2) << 2.0, 0.3, 0.3, 1.0).finished();
  const auto r = regularized_inverse(S);
  CHECK_FALSE(r.ridged());
  CHECK((r.inverse * S - MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("regularized inverse ridges singular matrices by trace / p") {
  const MatrixXd S = (MatrixXd(2, 2) << 1.0, 1.0, 1.0, 1.0).finished();
  const auto r = regularized_inverse(S);
  REQUIRE(r.ridged());
  CHECK(r.ridge == doctest::Approx(1e-8 * 2.0 / 2.0));
  CHECK(r.inverse.allFinite());
  const auto z = regularized_inverse(MatrixXd::Zero(2, 2));
  CHECK(z.ridge == doctest::Approx(1e-8));
  CHECK_THROWS_AS(regularized_inverse(MatrixXd::Zero(2, 3)), ContractError);
}

TEST_CASE("seed derivation separates streams and is stable") {
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 50; ++s)
    for (std::uint64_t k = 0; k < 50; ++k) seen.insert(derive_seed(s, k));
  CHECK(seen.size() == 2500);
  Rng a(42, 3), b(42, 3);
  for (int i = 0; i < 10; ++i) CHECK(a.normal() == b.normal());
}

TEST_CASE("canonical Gaussian draws have precision^{-1} covariance") {
  const MatrixXd Q = (MatrixXd(3, 3) << 4, 1, 0.5, 1, 3, -0.4, 0.5, -0.4, 2).finished();
  const VectorXd b = (VectorXd(3) << 1, -2, 0.5).finished();
  const MatrixXd cov = Q.inverse();
  const VectorXd mean = cov * b;
  Eigen::LLT<MatrixXd> llt(Q);
  Rng rng(17);
  const int N = 100000;
  std::vector<std::vector<double>> cols(3);
  for (int i = 0; i < N; ++i) {
    const VectorXd x = draw_gaussian_canonical(rng, llt, b);
    for (int j = 0; j < 3; ++j) cols[static_cast<std::size_t>(j)].push_back(x(j));
  }
  for (int j = 0; j < 3; ++j) {
    const auto m = oracle::moments(cols[static_cast<std::size_t>(j)]);
    CHECK(std::abs(m.mean - mean(j)) < 3 * m.se_mean);
    CHECK(std::abs(m.var - cov(j, j)) < 3 * m.se_var);
  }
}

TEST_CASE("inverse-gamma draws match log moments") {
  Rng rng(8);
  const double a = 3.5, b = 2.0;
  std::vector<double> logs;
  for (int i = 0; i < 100000; ++i) logs.push_back(std::log(rng.inv_gamma(a, b)));
  const auto m = oracle::moments(logs);
  CHECK(std::abs(m.mean - oracle::inv_gamma_log_mean(a, b)) < 3 * m.se_mean);
  CHECK(std::abs(m.var - oracle::inv_gamma_log_var(a)) < 3 * m.se_var);
  CHECK_THROWS_AS(rng.inv_gamma(1.0, 0.0), NumericalError);
}

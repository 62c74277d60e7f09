#include <doctest.h>

#include <cmath>

#include <Eigen/SVD>
#include <json.hpp>

#include "bgi/baselines.hpp"
#include "bgi/error.hpp"
#include "bgi/random.hpp"
#include "bgi/simgen.hpp"
#include "oracles.hpp"

using namespace bgi;

namespace {

double cov(const VectorXd& a, const VectorXd& b) {
  return ((a.array() - a.mean()) * (b.array() - b.mean())).sum() / static_cast<double>(a.size() - 1);
}

}  // namespace

TEST_CASE("single-source population moments") {
  SingleSourceConfig cfg;
  cfg.n1 = 1000000;
  cfg.n0 = 2;
  cfg.seed = 10;
  const auto ds = gen_single_source(cfg);
  const auto& env = ds.train.environments[0];
  const VectorXd x = env.X.col(0);
  const VectorXd r = env.Y - x;
  CHECK(std::abs(cov(r, x) + 0.25) < 0.01);
  CHECK(cov(x, x) == doctest::Approx(0.0725).epsilon(0.02));
  CHECK(x.mean() == doctest::Approx(2.0).epsilon(0.001));
  CHECK(ds.truth.beta(0) == 1.0);
  CHECK(ds.truth.K(0) == -0.25);
  CHECK(ds.truth.error_variance == doctest::Approx(1.01));
  // regressing Y - X on the hidden confounder recovers its coefficient -2
  const auto h = ols_fit(ds.hidden, r, false);
  CHECK(std::abs(h.coefficients(0) + 2.0) < 3 * h.se(0));
}

TEST_CASE("shifted single-source test domain keeps the confounding structure") {
  SingleSourceConfig cfg;
  cfg.n0 = 200000;
  cfg.seed = 11;
  const auto ds = gen_single_source(cfg);
  const VectorXd x0 = ds.test.X0.col(0);
  CHECK(x0.mean() == doctest::Approx(5.0).epsilon(0.002));
  CHECK(std::abs(cov(ds.test_y - x0, x0) + 0.25) < 0.01);
  CHECK(ds.test.mu0_hat(0) == doctest::Approx(x0.mean()));
}

TEST_CASE("no confounder makes X and Y - X independent") {
  SingleSourceConfig cfg;
  cfg.n1 = 20000;
  cfg.sigma_H = 0.0;
  cfg.seed = 12;
  const auto ds = gen_single_source(cfg);
  const VectorXd x = ds.train.environments[0].X.col(0);
  const VectorXd r = ds.train.environments[0].Y - x;
  const double corr = cov(x, r) / std::sqrt(cov(x, x) * cov(r, r));
  CHECK(std::abs(corr) < 3.0 / std::sqrt(20000.0));
}

TEST_CASE("single-source config validation") {
  SingleSourceConfig cfg;
  cfg.n1 = 1;
  CHECK_THROWS_AS(cfg.validate(), ContractError);
  cfg = SingleSourceConfig{};
  cfg.noise_sd_x = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ContractError);
  MultiSourceConfig m;
  m.p = 0;
  CHECK_THROWS_AS(m.validate(), ContractError);
}

TEST_CASE("multi-source layout: E = p + 1 environments of ceil(n / E) rows") {
  MultiSourceConfig cfg;
  cfg.p = 2;
  cfg.n = 1000;
  cfg.seed = 13;
  const auto ds = gen_multi_source(cfg);
  REQUIRE(ds.train.E == 3);
  for (const auto& env : ds.train.environments) CHECK(env.n() == 334);
  CHECK(ds.train.m == 1002);
  CHECK(ds.test.n0() == 200);
  CHECK(ds.hidden.rows() == 1002);
  CHECK(ds.hidden.cols() == 2);
  CHECK(ds.truth.beta == (VectorXd(3) << 0.0, 1.0, 1.0).finished());
  CHECK((sigma_v(3) - (0.5 * MatrixXd::Ones(3, 3) + 0.5 * MatrixXd::Identity(3, 3))).norm() == 0.0);
  for (Index e = 0; e < 3; ++e)
    for (Index j = 0; j < 2; ++j) {
      const double base = 2.0 * static_cast<double>(j + 1) / 2.0 - 1.0;
      CHECK(ds.env_means(e, j) == doctest::Approx(base + ds.u(e, j)));
      CHECK(std::abs(ds.u(e, j)) <= 1.0);
    }
  for (Index j = 0; j < 2; ++j)
    CHECK(ds.test_mean(j) == doctest::Approx(2.0 * static_cast<double>(j + 1) / 2.0 + 2.0 * ds.U(j)));
}

TEST_CASE("environment sample means scatter around their targets at the CLT rate") {
  std::vector<double> z;
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    MultiSourceConfig cfg;
    cfg.p = 2;
    cfg.n = 600;
    cfg.seed = 1000 + seed;
    const auto ds = gen_multi_source(cfg);
    const MatrixXd cov_x = sigma_v(2) + ds.psi.transpose() * ds.psi;
    for (Index e = 0; e < ds.train.E; ++e) {
      const auto& env = ds.train.environments[static_cast<std::size_t>(e)];
      for (Index j = 0; j < 2; ++j)
        z.push_back((env.mu_hat(j) - ds.env_means(e, j)) / std::sqrt(cov_x(j, j) / static_cast<double>(env.n())));
    }
  }
  const auto m = oracle::moments(z);
  CHECK(std::abs(m.mean) < 3 * m.se_mean);
  CHECK(std::abs(m.var - 1.0) < 3 * m.se_var);
  double worst = 0;
  for (double v : z) worst = std::max(worst, std::abs(v));
  CHECK(worst < 4.5);
}

TEST_CASE("without confounding pooled OLS is unbiased") {
  MultiSourceConfig cfg;
  cfg.p = 3;
  cfg.n = 4000;
  cfg.seed = 14;
  cfg.psi = MatrixXd::Zero(2, 3);
  cfg.phi = VectorXd::Zero(2);
  const auto ds = gen_multi_source(cfg);
  const auto fit = ols_fit(ds.train, true);
  for (Index j = 0; j < 3; ++j) CHECK(std::abs(fit.slopes()(j) - ds.truth.beta(j + 1)) < 3 * fit.se(j + 1));
}

TEST_CASE("regressing Y - beta'X on the hidden confounders recovers phi") {
  MultiSourceConfig cfg;
  cfg.p = 2;
  cfg.n = 30000;
  cfg.seed = 15;
  const auto ds = gen_multi_source(cfg);
  const VectorXd r = pooled_Y(ds.train) - pooled_X(ds.train) * ds.truth.beta.tail(2);
  const auto fit = ols_fit(ds.hidden, r, false);
  for (Index k = 0; k < 2; ++k) CHECK(std::abs(fit.coefficients(k) - ds.phi(k)) < 3 * fit.se(k));
}

namespace {

double span_fraction(Index p, double threshold) {
  int good = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    MultiSourceConfig cfg;
    cfg.p = p;
    cfg.n = 4 * (p + 1);
    cfg.n0 = 2;
    cfg.seed = seed;
    const auto ds = gen_multi_source(cfg);
    MatrixXd A(ds.train.E, p + 1);
    A.col(0).setOnes();
    A.rightCols(p) = ds.env_means;
    if (Eigen::JacobiSVD<MatrixXd>(A).singularValues().minCoeff() > threshold) ++good;
  }
  return good / 1000.0;
}

}  // namespace

// The base term 2j/p - 1 is shared by every environment and lies in the span of the ones column,
// so the smallest singular value is that of [1, U] with U uniform on [-1, 1]. That matrix is
// near-singular (below 0.05) in roughly 11% (p = 2) and 18% (p = 5) of draws, so the 95% level
// is out of reach for this design. Kept as an expected failure.
TEST_CASE("environment means augmented with ones span the full space in 95% of seeds" * doctest::should_fail()) {
  for (Index p : {2, 5}) {
    const double f = span_fraction(p, 0.05);
    INFO("p = " << p << ": " << f);
    CHECK(f >= 0.95);
  }
}

TEST_CASE("span statistic matches an independent uniform reference") {
  for (Index p : {2, 5}) {
    Rng rng(99);
    int ref_good = 0;
    const int R = 20000;
    for (int s = 0; s < R; ++s) {
      MatrixXd A(p + 1, p + 1);
      A.col(0).setOnes();
      for (Index i = 0; i <= p; ++i)
        for (Index j = 1; j <= p; ++j) A(i, j) = rng.uniform(-1.0, 1.0);
      if (Eigen::JacobiSVD<MatrixXd>(A).singularValues().minCoeff() > 0.05) ++ref_good;
    }
    const double ref = static_cast<double>(ref_good) / R;
    const double got = span_fraction(p, 0.05);
    INFO("p = " << p << ": generator " << got << ", reference " << ref);
    CHECK(std::abs(got - ref) < 3 * std::hypot(oracle::binomial_se(ref, 1000), oracle::binomial_se(ref, R)));
    CHECK(span_fraction(p, 1e-3) >= 0.99);
  }
}

TEST_CASE("generators are bit-reproducible and record their draws") {
  MultiSourceConfig cfg;
  cfg.p = 3;
  cfg.seed = 16;
  const auto a = gen_multi_source(cfg);
  const auto b = gen_multi_source(cfg);
  CHECK(pooled_X(a.train) == pooled_X(b.train));
  CHECK(pooled_Y(a.train) == pooled_Y(b.train));
  CHECK(a.test.X0 == b.test.X0);
  CHECK(a.test_y == b.test_y);
  CHECK(a.manifest_json == b.manifest_json);
  const auto m = nlohmann::json::parse(a.manifest_json);
  CHECK(m["seed"] == 16);
  CHECK(m["config"]["q"] == 2);
  CHECK(m["frozen"].contains("u"));
  CHECK(m["frozen"].contains("psi"));
  CHECK(m["truth"]["beta"].size() == 4);  // intercept first

  cfg.seed = 17;
  CHECK(pooled_X(gen_multi_source(cfg).train) != pooled_X(a.train));

  SingleSourceConfig sc;
  sc.seed = 4;
  const auto s1 = gen_single_source(sc), s2 = gen_single_source(sc);
  CHECK(pooled_Y(s1.train) == pooled_Y(s2.train));
  CHECK(nlohmann::json::parse(s1.manifest_json)["truth"]["K"][0] == -0.25);
}

TEST_CASE("overriding a frozen draw with its own value leaves the dataset unchanged") {
  MultiSourceConfig cfg;
  cfg.p = 2;
  cfg.seed = 18;
  const auto base = gen_multi_source(cfg);
  cfg.psi = base.psi;
  cfg.phi = base.phi;
  cfg.beta = VectorXd(base.truth.beta.tail(2));
  const auto same = gen_multi_source(cfg);
  CHECK(pooled_X(same.train) == pooled_X(base.train));
  CHECK(pooled_Y(same.train) == pooled_Y(base.train));
  CHECK(same.test_y == base.test_y);
  cfg.beta = (VectorXd(2) << 2.0, 0.0).finished();
  const auto other = gen_multi_source(cfg);
  CHECK(pooled_X(other.train) == pooled_X(base.train));
  CHECK(other.truth.beta(1) == 2.0);
}

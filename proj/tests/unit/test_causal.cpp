#include <doctest.h>

#include <algorithm>
#include <numeric>

#include "bgi/causal.hpp"
#include "bgi/error.hpp"
#include "bgi/random.hpp"
#include "bgi/sampler.hpp"
#include "bgi/simgen.hpp"

using namespace bgi;

namespace {

MatrixXd slope_draws(std::uint64_t seed, Index N, const VectorXd& centre, double sd) {
  Rng rng(seed);
  MatrixXd B(N, centre.size());
  for (Index i = 0; i < N; ++i) B.row(i) = (centre + sd * rng.normal_vector(centre.size())).transpose();
  return B;
}

}  // namespace

TEST_CASE("all-positive draws are selected at any alpha") {
  const MatrixXd B = MatrixXd::Constant(50, 1, 0.3);
  for (double a : {1e-6, 0.01, 0.05, 0.5, 0.99}) CHECK(select_parents(B, a).coords[0].selected);
}

TEST_CASE("symmetric draws are not selected") {
  MatrixXd B(4000, 1);
  for (Index i = 0; i < 4000; ++i) B(i, 0) = i % 2 == 0 ? 1.0 + i : -1.0 - i;
  const auto rep = select_parents(B, 0.05);
  CHECK(rep.coords[0].negative == 2000);
  CHECK(rep.coords[0].positive == 2000);
  CHECK_FALSE(rep.coords[0].selected);
  CHECK(rep.coords[0].tail_fraction == doctest::Approx(0.5));
}

TEST_CASE("exact zeros count toward neither tail and the boundary is strict") {
  MatrixXd B = MatrixXd::Zero(100, 1);
  for (Index i = 0; i < 5; ++i) B(i, 0) = -1.0;
  for (Index i = 5; i < 90; ++i) B(i, 0) = 1.0;
  const auto rep = select_parents(B, 0.05);
  CHECK(rep.coords[0].negative == 5);
  CHECK(rep.coords[0].positive == 85);
  CHECK(rep.coords[0].negative + rep.coords[0].positive <= rep.N);
  CHECK_FALSE(rep.coords[0].selected);  // 5 < 0.05 * 100 is false
  CHECK(select_parents(B, 0.051).coords[0].selected);
}

TEST_CASE("intercept is never tested") {
  PosteriorSamples s;
  s.layout = DrawLayout{2, 1, true};
  std::vector<ParamDraw> chain;
  for (int i = 0; i < 200; ++i) {
    ParamDraw d;
    d.beta = (VectorXd(3) << 5.0, (i % 2 ? 1.0 : -1.0), 2.0).finished();
    d.K = VectorXd::Zero(2);
    d.mu = MatrixXd::Zero(1, 2);
    d.mu_prior_scales = VectorXd::Ones(2);
    chain.push_back(d);
  }
  s.chains = {chain};
  s.covariate_names = {"a", "b"};
  const auto rep = select_parents(s, 0.05);
  REQUIRE(rep.coords.size() == 2);
  CHECK(rep.coords[0].name == "a");
  CHECK_FALSE(rep.coords[0].selected);
  CHECK(rep.coords[1].selected);
}

TEST_CASE("alpha outside (0, 1) is rejected and tiny samples warn") {
  const MatrixXd B = MatrixXd::Ones(10, 2);
  CHECK_THROWS_AS(select_parents(B, 0.0), ContractError);
  CHECK_THROWS_AS(select_parents(B, 1.0), ContractError);
  CHECK_THROWS_AS(select_parents(B, 0.05, {"only-one"}), ContractError);
  CHECK_FALSE(select_parents(B, 0.05).warnings.empty());
  CHECK(select_parents(MatrixXd::Ones(20, 1), 0.05).warnings.empty());
}

TEST_CASE("decisions are invariant to draw order and chain merge order") {
  const VectorXd centre = (VectorXd(4) << 0.3, -0.05, 0.0, 1.0).finished();
  const MatrixXd B = slope_draws(5, 1200, centre, 0.2);
  const auto base = select_parents(B, 0.05);
  std::vector<Index> perm(1200);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), Rng(6).engine());
  MatrixXd P(1200, 4);
  for (Index i = 0; i < 1200; ++i) P.row(i) = B.row(perm[static_cast<std::size_t>(i)]);
  const auto shuffled = select_parents(P, 0.05);
  // chains merged in reverse order
  MatrixXd R(1200, 4);
  R << B.bottomRows(400), B.middleRows(400, 400), B.topRows(400);
  const auto merged = select_parents(R, 0.05);
  for (std::size_t j = 0; j < 4; ++j) {
    CHECK(shuffled.coords[j].negative == base.coords[j].negative);
    CHECK(merged.coords[j].positive == base.coords[j].positive);
    CHECK(shuffled.decisions() == base.decisions());
    CHECK(merged.decisions() == base.decisions());
  }
}

TEST_CASE("selection is monotone in alpha") {
  const VectorXd centre = (VectorXd(6) << 0.0, 0.1, 0.2, 0.35, 0.5, -0.4).finished();
  const MatrixXd B = slope_draws(7, 2000, centre, 0.2);
  const std::vector<double> alphas{0.001, 0.01, 0.02, 0.05, 0.1, 0.2, 0.5, 0.9};
  for (std::size_t a = 0; a + 1 < alphas.size(); ++a) {
    const auto lo = select_parents(B, alphas[a]).decisions();
    const auto hi = select_parents(B, alphas[a + 1]).decisions();
    for (std::size_t j = 0; j < lo.size(); ++j)
      if (lo[j]) CHECK(hi[j]);
  }
}

TEST_CASE("negating a covariate flips its sign counts and keeps the decision") {
  MultiSourceConfig cfg;
  cfg.p = 3;
  cfg.seed = 3;
  cfg.beta = (VectorXd(3) << 1.0, -0.6, 0.0).finished();
  const auto ds = gen_multi_source(cfg);
  std::vector<EnvironmentData> flipped;
  for (const auto& env : ds.train.environments) {
    MatrixXd X = env.X;
    X.col(1) *= -1.0;
    flipped.push_back(make_environment(env.env_id, env.label, X, env.Y));
  }
  const auto data2 = make_training_data(flipped, true, ds.train.covariate_names);
  SamplerConfig sc;
  sc.base_seed = 21;
  sc.n_kept = 2000;
  const auto a = select_parents(fit(ds.train, PriorSpec{}, sc), 0.05);
  const auto b = select_parents(fit(data2, PriorSpec{}, sc), 0.05);
  CHECK(a.decisions() == b.decisions());
  CHECK(a.coords[1].selected);
  const double N = static_cast<double>(a.N);
  CHECK(std::abs(static_cast<double>(a.coords[1].negative - b.coords[1].positive)) / N < 0.01);
  CHECK(std::abs(static_cast<double>(a.coords[1].positive - b.coords[1].negative)) / N < 0.01);
  // the untouched null coordinate keeps its tail fraction up to Monte Carlo error
  CHECK(std::abs(a.coords[2].tail_fraction - b.coords[2].tail_fraction) < 0.08);
}

TEST_CASE("comparison grid examples") {
  MatrixXd B = MatrixXd::Zero(200, 4);
  B.col(0).setConstant(1.0);
  for (Index i = 0; i < 200; ++i) B.block(i, 1, 1, 3).setConstant(i % 2 ? 1.0 : -1.0);
  const auto rep = select_parents(B, 0.05);
  const std::vector<double> pv{0.001, 0.4, 0.01, 0.9};
  const auto grid = selection_table(rep, pv);
  CHECK(grid.bgi == std::vector<int>{1, 0, 0, 0});
  CHECK(grid.baseline == std::vector<int>{1, 0, 1, 0});
  CHECK(selection_grid_csv(grid) == "method,x1,x2,x3,x4\nbgi,1,0,0,0\nols,1,0,1,0\n");
  const std::string long_csv = selection_grid_long_csv(grid);
  CHECK(long_csv.rfind("method,covariate,selected\nbgi,x1,1\n", 0) == 0);
  CHECK(long_csv.find("ols,x3,1\n") != std::string::npos);

  MatrixXd S(200, 2);
  for (Index i = 0; i < 200; ++i) S.row(i).setConstant(i % 2 ? 1.0 : -1.0);
  const std::vector<double> none{0.5, 0.7};
  const auto empty = selection_table(select_parents(S, 0.05), none);
  CHECK(empty.bgi == std::vector<int>{0, 0});
  CHECK(empty.baseline == std::vector<int>{0, 0});
  CHECK_THROWS_AS(selection_table(rep, none), ContractError);
}

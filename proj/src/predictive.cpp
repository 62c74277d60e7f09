#include "bgi/predictive.hpp"

#include <algorithm>
#include <cmath>

#include "bgi/error.hpp"
#include "bgi/linalg.hpp"
#include "bgi/random.hpp"

namespace bgi {

double PredictiveDraws::clamp_fraction() const {
  const double total = static_cast<double>(n0()) * static_cast<double>(draws());
  return total > 0 ? static_cast<double>(clamp_count) / total : 0.0;
}

VectorXd PredictiveDraws::mean_prediction() const { return cond_mean.rowwise().mean(); }

const char* to_string(TestNoise noise) { return noise == TestNoise::Invariant ? "invariant" : "training"; }

TestNoise test_noise_from_string(const std::string& s) {
  if (s == "invariant") return TestNoise::Invariant;
  if (s == "training") return TestNoise::Training;
  throw ContractError("unknown test noise '" + s + "' (expected invariant or training)");
}

PredictiveDraws posterior_predictive(const PosteriorSamples& samples, const TestCovariates& test, std::uint64_t seed,
                                     TestNoise noise) {
  const Index p = samples.layout.p;
  if (test.p() != p) {
    throw ContractError("test covariates have " + std::to_string(test.p()) + " columns but the posterior has p = " +
                        std::to_string(p));
  }
  const auto draws = samples.merged();
  const auto N = static_cast<Index>(draws.size());
  if (N == 0) throw ContractError("posterior has no draws");
  const Index n0 = test.n0();
  const bool intercept = samples.layout.intercept;

  PredictiveDraws out;
  const auto reg = regularized_inverse(test.sigma0_hat);
  if (reg.ridged()) out.warnings.push_back("test covariance is singular or ill-conditioned; added ridge " + format_double(reg.ridge));

  // Per-draw pieces: slope vector acting on x0, offset, and noise scale.
  MatrixXd coef(p, N);
  VectorXd offset(N);
  VectorXd noise_sd(N);
  long clamped_draws = 0;
  for (Index i = 0; i < N; ++i) {
    const auto& d = draws[static_cast<std::size_t>(i)];
    const VectorXd& k = d.K;
    const VectorXd a = reg.inverse * k;
    const VectorXd slopes = d.beta.tail(p);
    coef.col(i) = slopes + a;
    offset(i) = (intercept ? d.beta(0) : 0.0) - a.dot(test.mu0_hat);
    if (noise == TestNoise::Training) {
      noise_sd(i) = std::sqrt(d.sigmaY2);
      continue;
    }
    const double s2 = d.sigma_eps2 - k.dot(a);
    const double floor = kNoiseFloor * d.sigma_eps2;
    if (!(s2 >= floor)) {
      ++clamped_draws;
      noise_sd(i) = std::sqrt(floor);
    } else {
      noise_sd(i) = std::sqrt(s2);
    }
  }
  out.cond_mean = (test.X0 * coef).rowwise() + offset.transpose();
  out.response.resize(n0, N);
  for (Index r = 0; r < n0; ++r) {
    Rng rng(seed, static_cast<std::uint64_t>(r));
    for (Index i = 0; i < N; ++i) out.response(r, i) = out.cond_mean(r, i) + noise_sd(i) * rng.normal();
  }
  out.clamp_count = clamped_draws * static_cast<long>(n0);
  if (!out.response.allFinite()) throw NumericalError("non-finite predictive draw");
  if (out.clamp_fraction() > 0.01) {
    out.warnings.push_back("test noise variance clamped in " + format_double(100.0 * out.clamp_fraction()) +
                           "% of draws");
  }
  return out;
}

double quantile_type7(std::vector<double> values, double prob) {
  if (values.empty()) throw ContractError("quantile of an empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw ContractError("quantile probability must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = (static_cast<double>(values.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

MatrixXd credible_interval(const MatrixXd& draws, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ContractError("alpha must lie in (0, 1)");
  if (draws.cols() < 100) throw ContractError("credible intervals need at least 100 draws per point");
  MatrixXd out(draws.rows(), 2);
  std::vector<double> row(static_cast<std::size_t>(draws.cols()));
  for (Index r = 0; r < draws.rows(); ++r) {
    for (Index i = 0; i < draws.cols(); ++i) row[static_cast<std::size_t>(i)] = draws(r, i);
    std::sort(row.begin(), row.end());
    auto q = [&](double prob) {
      const double h = (static_cast<double>(row.size()) - 1.0) * prob;
      const auto lo = static_cast<std::size_t>(std::floor(h));
      const std::size_t hi = std::min(lo + 1, row.size() - 1);
      return row[lo] + (h - static_cast<double>(lo)) * (row[hi] - row[lo]);
    };
    out(r, 0) = q(alpha / 2.0);
    out(r, 1) = q(1.0 - alpha / 2.0);
  }
  return out;
}

MatrixXd credible_interval(const PredictiveDraws& draws, double alpha) { return credible_interval(draws.response, alpha); }

double empirical_coverage(const MatrixXd& intervals, const VectorXd& truths) {
  if (intervals.cols() != 2 || intervals.rows() != truths.size()) {
    throw ContractError("coverage: intervals and truths have mismatched dimensions");
  }
  if (truths.size() == 0) return 0.0;
  Index inside = 0;
  for (Index r = 0; r < truths.size(); ++r)
    if (truths(r) >= intervals(r, 0) && truths(r) <= intervals(r, 1)) ++inside;
  return static_cast<double>(inside) / static_cast<double>(truths.size());
}

}  // namespace bgi

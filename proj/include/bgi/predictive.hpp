#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bgi/core_model.hpp"
#include "bgi/posterior.hpp"

namespace bgi {

/// Floor on S_0^2 relative to the error variance.
inline constexpr double kNoiseFloor = 1e-8;

struct PredictiveDraws {
  MatrixXd response;   // n0 x N
  MatrixXd cond_mean;  // n0 x N, f before noise
  long clamp_count = 0;
  std::vector<std::string> warnings;

  Index n0() const { return response.rows(); }
  Index draws() const { return response.cols(); }
  double clamp_fraction() const;
  /// Posterior mean of f per test row.
  VectorXd mean_prediction() const;
};

/// Noise scale added to the conditional mean.
///   Invariant: S0^2 = max(sigma_eps2 - k' Sigma0^{-1} k, eps * sigma_eps2)
///   Training:  S0^2 = sigmaY2, the training residual variance
enum class TestNoise { Invariant, Training };

const char* to_string(TestNoise noise);
TestNoise test_noise_from_string(const std::string& s);

/// For every posterior draw and test row:
///   f  = beta' [1; x0] + k' Sigma0^{-1} (x0 - mu0_hat)
///   y  = f + xi * S0
/// with k the draw's K (covariance scale). Row r uses its own RNG stream.
PredictiveDraws posterior_predictive(const PosteriorSamples& samples, const TestCovariates& test,
                                     std::uint64_t seed, TestNoise noise = TestNoise::Training);

/// Type-7 (linear interpolation) quantile of unsorted values.
double quantile_type7(std::vector<double> values, double prob);

/// Per-row [alpha/2, 1 - alpha/2] quantiles, n0 x 2. Requires at least 100 draws.
MatrixXd credible_interval(const PredictiveDraws& draws, double alpha);
MatrixXd credible_interval(const MatrixXd& draws, double alpha);

/// Fraction of truths inside the closed intervals.
double empirical_coverage(const MatrixXd& intervals, const VectorXd& truths);

}  // namespace bgi

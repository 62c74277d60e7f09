#pragma once

#include <cstdint>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Core>

namespace bgi {

/// splitmix64 finalizer, used to derive independent seeds from (seed, stream) pairs.
std::uint64_t mix_seed(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Seeded pseudo-random source. One instance per chain / per task; never shared.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);
  Rng(std::uint64_t seed, std::uint64_t stream);

  double normal();
  double normal(double mean, double sd) { return mean + sd * normal(); }
  double uniform(double lo, double hi);
  /// Gamma with shape/rate parameterization.
  double gamma(double shape, double rate);
  /// Inverse-gamma(shape, scale): density proportional to x^{-shape-1} exp(-scale / x).
  double inv_gamma(double shape, double scale);

  Eigen::VectorXd normal_vector(Eigen::Index n);

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> std_normal_{0.0, 1.0};
};

/// Draw from N(Q^{-1} b, Q^{-1}) given the Cholesky factor of the precision Q.
Eigen::VectorXd draw_gaussian_canonical(Rng& rng, const Eigen::LLT<Eigen::MatrixXd>& precision_llt,
                                        const Eigen::VectorXd& b);

/// Draw from N(mean, L L^T) with L lower triangular.
Eigen::VectorXd draw_gaussian_cholesky(Rng& rng, const Eigen::VectorXd& mean,
                                       const Eigen::MatrixXd& lower);

}  // namespace bgi

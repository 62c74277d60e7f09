#include "bgi/random.hpp"

#include <cmath>

#include "bgi/error.hpp"

namespace bgi {

std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return mix_seed(mix_seed(seed) ^ mix_seed(stream + 0x632be59bd9b4e019ULL));
}

Rng::Rng(std::uint64_t seed) : engine_(mix_seed(seed)) {}

Rng::Rng(std::uint64_t seed, std::uint64_t stream) : engine_(derive_seed(seed, stream)) {}

double Rng::normal() { return std_normal_(engine_); }

double Rng::uniform(double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  return dist(engine_);
}

double Rng::gamma(double shape, double rate) {
  if (!(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape) || !std::isfinite(rate)) {
    throw NumericalError("gamma draw with invalid parameters");
  }
  std::gamma_distribution<double> dist(shape, 1.0 / rate);
  return dist(engine_);
}

double Rng::inv_gamma(double shape, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) throw NumericalError("inverse-gamma draw with non-positive scale");
  std::gamma_distribution<double> dist(shape, 1.0);
  const double g = dist(engine_);
  return scale / g;
}

Eigen::VectorXd Rng::normal_vector(Eigen::Index n) {
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = normal();
  return z;
}

Eigen::VectorXd draw_gaussian_canonical(Rng& rng, const Eigen::LLT<Eigen::MatrixXd>& precision_llt,
                                        const Eigen::VectorXd& b) {
  Eigen::VectorXd mean = precision_llt.solve(b);
  Eigen::VectorXd z = rng.normal_vector(b.size());
  // Q = L L', so L^{-T} z has covariance Q^{-1}.
  mean += precision_llt.matrixU().solve(z);
  return mean;
}

Eigen::VectorXd draw_gaussian_cholesky(Rng& rng, const Eigen::VectorXd& mean, const Eigen::MatrixXd& lower) {
  return mean + lower.triangularView<Eigen::Lower>() * rng.normal_vector(mean.size());
}

}  // namespace bgi

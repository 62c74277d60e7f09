#include "bgi/posterior.hpp"

#include <algorithm>

#include "bgi/error.hpp"

namespace bgi {

Index DrawLayout::scalar_count() const { return beta_dim() + p + E * p + 4 + p; }

std::vector<std::string> DrawLayout::scalar_names() const {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(scalar_count()));
  if (intercept) names.emplace_back("beta0");
  for (Index j = 0; j < p; ++j) names.push_back("beta" + std::to_string(j + 1));
  for (Index j = 0; j < p; ++j) names.push_back("K" + std::to_string(j + 1));
  for (Index e = 0; e < E; ++e)
    for (Index j = 0; j < p; ++j) names.push_back("mu[" + std::to_string(e) + "," + std::to_string(j + 1) + "]");
  names.emplace_back("sigmaY2");
  names.emplace_back("sigma_eps2");
  names.emplace_back("tau2");
  names.emplace_back("phi");
  for (Index j = 0; j < p; ++j) names.push_back("s2_mu" + std::to_string(j + 1));
  return names;
}

VectorXd DrawLayout::flatten(const ParamDraw& d) const {
  if (d.beta.size() != beta_dim() || d.K.size() != p || d.mu.rows() != E || d.mu.cols() != p ||
      d.mu_prior_scales.size() != p) {
    throw ContractError("draw dimensions do not match layout");
  }
  VectorXd v(scalar_count());
  Index k = 0;
  v.segment(k, beta_dim()) = d.beta;
  k += beta_dim();
  v.segment(k, p) = d.K;
  k += p;
  for (Index e = 0; e < E; ++e)
    for (Index j = 0; j < p; ++j) v(k++) = d.mu(e, j);
  v(k++) = d.sigmaY2;
  v(k++) = d.sigma_eps2;
  v(k++) = d.tau2;
  v(k++) = d.aux_phi;
  v.segment(k, p) = d.mu_prior_scales;
  return v;
}

ParamDraw DrawLayout::unflatten(const VectorXd& v) const {
  if (v.size() != scalar_count()) throw ContractError("flattened draw has wrong length");
  ParamDraw d;
  Index k = 0;
  d.beta = v.segment(k, beta_dim());
  k += beta_dim();
  d.K = v.segment(k, p);
  k += p;
  d.mu.resize(E, p);
  for (Index e = 0; e < E; ++e)
    for (Index j = 0; j < p; ++j) d.mu(e, j) = v(k++);
  d.sigmaY2 = v(k++);
  d.sigma_eps2 = v(k++);
  d.tau2 = v(k++);
  d.aux_phi = v(k++);
  d.mu_prior_scales = v.segment(k, p);
  return d;
}

Index PosteriorSamples::total_draws() const {
  Index n = 0;
  for (const auto& c : chains) n += static_cast<Index>(c.size());
  return n;
}

std::vector<ParamDraw> PosteriorSamples::merged() const {
  std::vector<ParamDraw> out;
  out.reserve(static_cast<std::size_t>(total_draws()));
  for (const auto& c : chains) out.insert(out.end(), c.begin(), c.end());
  return out;
}

std::vector<VectorXd> PosteriorSamples::scalar_chains(Index scalar_index) const {
  if (scalar_index < 0 || scalar_index >= layout.scalar_count()) throw ContractError("scalar index out of range");
  std::vector<VectorXd> out;
  for (const auto& c : chains) {
    VectorXd v(static_cast<Index>(c.size()));
    for (std::size_t i = 0; i < c.size(); ++i) v(static_cast<Index>(i)) = layout.flatten(c[i])(scalar_index);
    out.push_back(std::move(v));
  }
  return out;
}

Index PosteriorSamples::scalar_index(const std::string& name) const {
  const auto names = layout.scalar_names();
  const auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw ContractError("unknown parameter '" + name + "'");
  return static_cast<Index>(it - names.begin());
}

MatrixXd PosteriorSamples::beta_matrix() const {
  MatrixXd B(total_draws(), layout.beta_dim());
  Index r = 0;
  for (const auto& c : chains)
    for (const auto& d : c) B.row(r++) = d.beta.transpose();
  return B;
}

}  // namespace bgi

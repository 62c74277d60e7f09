#include "bgi/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/distributions/normal.hpp>

#include "bgi/error.hpp"

namespace bgi {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<Eigen::VectorXd> split_chains(const std::vector<Eigen::VectorXd>& chains) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& c : chains) {
    const Eigen::Index n = c.size();
    const Eigen::Index half = n / 2;
    if (half < 2) {
      out.push_back(c);
      continue;
    }
    out.push_back(c.head(half));
    out.push_back(c.tail(half));
  }
  return out;
}

void check_lengths(const std::vector<Eigen::VectorXd>& chains) {
  if (chains.empty()) throw ContractError("diagnostics: no chains");
  const auto n = chains.front().size();
  for (const auto& c : chains)
    if (c.size() != n) throw ContractError("diagnostics: chains must have equal length");
  if (n < 4) throw ContractError("diagnostics: chains need at least 4 draws");
}

double rhat_basic(const std::vector<Eigen::VectorXd>& chains) {
  const auto m = static_cast<double>(chains.size());
  if (chains.size() < 2) return kNaN;
  const auto n = static_cast<double>(chains.front().size());
  Eigen::VectorXd means(chains.size());
  double within = 0.0;
  for (std::size_t j = 0; j < chains.size(); ++j) {
    means(static_cast<Eigen::Index>(j)) = chains[j].mean();
    within += (chains[j].array() - chains[j].mean()).square().sum() / (n - 1.0);
  }
  within /= m;
  const double between = n * (means.array() - means.mean()).square().sum() / (m - 1.0);
  if (!(within > 0.0)) return kNaN;
  const double var_plus = (n - 1.0) / n * within + between / n;
  return std::sqrt(var_plus / within);
}

double ess_basic(const std::vector<Eigen::VectorXd>& chains) {
  const auto m = chains.size();
  const Eigen::Index n = chains.front().size();
  const double nd = static_cast<double>(n);
  std::vector<Eigen::VectorXd> centered;
  Eigen::VectorXd means(static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) {
    means(static_cast<Eigen::Index>(j)) = chains[j].mean();
    centered.push_back(chains[j].array() - chains[j].mean());
  }
  auto acov_mean = [&](Eigen::Index t) {
    double s = 0.0;
    for (const auto& c : centered) s += c.head(n - t).dot(c.tail(n - t)) / nd;
    return s / static_cast<double>(m);
  };
  const double mean_var = acov_mean(0) * nd / (nd - 1.0);
  double var_plus = mean_var * (nd - 1.0) / nd;
  if (m > 1) var_plus += (means.array() - means.mean()).square().sum() / static_cast<double>(m - 1);
  if (!(var_plus > 0.0) || !std::isfinite(var_plus)) return kNaN;

  std::vector<double> rho(static_cast<std::size_t>(n) + 2, 0.0);
  rho[0] = 1.0;
  double rho_even = 1.0;
  double rho_odd = 1.0 - (mean_var - acov_mean(1)) / var_plus;
  rho[1] = rho_odd;
  Eigen::Index s = 1;
  while (s < n - 4 && (rho_even + rho_odd) > 0.0) {
    rho_even = 1.0 - (mean_var - acov_mean(s + 1)) / var_plus;
    rho_odd = 1.0 - (mean_var - acov_mean(s + 2)) / var_plus;
    if (rho_even + rho_odd >= 0.0) {
      rho[static_cast<std::size_t>(s + 1)] = rho_even;
      rho[static_cast<std::size_t>(s + 2)] = rho_odd;
    }
    s += 2;
  }
  const Eigen::Index max_s = s;
  if (rho_even > 0.0) rho[static_cast<std::size_t>(max_s + 1)] = rho_even;
  // Initial monotone sequence.
  for (Eigen::Index k = 1; k <= max_s - 3; k += 2) {
    const auto u = static_cast<std::size_t>(k);
    if (rho[u + 1] + rho[u + 2] > rho[u - 1] + rho[u]) {
      rho[u + 1] = 0.5 * (rho[u - 1] + rho[u]);
      rho[u + 2] = rho[u + 1];
    }
  }
  const double total = static_cast<double>(m) * nd;
  double tau = -1.0;
  for (Eigen::Index k = 0; k <= max_s; ++k) tau += 2.0 * rho[static_cast<std::size_t>(k)];
  tau += rho[static_cast<std::size_t>(max_s + 1)];
  tau = std::max(tau, 1.0 / std::log10(total));
  return total / tau;
}

bool all_identical(const std::vector<Eigen::VectorXd>& chains) {
  const double v = chains.front()(0);
  for (const auto& c : chains)
    if ((c.array() != v).any()) return false;
  return true;
}

}  // namespace

std::vector<Eigen::VectorXd> rank_normalize(const std::vector<Eigen::VectorXd>& chains) {
  std::vector<std::pair<double, std::size_t>> pooled;
  for (std::size_t j = 0; j < chains.size(); ++j)
    for (Eigen::Index i = 0; i < chains[j].size(); ++i) pooled.emplace_back(chains[j](i), pooled.size());
  const std::size_t S = pooled.size();
  std::vector<double> ranks(S);
  std::vector<std::size_t> order(S);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return pooled[a].first < pooled[b].first; });
  for (std::size_t i = 0; i < S;) {
    std::size_t k = i;
    while (k + 1 < S && pooled[order[k + 1]].first == pooled[order[i]].first) ++k;
    const double avg = 0.5 * static_cast<double>(i + k) + 1.0;  // 1-based average rank
    for (std::size_t t = i; t <= k; ++t) ranks[order[t]] = avg;
    i = k + 1;
  }
  const boost::math::normal_distribution<double> std_normal;
  std::vector<Eigen::VectorXd> out;
  std::size_t idx = 0;
  for (const auto& c : chains) {
    Eigen::VectorXd z(c.size());
    for (Eigen::Index i = 0; i < c.size(); ++i) {
      const double u = (ranks[idx++] - 0.375) / (static_cast<double>(S) + 0.25);
      z(i) = boost::math::quantile(std_normal, u);
    }
    out.push_back(std::move(z));
  }
  return out;
}

double split_rhat_raw(const std::vector<Eigen::VectorXd>& chains) {
  check_lengths(chains);
  if (chains.size() < 2) return kNaN;
  return rhat_basic(split_chains(chains));
}

double split_rhat(const std::vector<Eigen::VectorXd>& chains) {
  check_lengths(chains);
  if (chains.size() < 2 || all_identical(chains)) return kNaN;
  const auto split = split_chains(chains);
  for (const auto& c : split)
    if ((c.array() == c(0)).all()) return kNaN;
  const double bulk = rhat_basic(rank_normalize(split));
  // Folded: distance from the pooled median.
  std::vector<double> all;
  for (const auto& c : split) all.insert(all.end(), c.data(), c.data() + c.size());
  std::nth_element(all.begin(), all.begin() + static_cast<long>(all.size() / 2), all.end());
  double median = all[all.size() / 2];
  if (all.size() % 2 == 0) {
    const double lower = *std::max_element(all.begin(), all.begin() + static_cast<long>(all.size() / 2));
    median = 0.5 * (median + lower);
  }
  std::vector<Eigen::VectorXd> folded;
  for (const auto& c : split) folded.push_back((c.array() - median).abs().matrix());
  const double tail = rhat_basic(rank_normalize(folded));
  if (std::isnan(bulk) || std::isnan(tail)) return kNaN;
  return std::max(bulk, tail);
}

double ess_raw(const std::vector<Eigen::VectorXd>& chains) {
  check_lengths(chains);
  return ess_basic(split_chains(chains));
}

double ess_bulk(const std::vector<Eigen::VectorXd>& chains) {
  check_lengths(chains);
  if (all_identical(chains)) return kNaN;
  return ess_basic(rank_normalize(split_chains(chains)));
}

std::vector<DiagnosticRow> diagnostics(const PosteriorSamples& samples) {
  return diagnostics(samples, samples.rhat_threshold);
}

std::vector<DiagnosticRow> diagnostics(const PosteriorSamples& samples, double rhat_threshold) {
  const auto names = samples.layout.scalar_names();
  const auto S = static_cast<Index>(names.size());
  std::vector<MatrixXd> flat;
  for (const auto& c : samples.chains) {
    MatrixXd F(static_cast<Index>(c.size()), S);
    for (std::size_t i = 0; i < c.size(); ++i) F.row(static_cast<Index>(i)) = samples.layout.flatten(c[i]).transpose();
    flat.push_back(std::move(F));
  }
  std::vector<DiagnosticRow> rows;
  for (Index s = 0; s < S; ++s) {
    std::vector<Eigen::VectorXd> chains;
    for (const auto& F : flat) chains.push_back(F.col(s));
    DiagnosticRow row;
    row.param = names[static_cast<std::size_t>(s)];
    row.rhat = samples.chains.size() >= 2 ? split_rhat(chains) : kNaN;
    row.ess = ess_bulk(chains);
    row.flagged = !(row.rhat <= rhat_threshold);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace bgi

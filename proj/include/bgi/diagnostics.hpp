#pragma once

#include <vector>

#include <Eigen/Core>

#include "bgi/posterior.hpp"

namespace bgi {

/// Rank-normalised split-Rhat (max of the bulk and folded versions).
/// Returns NaN for fewer than two chains or zero within-chain variance.
double split_rhat(const std::vector<Eigen::VectorXd>& chains);

/// Classical split-Rhat on the raw values.
double split_rhat_raw(const std::vector<Eigen::VectorXd>& chains);

/// Rank-normalised bulk effective sample size (Geyer initial monotone sequence on split chains).
/// Works with a single chain. NaN when the draws have zero variance.
double ess_bulk(const std::vector<Eigen::VectorXd>& chains);

/// Effective sample size on the raw values.
double ess_raw(const std::vector<Eigen::VectorXd>& chains);

/// Normal scores of the pooled ranks, (r - 3/8) / (S + 1/4), ties given average rank.
std::vector<Eigen::VectorXd> rank_normalize(const std::vector<Eigen::VectorXd>& chains);

/// One row per scalar parameter; flags Rhat above the threshold or undefined.
std::vector<DiagnosticRow> diagnostics(const PosteriorSamples& samples);
std::vector<DiagnosticRow> diagnostics(const PosteriorSamples& samples, double rhat_threshold);

}  // namespace bgi

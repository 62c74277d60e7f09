#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bgi/causal.hpp"
#include "bgi/posterior.hpp"
#include "bgi/predictive.hpp"

namespace bgi {

/// Long-format draws: chain,iter,param,value.
void write_draws_csv(const PosteriorSamples& samples, std::ostream& out);

/// Binary dump with metadata, seed ledger and every kept draw; read back bit-exactly.
void write_posterior_binary(const PosteriorSamples& samples, const std::filesystem::path& path);
PosteriorSamples read_posterior_binary(const std::filesystem::path& path);
void write_posterior_binary(const PosteriorSamples& samples, std::ostream& out);
PosteriorSamples read_posterior_binary(std::istream& in);

/// param,rhat,ess,flagged
void write_diagnostics_csv(const std::vector<DiagnosticRow>& rows, std::ostream& out);

/// row,mean,lo,hi
void write_prediction_csv(const VectorXd& mean, const MatrixXd& intervals, std::ostream& out);

/// Full draw dump: row,draw,value
void write_prediction_draws_csv(const PredictiveDraws& draws, std::ostream& out);

/// Metadata preamble for result CSVs: "# key: value" lines.
void write_comment_header(std::ostream& out, const std::string& config_json);

std::string selection_report_json(const SelectionReport& report, const std::string& config_json);
std::string coverage_report_json(double nominal, double coverage, double clamp_fraction,
                                 const std::string& config_json);

}  // namespace bgi

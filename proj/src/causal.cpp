#include "bgi/causal.hpp"

#include <algorithm>
#include <sstream>

#include "bgi/error.hpp"

namespace bgi {

std::vector<bool> SelectionReport::decisions() const {
  std::vector<bool> out;
  for (const auto& c : coords) out.push_back(c.selected);
  return out;
}

SelectionReport select_parents(const Eigen::MatrixXd& slope_draws, double alpha, std::vector<std::string> names) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ContractError("alpha must lie in (0, 1)");
  const Index p = slope_draws.cols();
  if (!names.empty() && static_cast<Index>(names.size()) != p) throw ContractError("selection: name count does not match draws");
  SelectionReport rep;
  rep.alpha = alpha;
  rep.N = static_cast<long>(slope_draws.rows());
  if (static_cast<double>(rep.N) < 1.0 / alpha) {
    rep.warnings.push_back("only " + std::to_string(rep.N) + " draws: fewer than 1/alpha, so the rule selects any "
                           "coordinate whose draws all share a sign and nothing else");
  }
  for (Index j = 0; j < p; ++j) {
    CoordinateSelection c;
    c.name = names.empty() ? "x" + std::to_string(j + 1) : names[static_cast<std::size_t>(j)];
    c.negative = static_cast<long>((slope_draws.col(j).array() < 0.0).count());
    c.positive = static_cast<long>((slope_draws.col(j).array() > 0.0).count());
    const long tail = std::min(c.negative, c.positive);
    c.selected = static_cast<double>(tail) < alpha * static_cast<double>(rep.N);
    c.tail_fraction = rep.N > 0 ? static_cast<double>(tail) / static_cast<double>(rep.N) : 0.0;
    rep.coords.push_back(std::move(c));
  }
  return rep;
}

SelectionReport select_parents(const PosteriorSamples& samples, double alpha) {
  const MatrixXd B = samples.beta_matrix();
  const Index p = samples.layout.p;
  return select_parents(MatrixXd(B.rightCols(p)), alpha, samples.covariate_names);
}

SelectionGrid selection_table(const SelectionReport& report, std::span<const double> baseline_pvalues,
                              double baseline_threshold) {
  if (baseline_pvalues.size() != report.coords.size()) {
    throw ContractError("selection table: baseline has " + std::to_string(baseline_pvalues.size()) +
                        " p-values for " + std::to_string(report.coords.size()) + " covariates");
  }
  SelectionGrid grid;
  for (std::size_t j = 0; j < report.coords.size(); ++j) {
    grid.covariates.push_back(report.coords[j].name);
    grid.bgi.push_back(report.coords[j].selected ? 1 : 0);
    grid.baseline.push_back(baseline_pvalues[j] < baseline_threshold ? 1 : 0);
  }
  return grid;
}

std::string selection_grid_csv(const SelectionGrid& grid) {
  std::ostringstream out;
  out << "method";
  for (const auto& c : grid.covariates) out << ',' << c;
  out << "\nbgi";
  for (int v : grid.bgi) out << ',' << v;
  out << '\n' << grid.baseline_label;
  for (int v : grid.baseline) out << ',' << v;
  out << '\n';
  return out.str();
}

std::string selection_grid_long_csv(const SelectionGrid& grid) {
  std::ostringstream out;
  out << "method,covariate,selected\n";
  for (std::size_t j = 0; j < grid.covariates.size(); ++j) out << "bgi," << grid.covariates[j] << ',' << grid.bgi[j] << '\n';
  for (std::size_t j = 0; j < grid.covariates.size(); ++j)
    out << grid.baseline_label << ',' << grid.covariates[j] << ',' << grid.baseline[j] << '\n';
  return out.str();
}

}  // namespace bgi

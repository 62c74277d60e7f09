#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bgi/posterior.hpp"

namespace bgi {

struct CoordinateSelection {
  std::string name;
  long negative = 0;
  long positive = 0;
  bool selected = false;
  double tail_fraction = 0;
};

struct SelectionReport {
  double alpha = 0.05;
  long N = 0;
  std::vector<CoordinateSelection> coords;
  std::vector<std::string> warnings;

  std::vector<bool> decisions() const;
};

/// Covariate j is a parent when min(#{beta_j < 0}, #{beta_j > 0}) < alpha * N.
/// The intercept is never tested; exact zeros count toward neither tail.
SelectionReport select_parents(const PosteriorSamples& samples, double alpha);

/// Same rule on an N x p matrix of slope draws.
SelectionReport select_parents(const Eigen::MatrixXd& slope_draws, double alpha,
                               std::vector<std::string> names = {});

/// Two-row comparison grid: BGI decisions and baseline p < threshold decisions.
struct SelectionGrid {
  std::vector<std::string> covariates;
  std::vector<int> bgi;
  std::vector<int> baseline;
  std::string baseline_label = "ols";
};

SelectionGrid selection_table(const SelectionReport& report, std::span<const double> baseline_pvalues,
                              double baseline_threshold = 0.05);

/// Wide layout: method,<covariates...>
std::string selection_grid_csv(const SelectionGrid& grid);
/// Long plot-ready layout: method,covariate,selected
std::string selection_grid_long_csv(const SelectionGrid& grid);

}  // namespace bgi

#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bgi/predictive.hpp"
#include "bgi/prior.hpp"
#include "bgi/sampler.hpp"

namespace bgi {

/// Runs fn(0..n_tasks-1) on `threads` workers. Results must be written by index.
void parallel_for(std::size_t n_tasks, int threads, const std::function<void(std::size_t)>& fn);

/// Threads from BGI_THREADS, else hardware concurrency (at least 1).
int default_parallelism();

struct CoverageCell {
  Index n = 0;
  Index p = 0;
};

struct CoverageRun {
  Index n = 0;
  Index p = 0;
  int run = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  double bgi = 0;
  double ols = 0;
  double clamp_fraction = 0;
};

struct CoverageCellResult {
  Index n = 0;
  Index p = 0;
  int runs_ok = 0;
  int runs_failed = 0;
  double bgi = 0;         // mean over runs of per-run coverage
  double ols = 0;
  double bgi_pooled = 0;  // pooled over all test points
  double ols_pooled = 0;
};

struct CoverageGrid {
  std::vector<CoverageCellResult> cells;
  std::vector<CoverageRun> runs;
};

struct CoverageSettings {
  std::vector<CoverageCell> cells;
  int runs = 24;
  double alpha = 0.05;
  std::uint64_t base_seed = 2024;
  Index q = 2;
  Index n0 = 200;
  PriorSpec prior;
  SamplerConfig sampler;
  TestNoise test_noise = TestNoise::Training;
  int threads = 1;
};

/// For every (cell, run): simulate a multi-source dataset, fit BGI and pooled OLS, build
/// (1 - alpha) intervals on the test domain and record empirical coverage. Failed runs are
/// recorded and skipped; the reduction is in (cell, run) order.
CoverageGrid run_coverage(const CoverageSettings& settings);

/// Seed of run r in cell (n, p).
std::uint64_t coverage_seed(std::uint64_t base, Index n, Index p, int run);

std::string coverage_grid_csv(const CoverageGrid& grid);
std::string coverage_runs_csv(const CoverageGrid& grid);

}  // namespace bgi

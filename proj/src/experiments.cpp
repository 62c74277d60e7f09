#include "bgi/experiments.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <sstream>
#include <thread>

#include "bgi/baselines.hpp"
#include "bgi/error.hpp"
#include "bgi/predictive.hpp"
#include "bgi/simgen.hpp"

namespace bgi {

void parallel_for(std::size_t n_tasks, int threads, const std::function<void(std::size_t)>& fn) {
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), n_tasks);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n_tasks; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first;
  std::mutex mtx;
  auto work = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n_tasks) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mtx);
        if (!first) first = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  if (first) std::rethrow_exception(first);
}

int default_parallelism() {
  if (const char* env = std::getenv("BGI_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

std::uint64_t coverage_seed(std::uint64_t base, Index n, Index p, int run) {
  std::uint64_t s = derive_seed(base, static_cast<std::uint64_t>(n));
  s = derive_seed(s, static_cast<std::uint64_t>(p));
  return derive_seed(s, static_cast<std::uint64_t>(run));
}

CoverageGrid run_coverage(const CoverageSettings& settings) {
  if (settings.runs < 1) throw ContractError("coverage: runs must be at least 1");
  if (!(settings.alpha > 0.0 && settings.alpha < 1.0)) throw ContractError("alpha must lie in (0, 1)");
  settings.sampler.validate();
  const std::size_t R = static_cast<std::size_t>(settings.runs);
  CoverageGrid grid;
  grid.runs.resize(settings.cells.size() * R);

  auto task = [&](std::size_t t) {
    const auto& cell = settings.cells[t / R];
    CoverageRun& run = grid.runs[t];
    run.n = cell.n;
    run.p = cell.p;
    run.run = static_cast<int>(t % R);
    run.seed = coverage_seed(settings.base_seed, cell.n, cell.p, run.run);
    try {
      MultiSourceConfig mc;
      mc.n = cell.n;
      mc.p = cell.p;
      mc.q = settings.q;
      mc.n0 = settings.n0;
      mc.seed = run.seed;
      mc.intercept = true;
      const SimDataset ds = gen_multi_source(mc);
      SamplerConfig sc = settings.sampler;
      sc.base_seed = derive_seed(run.seed, 1);
      sc.threads = 1;
      const PosteriorSamples post = fit(ds.train, settings.prior, sc);
      const PredictiveDraws pd = posterior_predictive(post, ds.test, derive_seed(run.seed, 2), settings.test_noise);
      run.bgi = empirical_coverage(credible_interval(pd, settings.alpha), ds.test_y);
      run.clamp_fraction = pd.clamp_fraction();
      const OlsFit ols = ols_fit(ds.train, true);
      run.ols = empirical_coverage(ols_predict_interval(ols, ds.test.X0, settings.alpha), ds.test_y);
      run.ok = true;
    } catch (const std::exception& e) {
      run.ok = false;
      run.error = e.what();
    }
  };
  parallel_for(grid.runs.size(), settings.threads, task);

  for (std::size_t c = 0; c < settings.cells.size(); ++c) {
    CoverageCellResult cell;
    cell.n = settings.cells[c].n;
    cell.p = settings.cells[c].p;
    double bgi = 0, ols = 0;
    for (std::size_t r = 0; r < R; ++r) {
      const auto& run = grid.runs[c * R + r];
      if (!run.ok) {
        ++cell.runs_failed;
        continue;
      }
      ++cell.runs_ok;
      bgi += run.bgi;
      ols += run.ols;
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    // Every run has the same test size, so pooling over points equals the plain average of
    // per-run coverages; both are reported.
    cell.bgi = cell.runs_ok > 0 ? bgi / cell.runs_ok : nan;
    cell.ols = cell.runs_ok > 0 ? ols / cell.runs_ok : nan;
    const double points = static_cast<double>(cell.runs_ok) * static_cast<double>(settings.n0);
    cell.bgi_pooled = cell.runs_ok > 0 ? bgi * static_cast<double>(settings.n0) / points : nan;
    cell.ols_pooled = cell.runs_ok > 0 ? ols * static_cast<double>(settings.n0) / points : nan;
    grid.cells.push_back(cell);
  }
  return grid;
}

std::string coverage_grid_csv(const CoverageGrid& grid) {
  std::ostringstream out;
  out << "n,p,ols,bgi,ols_pooled,bgi_pooled,runs_ok,runs_failed\n";
  auto fmt = [](double v) { return std::isnan(v) ? std::string("NA") : format_double(v); };
  for (const auto& c : grid.cells) {
    out << c.n << ',' << c.p << ',' << fmt(c.ols) << ',' << fmt(c.bgi) << ',' << fmt(c.ols_pooled) << ','
        << fmt(c.bgi_pooled) << ',' << c.runs_ok << ',' << c.runs_failed << '\n';
  }
  return out.str();
}

std::string coverage_runs_csv(const CoverageGrid& grid) {
  std::ostringstream out;
  out << "n,p,run,seed,ok,ols,bgi,clamp_fraction,error\n";
  for (const auto& r : grid.runs) {
    std::string err = r.error;
    for (auto& ch : err)
      if (ch == ',' || ch == '\n') ch = ';';
    out << r.n << ',' << r.p << ',' << r.run << ',' << r.seed << ',' << (r.ok ? 1 : 0) << ','
        << (r.ok ? format_double(r.ols) : "NA") << ',' << (r.ok ? format_double(r.bgi) : "NA") << ','
        << (r.ok ? format_double(r.clamp_fraction) : "NA") << ',' << err << '\n';
  }
  return out.str();
}

}  // namespace bgi

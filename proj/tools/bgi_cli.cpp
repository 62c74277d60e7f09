// bgi: command-line front end (simulate, fit, predict, select, coverage, sweep).

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "bgi/baselines.hpp"
#include "bgi/causal.hpp"
#include "bgi/error.hpp"
#include "bgi/experiments.hpp"
#include "bgi/io.hpp"
#include "bgi/predictive.hpp"
#include "bgi/sampler.hpp"
#include "bgi/simgen.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace bgi;

namespace {

// ---------------------------------------------------------------------------
// config file: "key = value" lines, '#' comments. Keys are long option names without dashes.

std::map<std::string, std::string> read_flat_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  int lineno = 0;
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    while (!key.empty() && key.front() == '-') key.erase(0, 1);
    std::string value = trim(line.substr(eq + 1));
    if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
    out[key] = value;
  }
  return out;
}

// Splices config entries into argv right after the subcommand name, so anything given on the
// command line (parsed later, last one wins) overrides the file.
std::vector<std::string> apply_config(int argc, char** argv, const std::set<std::string>& subcommands) {
  std::vector<std::string> args(argv + 1, argv + argc);
  std::string config_path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      config_path = args[i + 1];
      args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
      break;
    }
    if (args[i].rfind("--config=", 0) == 0) {
      config_path = args[i].substr(9);
      args.erase(args.begin() + static_cast<long>(i));
      break;
    }
  }
  if (config_path.empty()) return args;
  const auto entries = read_flat_config(config_path);
  std::size_t pos = 0;
  while (pos < args.size() && !subcommands.count(args[pos])) ++pos;
  if (pos == args.size()) throw ContractError("--config needs a subcommand");
  std::vector<std::string> injected;
  for (const auto& [k, v] : entries) injected.push_back("--" + k + "=" + v);
  args.insert(args.begin() + static_cast<long>(pos) + 1, injected.begin(), injected.end());
  return args;
}

// ---------------------------------------------------------------------------
// option helpers

std::vector<double> parse_doubles(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (tok.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ContractError(what + ": cannot parse '" + tok + "' as a number");
    }
  }
  if (out.empty()) throw ContractError(what + ": empty list");
  return out;
}

std::vector<CoverageCell> parse_cells(const std::string& text) {
  std::vector<CoverageCell> cells;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto c = tok.find(':');
    if (c == std::string::npos) throw ContractError("cells: expected n:p, got '" + tok + "'");
    try {
      cells.push_back({std::stol(tok.substr(0, c)), std::stol(tok.substr(c + 1))});
    } catch (const std::exception&) {
      throw ContractError("cells: cannot parse '" + tok + "'");
    }
  }
  if (cells.empty()) throw ContractError("cells: empty list");
  return cells;
}

// Every option of a subcommand with its resolved value (given or default).
json resolved_options(const CLI::App* app) {
  json j = json::object();
  for (const CLI::Option* opt : app->get_options()) {
    const std::string name = opt->get_single_name();
    if (name.empty() || name == "help" || name == "help-all") continue;
    const bool flag = opt->get_expected_min() == 0;
    if (opt->count() > 0) {
      const auto r = opt->reduced_results();
      j[name] = r.size() == 1 ? json(r.front()) : json(r);
      if (flag) j[name] = opt->as<bool>();
    } else {
      j[name] = flag ? json(false) : json(opt->get_default_str());
    }
  }
  return j;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << std::setprecision(17);
  return out;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
}

// ---------------------------------------------------------------------------
// shared sampler / prior flags

struct SamplerFlags {
  int chains = 4;
  int warmup = 1000;
  int draws = 1000;
  std::uint64_t seed = 1;
  std::string form = "raw_centered";
  double mh_step = 0.1;
  double rhat = 1.01;
  bool no_collapsed = false;
  std::string tau = "half_cauchy";
  double tau2 = 1.0;
  std::string sigma_prior = "jeffreys";
  double a_y = 1.0, b_y = 1.0;
  std::string mu_cov = "diagonal";
  double a_mu = 1.0, b_mu = 1.0, lkj_eta = 2.0;

  void add(CLI::App* app, bool with_seed) {
    app->add_option("--chains", chains, "number of chains")->capture_default_str()->check(CLI::PositiveNumber);
    app->add_option("--warmup", warmup, "warmup sweeps per chain")->capture_default_str();
    app->add_option("--draws", draws, "kept draws per chain")->capture_default_str();
    if (with_seed) app->add_option("--seed", seed, "base seed (chain c uses seed + c)")->capture_default_str();
    app->add_option("--likelihood-form", form, "raw_centered | precision_weighted")
        ->capture_default_str()
        ->check(CLI::IsMember({"raw_centered", "precision_weighted"}));
    app->add_option("--mh-step", mh_step, "initial LKJ random-walk step")->capture_default_str();
    app->add_option("--rhat-threshold", rhat, "flag parameters with R-hat above this")->capture_default_str();
    app->add_flag("--no-collapsed", no_collapsed, "disable the collapsed environment-mean move");
    app->add_option("--tau", tau, "half_cauchy | fixed")->capture_default_str()->check(CLI::IsMember({"half_cauchy", "fixed"}));
    app->add_option("--tau2", tau2, "tau^2 when --tau fixed")->capture_default_str();
    app->add_option("--sigma-prior", sigma_prior, "jeffreys | inverse_gamma")
        ->capture_default_str()
        ->check(CLI::IsMember({"jeffreys", "inverse_gamma"}));
    app->add_option("--a-y", a_y, "inverse-gamma shape for sigma_Y^2")->capture_default_str();
    app->add_option("--b-y", b_y, "inverse-gamma scale for sigma_Y^2")->capture_default_str();
    app->add_option("--mu-cov", mu_cov, "diagonal | lkj")->capture_default_str()->check(CLI::IsMember({"diagonal", "lkj"}));
    app->add_option("--a-mu", a_mu, "inverse-gamma shape for environment-mean scales")->capture_default_str();
    app->add_option("--b-mu", b_mu, "inverse-gamma scale for environment-mean scales")->capture_default_str();
    app->add_option("--lkj-eta", lkj_eta, "LKJ shape")->capture_default_str();
  }

  SamplerConfig sampler(int threads) const {
    SamplerConfig c;
    c.n_chains = chains;
    c.n_warmup = warmup;
    c.n_kept = draws;
    c.base_seed = seed;
    c.likelihood_form = likelihood_form_from_string(form);
    c.mh_step = mh_step;
    c.rhat_threshold = rhat;
    c.threads = threads;
    c.collapsed_moves = !no_collapsed;
    return c;
  }

  PriorSpec prior() const {
    PriorSpec p;
    p.tau = tau == "fixed" ? PriorSpec::Tau::Fixed : PriorSpec::Tau::HalfCauchy;
    p.tau2_fixed = tau2;
    p.sigma_y = sigma_prior == "inverse_gamma" ? PriorSpec::SigmaY::InverseGamma : PriorSpec::SigmaY::Jeffreys;
    p.a_y = a_y;
    p.b_y = b_y;
    p.mu_cov = mu_cov == "lkj" ? PriorSpec::MuCovariance::Lkj : PriorSpec::MuCovariance::DiagonalHierarchical;
    p.a_mu = a_mu;
    p.b_mu = b_mu;
    p.lkj_eta = lkj_eta;
    return p;
  }
};

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string scenario = "multi";
  std::string out_dir = "sim";
  std::uint64_t seed = 1;
  bool no_intercept = false;
  // single source
  long n1 = 500;
  double sigma_h = 0.5, noise_sd_x = 0.1, noise_sd_y = 0.1, train_mean = 2.0, shift = 3.0;
  // multi source
  long n = 1000, p = 2, q = 2, envs = 0;
  long n0 = 200;
  std::string beta;
};

void write_truth_csv(const SimDataset& ds, const TrainingData& train, std::ostream& out) {
  out << "param,value\n";
  Index off = 0;
  if (train.intercept) {
    out << "beta0," << format_double(ds.truth.beta(0)) << '\n';
    off = 1;
  }
  for (Index j = 0; j < train.p; ++j) out << "beta" << j + 1 << ',' << format_double(ds.truth.beta(off + j)) << '\n';
  for (Index j = 0; j < train.p; ++j) out << 'K' << j + 1 << ',' << format_double(ds.truth.K(j)) << '\n';
  out << "error_variance," << format_double(ds.truth.error_variance) << '\n';
}

int cmd_simulate(const SimulateArgs& a, const CLI::App* app) {
  SimDataset ds;
  if (a.scenario == "single") {
    SingleSourceConfig c;
    c.n1 = a.n1;
    c.n0 = a.n0;
    c.sigma_H = a.sigma_h;
    c.noise_sd_x = a.noise_sd_x;
    c.noise_sd_y = a.noise_sd_y;
    c.train_mean = a.train_mean;
    c.shift = a.shift;
    c.seed = a.seed;
    ds = gen_single_source(c, !a.no_intercept);
  } else {
    MultiSourceConfig c;
    c.n = a.n;
    c.p = a.p;
    c.q = a.q;
    c.E = a.envs;
    c.n0 = a.n0;
    c.seed = a.seed;
    c.intercept = !a.no_intercept;
    if (!a.beta.empty()) {
      const auto b = parse_doubles(a.beta, "beta");
      c.beta = Eigen::Map<const VectorXd>(b.data(), static_cast<Index>(b.size()));
    }
    ds = gen_multi_source(c);
  }
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  {
    auto out = open_out(dir / "train.csv");
    write_training_csv(ds.train, out);
  }
  {
    auto out = open_out(dir / "test.csv");
    write_test_csv(ds.test, &ds.test_y, out);
  }
  {
    auto out = open_out(dir / "truth.csv");
    write_truth_csv(ds, ds.train, out);
  }
  json manifest = json::parse(ds.manifest_json);
  manifest["cli"] = resolved_options(app);
  {
    auto out = open_out(dir / "manifest.json");
    out << manifest.dump(2) << '\n';
  }
  std::cout << "simulate: " << a.scenario << " source, m = " << ds.train.m << " training rows in " << ds.train.E
            << " environment(s), n0 = " << ds.test.n0() << ", written to " << dir.string() << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// fit

struct FitArgs {
  std::string train;
  bool no_intercept = false;
  std::string out = "posterior.bin";
  std::string draws_csv;
  std::string diagnostics_csv;
  std::string summary_json;
  SamplerFlags s;
};

void print_posterior_summary(const PosteriorSamples& post, std::ostream& os) {
  const auto names = post.layout.scalar_names();
  std::map<std::string, const DiagnosticRow*> diag;
  for (const auto& r : post.diagnostics) diag[r.param] = &r;
  const auto draws = post.merged();
  const Index S = post.layout.scalar_count();
  MatrixXd flat(static_cast<Index>(draws.size()), S);
  for (std::size_t i = 0; i < draws.size(); ++i) flat.row(static_cast<Index>(i)) = post.layout.flatten(draws[i]).transpose();

  os << std::left << std::setw(14) << "param" << std::right << std::setw(11) << "mean" << std::setw(11) << "sd"
     << std::setw(11) << "q2.5" << std::setw(11) << "q97.5" << std::setw(9) << "rhat" << std::setw(9) << "ess" << '\n';
  for (Index s = 0; s < S; ++s) {
    const std::string& name = names[static_cast<std::size_t>(s)];
    if (name.rfind("mu[", 0) == 0 || name == "phi") continue;
    const VectorXd col = flat.col(s);
    const double m = col.mean();
    const double sd = col.size() > 1 ? std::sqrt((col.array() - m).square().sum() / static_cast<double>(col.size() - 1)) : 0.0;
    std::vector<double> v(col.data(), col.data() + col.size());
    const auto* d = diag.count(name) ? diag[name] : nullptr;
    auto num = [](double x, int prec) {
      if (std::isnan(x)) return std::string("NA");
      std::ostringstream ss;
      ss << std::fixed << std::setprecision(prec) << x;
      return ss.str();
    };
    os << std::left << std::setw(14) << name << std::right << std::setw(11) << num(m, 4) << std::setw(11) << num(sd, 4)
       << std::setw(11) << num(quantile_type7(v, 0.025), 4) << std::setw(11) << num(quantile_type7(v, 0.975), 4)
       << std::setw(9) << (d ? num(d->rhat, 3) : "NA") << std::setw(9) << (d ? num(d->ess, 0) : "NA")
       << (d && d->flagged ? "  *" : "") << '\n';
  }
}

int cmd_fit(const FitArgs& a, int threads, const CLI::App* app) {
  const TrainingData data = load_training_csv(a.train, !a.no_intercept);
  print_warnings(data.warnings);
  const PosteriorSamples post = fit(data, a.s.prior(), a.s.sampler(threads));

  json echo;
  echo["command"] = "fit";
  echo["options"] = resolved_options(app);
  echo["sampler"] = json::parse(post.config_json);
  echo["chain_seeds"] = post.chain_seeds;

  write_posterior_binary(post, fs::path(a.out));
  if (!a.draws_csv.empty()) {
    auto out = open_out(a.draws_csv);
    write_comment_header(out, echo.dump());
    write_draws_csv(post, out);
  }
  if (!a.diagnostics_csv.empty()) {
    auto out = open_out(a.diagnostics_csv);
    write_comment_header(out, echo.dump());
    write_diagnostics_csv(post.diagnostics, out);
  }

  print_posterior_summary(post, std::cout);
  const MatrixXd B = post.beta_matrix();
  const Index p = post.layout.p;
  VectorXd kmean = VectorXd::Zero(p);
  for (const auto& c : post.chains)
    for (const auto& d : c) kmean += d.K;
  kmean /= static_cast<double>(post.total_draws());
  const VectorXd bmean = B.rightCols(p).colwise().mean().transpose();
  const Eigen::IOFormat vec(Eigen::StreamPrecision, Eigen::DontAlignCols, ", ", ", ", "", "", "(", ")");
  std::cout << "summary: beta mean = " << bmean.transpose().format(vec) << ", K mean = " << kmean.transpose().format(vec)
            << ", draws = " << post.total_draws() << " (" << post.n_chains << " chains)\n";
  bool rhat_undefined = false;
  int flagged = 0;
  for (const auto& r : post.diagnostics) {
    if (std::isnan(r.rhat)) rhat_undefined = true;
    if (r.flagged && !std::isnan(r.rhat)) ++flagged;
  }
  if (post.n_chains < 2) std::cout << "diagnostics: R-hat undefined (single chain)\n";
  else if (rhat_undefined) std::cout << "diagnostics: R-hat undefined for constant parameters\n";
  std::cout << "diagnostics: " << flagged << " parameter(s) with R-hat > " << post.rhat_threshold << '\n';
  print_warnings(post.warnings);

  if (!a.summary_json.empty()) {
    json s = echo;
    s["beta_mean"] = std::vector<double>(bmean.data(), bmean.data() + bmean.size());
    s["K_mean"] = std::vector<double>(kmean.data(), kmean.data() + kmean.size());
    s["warnings"] = post.warnings;
    auto out = open_out(a.summary_json);
    out << s.dump(2) << '\n';
  }
  std::cout << "posterior written to " << a.out << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// predict

struct PredictArgs {
  std::string posterior = "posterior.bin";
  std::string test;
  std::uint64_t seed = 1;
  double alpha = 0.05;
  std::string noise = "training";
  std::string out = "predictions.csv";
  std::string draws_out;
  std::string report;
};

int cmd_predict(const PredictArgs& a, const CLI::App* app) {
  const PosteriorSamples post = read_posterior_binary(fs::path(a.posterior));
  const TestTable test = load_test_csv(a.test);
  const PredictiveDraws pd = posterior_predictive(post, test.covariates, a.seed, test_noise_from_string(a.noise));
  const MatrixXd iv = credible_interval(pd, a.alpha);

  json echo;
  echo["command"] = "predict";
  echo["options"] = resolved_options(app);
  echo["posterior_config"] = json::parse(post.config_json, nullptr, false);
  echo["posterior_chain_seeds"] = post.chain_seeds;
  {
    auto out = open_out(a.out);
    write_comment_header(out, echo.dump());
    write_prediction_csv(pd.mean_prediction(), iv, out);
  }
  if (!a.draws_out.empty()) {
    auto out = open_out(a.draws_out);
    write_comment_header(out, echo.dump());
    write_prediction_draws_csv(pd, out);
  }
  std::cout << "predict: " << pd.n0() << " rows x " << pd.draws() << " draws, " << 100.0 * (1.0 - a.alpha)
            << "% intervals written to " << a.out << ", clamp fraction " << pd.clamp_fraction() << '\n';
  if (test.truth) {
    const double cov = empirical_coverage(iv, *test.truth);
    std::cout << "coverage: " << cov << " (nominal " << 1.0 - a.alpha << ")\n";
    if (!a.report.empty()) {
      auto out = open_out(a.report);
      out << coverage_report_json(1.0 - a.alpha, cov, pd.clamp_fraction(), echo.dump()) << '\n';
    }
  } else if (!a.report.empty()) {
    throw ContractError("--report needs a 'y' column in the test file");
  }
  print_warnings(pd.warnings);
  return 0;
}

// ---------------------------------------------------------------------------
// select

struct SelectArgs {
  std::string posterior = "posterior.bin";
  double alpha = 0.05;
  std::string out = "selection.json";
  std::string train;
  std::string grid_out;
  bool long_format = false;
};

int cmd_select(const SelectArgs& a, const CLI::App* app) {
  const PosteriorSamples post = read_posterior_binary(fs::path(a.posterior));
  const SelectionReport rep = select_parents(post, a.alpha);
  json echo;
  echo["command"] = "select";
  echo["options"] = resolved_options(app);
  echo["posterior_config"] = json::parse(post.config_json, nullptr, false);
  echo["posterior_chain_seeds"] = post.chain_seeds;
  {
    auto out = open_out(a.out);
    out << selection_report_json(rep, echo.dump()) << '\n';
  }
  for (const auto& c : rep.coords) {
    std::cout << std::left << std::setw(12) << c.name << " tail " << std::fixed << std::setprecision(4) << c.tail_fraction
              << (c.selected ? "  selected" : "") << '\n';
  }
  std::cout.unsetf(std::ios::floatfield);
  if (!a.grid_out.empty()) {
    if (a.train.empty()) throw ContractError("--grid-out needs --train for the OLS comparison");
    const TrainingData data = load_training_csv(a.train, post.layout.intercept);
    if (data.p != post.layout.p) throw ContractError("training data and posterior disagree on p");
    const OlsFit ols = ols_fit(data, post.layout.intercept);
    const VectorXd pv = ols.slope_pvalues();
    const SelectionGrid grid = selection_table(rep, std::span<const double>(pv.data(), static_cast<std::size_t>(pv.size())));
    auto out = open_out(a.grid_out);
    write_comment_header(out, echo.dump());
    out << (a.long_format ? selection_grid_long_csv(grid) : selection_grid_csv(grid));
  }
  print_warnings(rep.warnings);
  return 0;
}

// ---------------------------------------------------------------------------
// coverage

struct CoverageArgs {
  std::string cells = "200:2,1000:2,1000:5";
  int runs = 24;
  double alpha = 0.05;
  std::uint64_t seed = 2024;
  long q = 2;
  long n0 = 200;
  std::string noise = "training";
  std::string out = "coverage.csv";
  std::string runs_out = "coverage_runs.csv";
  SamplerFlags s;
};

int cmd_coverage(const CoverageArgs& a, int threads, const CLI::App* app) {
  CoverageSettings cs;
  cs.cells = parse_cells(a.cells);
  cs.runs = a.runs;
  cs.alpha = a.alpha;
  cs.base_seed = a.seed;
  cs.q = a.q;
  cs.n0 = a.n0;
  cs.prior = a.s.prior();
  cs.sampler = a.s.sampler(1);
  cs.test_noise = test_noise_from_string(a.noise);
  cs.threads = threads;
  const CoverageGrid grid = run_coverage(cs);

  json echo;
  echo["command"] = "coverage";
  echo["options"] = resolved_options(app);
  echo["seeding"] = "run seed = derive(base, n, p, run); sampler seed = derive(run seed, 1); predictive seed = derive(run seed, 2)";
  {
    auto out = open_out(a.out);
    write_comment_header(out, echo.dump());
    out << coverage_grid_csv(grid);
  }
  {
    auto out = open_out(a.runs_out);
    write_comment_header(out, echo.dump());
    out << coverage_runs_csv(grid);
  }
  std::cout << std::setw(6) << "n" << std::setw(4) << "p" << std::setw(9) << "ols" << std::setw(9) << "bgi"
            << std::setw(8) << "ok" << std::setw(8) << "failed" << '\n';
  for (const auto& c : grid.cells) {
    std::cout << std::setw(6) << c.n << std::setw(4) << c.p << std::fixed << std::setprecision(3) << std::setw(9) << c.ols
              << std::setw(9) << c.bgi << std::setw(8) << c.runs_ok << std::setw(8) << c.runs_failed << '\n';
  }
  for (const auto& r : grid.runs)
    if (!r.ok) std::cerr << "warning: run (n=" << r.n << ", p=" << r.p << ", run " << r.run << ") failed: " << r.error << '\n';
  return 0;
}

// ---------------------------------------------------------------------------
// sweep

struct SweepArgs {
  std::string lambdas = "0,0.1,0.5,1,2,10";
  std::string out = "sweep.csv";
  long n1 = 500;
  double sigma_h = 0.5, noise_sd_x = 0.1, noise_sd_y = 0.1, train_mean = 2.0;
  std::uint64_t data_seed = 1;
  SamplerFlags s;
};

int cmd_sweep(const SweepArgs& a, int threads, const CLI::App* app) {
  SingleSourceConfig base;
  base.n1 = a.n1;
  base.sigma_H = a.sigma_h;
  base.noise_sd_x = a.noise_sd_x;
  base.noise_sd_y = a.noise_sd_y;
  base.train_mean = a.train_mean;
  base.seed = a.data_seed;
  // Defaults to the fixed N(0, 1) coefficient prior unless the user picked a shrinkage prior.
  PriorSpec prior = sweep_prior();
  if (app->get_option("--tau")->count() > 0 && a.s.tau == "half_cauchy") prior = a.s.prior();
  else if (app->get_option("--tau2")->count() > 0) prior.tau2_fixed = a.s.tau2;
  const auto rows = identifiability_sweep(parse_doubles(a.lambdas, "lambdas"), base, prior, a.s.sampler(threads));

  json echo;
  echo["command"] = "sweep";
  echo["options"] = resolved_options(app);
  auto out = open_out(a.out);
  write_comment_header(out, echo.dump());
  out << "lambda,beta_mean,beta_sd,prior_sd\n";
  for (const auto& r : rows) {
    out << format_double(r.lambda) << ',' << format_double(r.beta_mean) << ',' << format_double(r.beta_sd) << ','
        << (std::isnan(r.prior_sd) ? std::string("NA") : format_double(r.prior_sd)) << '\n';
    std::cout << "lambda " << std::setw(6) << r.lambda << "  beta mean " << std::fixed << std::setprecision(4)
              << std::setw(8) << r.beta_mean << "  sd " << std::setw(8) << r.beta_sd << '\n';
    std::cout.unsetf(std::ios::floatfield);
  }
  std::cout << "sweep written to " << a.out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian generative-invariance regression: fitting, prediction under shift, and experiments", "bgi"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every subcommand");
  int threads = default_parallelism();
  app.add_option("--threads", threads, "worker threads (default: BGI_THREADS or hardware concurrency)")
      ->capture_default_str();
  std::string config_unused;
  app.add_option("--config", config_unused, "flat key = value file; command-line flags take precedence");

  SimulateArgs sim;
  auto* s_sim = app.add_subcommand("simulate", "generate a synthetic dataset (train/test/truth CSV + manifest)");
  s_sim->add_option("--scenario", sim.scenario, "single | multi")->capture_default_str()->check(CLI::IsMember({"single", "multi"}));
  s_sim->add_option("--out-dir", sim.out_dir, "output directory")->capture_default_str();
  s_sim->add_option("--seed", sim.seed, "dataset seed")->capture_default_str();
  s_sim->add_flag("--no-intercept", sim.no_intercept, "report truth without an intercept coordinate");
  s_sim->add_option("--n1", sim.n1, "single: training size")->capture_default_str();
  s_sim->add_option("--sigma-h", sim.sigma_h, "single: confounder SD")->capture_default_str();
  s_sim->add_option("--noise-sd-x", sim.noise_sd_x, "single: covariate noise SD")->capture_default_str();
  s_sim->add_option("--noise-sd-y", sim.noise_sd_y, "single: response noise SD")->capture_default_str();
  s_sim->add_option("--train-mean", sim.train_mean, "single: training covariate mean")->capture_default_str();
  s_sim->add_option("--shift", sim.shift, "single: test mean shift")->capture_default_str();
  s_sim->add_option("--n", sim.n, "multi: total training size")->capture_default_str();
  s_sim->add_option("--p", sim.p, "multi: covariates")->capture_default_str();
  s_sim->add_option("--q", sim.q, "multi: hidden confounders")->capture_default_str();
  s_sim->add_option("--envs", sim.envs, "multi: environments (0 means p + 1)")->capture_default_str();
  s_sim->add_option("--n0", sim.n0, "test size")->capture_default_str();
  s_sim->add_option("--beta", sim.beta, "multi: comma-separated causal coefficients (default all ones)");

  FitArgs fa;
  auto* s_fit = app.add_subcommand("fit", "run the Gibbs sampler on a training CSV");
  s_fit->add_option("--train", fa.train, "training CSV (env,x1..xp,y)")->required();
  s_fit->add_flag("--no-intercept", fa.no_intercept, "fit without an intercept");
  s_fit->add_option("--out", fa.out, "binary posterior dump")->capture_default_str();
  s_fit->add_option("--draws-csv", fa.draws_csv, "long-format draws CSV");
  s_fit->add_option("--diagnostics-csv", fa.diagnostics_csv, "per-parameter R-hat / ESS CSV");
  s_fit->add_option("--summary-json", fa.summary_json, "posterior summary JSON");
  fa.s.add(s_fit, true);

  PredictArgs pa;
  auto* s_pred = app.add_subcommand("predict", "posterior predictive intervals for test covariates");
  s_pred->add_option("--posterior", pa.posterior, "binary posterior dump")->capture_default_str();
  s_pred->add_option("--test", pa.test, "test CSV (x1..xp[,y])")->required();
  s_pred->add_option("--seed", pa.seed, "predictive seed")->capture_default_str();
  s_pred->add_option("--alpha", pa.alpha, "1 - nominal level")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  s_pred->add_option("--test-noise", pa.noise, "training | invariant")
      ->capture_default_str()
      ->check(CLI::IsMember({"training", "invariant"}));
  s_pred->add_option("--out", pa.out, "prediction CSV (row,mean,lo,hi)")->capture_default_str();
  s_pred->add_option("--draws-out", pa.draws_out, "full predictive draws CSV");
  s_pred->add_option("--report", pa.report, "coverage report JSON (needs y in the test file)");

  SelectArgs sa;
  auto* s_sel = app.add_subcommand("select", "posterior sign-based causal parent selection");
  s_sel->add_option("--posterior", sa.posterior, "binary posterior dump")->capture_default_str();
  s_sel->add_option("--alpha", sa.alpha, "selection level")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  s_sel->add_option("--out", sa.out, "selection report JSON")->capture_default_str();
  s_sel->add_option("--train", sa.train, "training CSV for the OLS comparison grid");
  s_sel->add_option("--grid-out", sa.grid_out, "BGI vs OLS selection grid CSV");
  s_sel->add_flag("--long", sa.long_format, "write the grid in long format");

  CoverageArgs ca;
  auto* s_cov = app.add_subcommand("coverage", "coverage grid of BGI and OLS predictive intervals");
  s_cov->add_option("--cells", ca.cells, "comma-separated n:p cells")->capture_default_str();
  s_cov->add_option("--runs", ca.runs, "runs per cell")->capture_default_str()->check(CLI::PositiveNumber);
  s_cov->add_option("--alpha", ca.alpha, "1 - nominal level")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  s_cov->add_option("--seed", ca.seed, "base seed")->capture_default_str();
  s_cov->add_option("--q", ca.q, "hidden confounders")->capture_default_str();
  s_cov->add_option("--n0", ca.n0, "test size")->capture_default_str();
  s_cov->add_option("--test-noise", ca.noise, "training | invariant")
      ->capture_default_str()
      ->check(CLI::IsMember({"training", "invariant"}));
  s_cov->add_option("--out", ca.out, "grid CSV")->capture_default_str();
  s_cov->add_option("--runs-out", ca.runs_out, "per-run CSV")->capture_default_str();
  ca.s.add(s_cov, false);

  SweepArgs wa;
  auto* s_sw = app.add_subcommand("sweep", "posterior SD of beta as the covariate mean is scaled by lambda");
  s_sw->add_option("--lambdas", wa.lambdas, "comma-separated scale factors")->capture_default_str();
  s_sw->add_option("--out", wa.out, "sweep CSV")->capture_default_str();
  s_sw->add_option("--n1", wa.n1, "training size")->capture_default_str();
  s_sw->add_option("--sigma-h", wa.sigma_h, "confounder SD")->capture_default_str();
  s_sw->add_option("--noise-sd-x", wa.noise_sd_x, "covariate noise SD")->capture_default_str();
  s_sw->add_option("--noise-sd-y", wa.noise_sd_y, "response noise SD")->capture_default_str();
  s_sw->add_option("--train-mean", wa.train_mean, "base covariate mean")->capture_default_str();
  s_sw->add_option("--data-seed", wa.data_seed, "dataset seed")->capture_default_str();
  wa.s.add(s_sw, true);

  try {
    std::vector<std::string> args = apply_config(argc, argv, {"simulate", "fit", "predict", "select", "coverage", "sweep"});
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  if (threads < 1) threads = 1;

  try {
    if (*s_sim) return cmd_simulate(sim, s_sim);
    if (*s_fit) return cmd_fit(fa, threads, s_fit);
    if (*s_pred) return cmd_predict(pa, s_pred);
    if (*s_sel) return cmd_select(sa, s_sel);
    if (*s_cov) return cmd_coverage(ca, threads, s_cov);
    if (*s_sw) return cmd_sweep(wa, threads, s_sw);
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}

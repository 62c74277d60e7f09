#include "bgi/core_model.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include <Eigen/Cholesky>

#include "bgi/error.hpp"
#include "bgi/linalg.hpp"
#include "bgi/prior.hpp"

namespace bgi {

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  std::string out(s.substr(b, e - b));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      cells.push_back(trim(std::string_view(line).substr(start)));
      break;
    }
    cells.push_back(trim(std::string_view(line).substr(start, pos - start)));
    start = pos + 1;
  }
  return cells;
}

bool skip_line(const std::string& line) {
  const std::string t = trim(line);
  return t.empty() || t.front() == '#';
}

double parse_cell(const std::string& cell, const std::string& source, long row, const std::string& column) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (cell.empty() || ec != std::errc() || ptr != last) {
    std::ostringstream msg;
    msg << source << ": row " << row << ", column '" << column << "': non-numeric value '" << cell << "'";
    throw ParseError(msg.str());
  }
  if (!std::isfinite(v)) {
    std::ostringstream msg;
    msg << source << ": row " << row << ", column '" << column << "': non-finite value '" << cell << "'";
    throw ParseError(msg.str());
  }
  return v;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot write file: " + path.string());
  return out;
}

}  // namespace

const char* to_string(LikelihoodForm form) {
  return form == LikelihoodForm::PrecisionWeighted ? "precision_weighted" : "raw_centered";
}

LikelihoodForm likelihood_form_from_string(const std::string& s) {
  if (s == "precision_weighted") return LikelihoodForm::PrecisionWeighted;
  if (s == "raw_centered") return LikelihoodForm::RawCentered;
  throw ContractError("unknown likelihood form '" + s + "'");
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

EnvironmentData make_environment(int env_id, std::string label, MatrixXd X, VectorXd Y) {
  if (X.rows() != Y.size()) throw ContractError("make_environment: X and Y row counts differ");
  if (X.rows() < 2) {
    std::ostringstream msg;
    msg << "environment " << label << " has " << X.rows() << " observation" << (X.rows() == 1 ? "" : "s")
        << " (need at least 2)";
    throw ParseError(msg.str());
  }
  EnvironmentData env;
  env.env_id = env_id;
  env.label = std::move(label);
  env.mu_hat = column_means(X);
  env.sigma_hat = sample_covariance(X);
  env.X = std::move(X);
  env.Y = std::move(Y);
  return env;
}

TrainingData make_training_data(std::vector<EnvironmentData> environments, bool intercept,
                                std::vector<std::string> covariate_names) {
  if (environments.empty()) throw ContractError("training data needs at least one environment");
  TrainingData data;
  data.p = environments.front().p();
  if (data.p < 1) throw ContractError("training data needs at least one covariate");
  data.intercept = intercept;
  data.E = static_cast<Index>(environments.size());
  data.grand_mu_hat = VectorXd::Zero(data.p);
  for (std::size_t e = 0; e < environments.size(); ++e) {
    auto& env = environments[e];
    if (env.p() != data.p) throw ContractError("all environments must share the same number of covariates");
    if (env.n() < 2) throw ParseError("environment " + env.label + " has fewer than 2 observations");
    env.env_id = static_cast<int>(e);
    data.m += env.n();
    data.grand_mu_hat += env.mu_hat;
  }
  data.grand_mu_hat /= static_cast<double>(data.E);
  if (covariate_names.empty()) {
    for (Index j = 0; j < data.p; ++j) covariate_names.push_back("x" + std::to_string(j + 1));
  }
  if (static_cast<Index>(covariate_names.size()) != data.p) throw ContractError("covariate name count differs from p");
  data.covariate_names = std::move(covariate_names);
  data.environments = std::move(environments);
  if (intercept && data.E < data.p + 1) {
    std::ostringstream msg;
    msg << "weak identifiability: intercept model with p = " << data.p << " needs at least " << data.p + 1
        << " environments, got " << data.E;
    data.warnings.push_back(msg.str());
  }
  return data;
}

TrainingData parse_training_csv(std::istream& in, bool intercept, const std::string& source) {
  std::string line;
  long row = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++row;
    if (skip_line(line)) continue;
    header = split_csv_line(line);
    break;
  }
  if (header.empty()) throw ParseError(source + ": empty file (expected header env,x1,...,xp,y)");
  if (header.size() < 3) throw ParseError(source + ": header needs env, at least one covariate and y");
  if (header.front() != "env") throw ParseError(source + ": missing column 'env' (first header cell is '" + header.front() + "')");
  if (header.back() != "y") throw ParseError(source + ": missing column 'y' (last header cell is '" + header.back() + "')");
  const std::size_t p = header.size() - 2;
  std::vector<std::string> names(header.begin() + 1, header.end() - 1);

  std::vector<std::string> labels;
  std::unordered_map<std::string, std::size_t> ids;
  std::vector<std::vector<std::vector<double>>> xs;
  std::vector<std::vector<double>> ys;
  while (std::getline(in, line)) {
    ++row;
    if (skip_line(line)) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      std::ostringstream msg;
      msg << source << ": row " << row << ": expected " << header.size() << " columns, got " << cells.size();
      throw ParseError(msg.str());
    }
    if (cells.front().empty()) {
      std::ostringstream msg;
      msg << source << ": row " << row << ", column 'env': empty environment label";
      throw ParseError(msg.str());
    }
    auto [it, inserted] = ids.try_emplace(cells.front(), labels.size());
    if (inserted) {
      labels.push_back(cells.front());
      xs.emplace_back();
      ys.emplace_back();
    }
    std::vector<double> x(p);
    for (std::size_t j = 0; j < p; ++j) x[j] = parse_cell(cells[j + 1], source, row, names[j]);
    xs[it->second].push_back(std::move(x));
    ys[it->second].push_back(parse_cell(cells.back(), source, row, "y"));
  }
  if (labels.empty()) throw ParseError(source + ": no data rows");

  std::vector<EnvironmentData> envs;
  for (std::size_t e = 0; e < labels.size(); ++e) {
    const auto n = static_cast<Index>(ys[e].size());
    if (n < 2) {
      std::ostringstream msg;
      msg << "environment " << labels[e] << " has " << n << " observation" << (n == 1 ? "" : "s");
      throw ParseError(source + ": " + msg.str());
    }
    MatrixXd X(n, static_cast<Index>(p));
    VectorXd Y(n);
    for (Index i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < p; ++j) X(i, static_cast<Index>(j)) = xs[e][static_cast<std::size_t>(i)][j];
      Y(i) = ys[e][static_cast<std::size_t>(i)];
    }
    envs.push_back(make_environment(static_cast<int>(e), labels[e], std::move(X), std::move(Y)));
  }
  return make_training_data(std::move(envs), intercept, std::move(names));
}

TrainingData load_training_csv(const std::filesystem::path& path, bool intercept) {
  auto in = open_input(path);
  return parse_training_csv(in, intercept, path.string());
}

void write_training_csv(const TrainingData& data, std::ostream& out) {
  out << "env";
  for (const auto& name : data.covariate_names) out << ',' << name;
  out << ",y\n";
  for (const auto& env : data.environments) {
    for (Index i = 0; i < env.n(); ++i) {
      out << env.label;
      for (Index j = 0; j < env.p(); ++j) out << ',' << format_double(env.X(i, j));
      out << ',' << format_double(env.Y(i)) << '\n';
    }
  }
}

void write_training_csv(const TrainingData& data, const std::filesystem::path& path) {
  auto out = open_output(path);
  write_training_csv(data, out);
}

MatrixXd pooled_X(const TrainingData& data) {
  MatrixXd X(data.m, data.p);
  Index r = 0;
  for (const auto& env : data.environments) {
    X.middleRows(r, env.n()) = env.X;
    r += env.n();
  }
  return X;
}

VectorXd pooled_Y(const TrainingData& data) {
  VectorXd Y(data.m);
  Index r = 0;
  for (const auto& env : data.environments) {
    Y.segment(r, env.n()) = env.Y;
    r += env.n();
  }
  return Y;
}

TestCovariates make_test_covariates(MatrixXd X0) {
  if (X0.rows() < 2) throw ParseError("test covariates need at least 2 rows");
  TestCovariates t;
  t.mu0_hat = column_means(X0);
  t.sigma0_hat = sample_covariance(X0);
  t.X0 = std::move(X0);
  return t;
}

TestTable parse_test_csv(std::istream& in, const std::string& source) {
  std::string line;
  long row = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++row;
    if (skip_line(line)) continue;
    header = split_csv_line(line);
    break;
  }
  if (header.empty() || (header.size() == 1 && header.front().empty())) {
    throw ParseError(source + ": empty file (expected header x1,...,xp[,y])");
  }
  const bool has_y = header.back() == "y";
  const std::size_t p = header.size() - (has_y ? 1 : 0);
  if (p == 0) throw ParseError(source + ": no covariate columns");
  std::vector<std::string> names(header.begin(), header.begin() + static_cast<long>(p));
  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  while (std::getline(in, line)) {
    ++row;
    if (skip_line(line)) continue;
    const auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      std::ostringstream msg;
      msg << source << ": row " << row << ": expected " << header.size() << " columns, got " << cells.size();
      throw ParseError(msg.str());
    }
    std::vector<double> x(p);
    for (std::size_t j = 0; j < p; ++j) x[j] = parse_cell(cells[j], source, row, names[j]);
    xs.push_back(std::move(x));
    if (has_y) ys.push_back(parse_cell(cells.back(), source, row, "y"));
  }
  const auto n = static_cast<Index>(xs.size());
  if (n < 2) throw ParseError(source + ": test file needs at least 2 rows");
  MatrixXd X(n, static_cast<Index>(p));
  for (Index i = 0; i < n; ++i)
    for (std::size_t j = 0; j < p; ++j) X(i, static_cast<Index>(j)) = xs[static_cast<std::size_t>(i)][j];
  TestTable table;
  table.covariates = make_test_covariates(std::move(X));
  if (has_y) table.truth = Eigen::Map<VectorXd>(ys.data(), n);
  table.covariate_names = std::move(names);
  return table;
}

TestTable load_test_csv(const std::filesystem::path& path) {
  auto in = open_input(path);
  return parse_test_csv(in, path.string());
}

void write_test_csv(const TestCovariates& test, const VectorXd* truth, std::ostream& out) {
  if (truth && truth->size() != test.n0()) throw ContractError("write_test_csv: truth length differs from n0");
  for (Index j = 0; j < test.p(); ++j) out << (j ? "," : "") << 'x' << j + 1;
  if (truth) out << ",y";
  out << '\n';
  for (Index i = 0; i < test.n0(); ++i) {
    for (Index j = 0; j < test.p(); ++j) out << (j ? "," : "") << format_double(test.X0(i, j));
    if (truth) out << ',' << format_double((*truth)(i));
    out << '\n';
  }
}

void write_test_csv(const TestCovariates& test, const VectorXd* truth, const std::filesystem::path& path) {
  auto out = open_output(path);
  write_test_csv(test, truth, out);
}

VectorXd design_row(const VectorXd& x, Index env, const MatrixXd& draw_mu, const MatrixXd& sigma_hat,
                    bool intercept, LikelihoodForm form) {
  const Index p = x.size();
  if (env < 0 || env >= draw_mu.rows()) throw ContractError("design_row: environment index out of range");
  if (draw_mu.cols() != p) throw ContractError("design_row: draw_mu has wrong number of columns");
  if (sigma_hat.rows() != p || sigma_hat.cols() != p) throw ContractError("design_row: sigma_hat must be p x p");
  const Index q = intercept ? 1 : 0;
  VectorXd row(q + 2 * p);
  if (intercept) row(0) = 1.0;
  row.segment(q, p) = x;
  const VectorXd centered = x - draw_mu.row(env).transpose();
  if (form == LikelihoodForm::RawCentered) {
    row.segment(q + p, p) = centered;
  } else {
    const auto reg = regularized_inverse(sigma_hat);
    if (reg.ridged()) {
      row.segment(q + p, p) = reg.inverse * centered;
    } else {
      row.segment(q + p, p) = sigma_hat.llt().solve(centered);
    }
  }
  return row;
}

MatrixXd design_matrix(const TrainingData& data, const MatrixXd& draw_mu, LikelihoodForm form) {
  const Index d = data.coef_dim();
  MatrixXd W(data.m, d);
  Index r = 0;
  for (Index e = 0; e < data.E; ++e) {
    const auto& env = data.environments[static_cast<std::size_t>(e)];
    for (Index i = 0; i < env.n(); ++i, ++r) {
      W.row(r) = design_row(env.X.row(i).transpose(), e, draw_mu, env.sigma_hat, data.intercept, form).transpose();
    }
  }
  return W;
}

MatrixXd empirical_means(const TrainingData& data) {
  MatrixXd mu(data.E, data.p);
  for (Index e = 0; e < data.E; ++e) mu.row(e) = data.environments[static_cast<std::size_t>(e)].mu_hat.transpose();
  return mu;
}

void PriorSpec::validate(Index p) const {
  auto positive = [](double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ContractError(std::string("prior: ") + what + " must be positive");
  };
  if (tau == Tau::Fixed) positive(tau2_fixed, "fixed tau^2");
  if (sigma_y == SigmaY::InverseGamma) {
    positive(a_y, "a_y");
    positive(b_y, "b_y");
  }
  if (mu_cov != MuCovariance::Fixed) {
    positive(a_mu, "a_mu");
    positive(b_mu, "b_mu");
  }
  if (mu_cov == MuCovariance::Lkj) positive(lkj_eta, "LKJ eta");
  if (mu_cov == MuCovariance::Fixed) {
    if (mu_cov_fixed.rows() != p || mu_cov_fixed.cols() != p) throw ContractError("prior: fixed Sigma_mu must be p x p");
    if (!is_symmetric(mu_cov_fixed)) throw ContractError("prior: fixed Sigma_mu must be symmetric");
    Eigen::LLT<MatrixXd> llt(mu_cov_fixed);
    if (llt.info() != Eigen::Success) throw ContractError("prior: fixed Sigma_mu must be positive definite");
  }
  if (mu_center && mu_center->size() != p) throw ContractError("prior: mu_center must have length p");
}

}  // namespace bgi

#include "bgi/io.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <ostream>

#include <json.hpp>

#include "bgi/diagnostics.hpp"
#include "bgi/error.hpp"

namespace bgi {

namespace {

constexpr char kMagic[8] = {'B', 'G', 'I', 'P', 'O', 'S', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;

nlohmann::json parse_config(const std::string& text) {
  if (text.empty()) return nlohmann::json::object();
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) return nlohmann::json(text);
  return j;
}

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw ParseError("posterior dump is truncated");
  return v;
}

}  // namespace

void write_draws_csv(const PosteriorSamples& samples, std::ostream& out) {
  const auto names = samples.layout.scalar_names();
  out << "chain,iter,param,value\n";
  for (std::size_t c = 0; c < samples.chains.size(); ++c) {
    for (std::size_t i = 0; i < samples.chains[c].size(); ++i) {
      const VectorXd v = samples.layout.flatten(samples.chains[c][i]);
      for (Index s = 0; s < v.size(); ++s)
        out << c << ',' << i << ',' << names[static_cast<std::size_t>(s)] << ',' << format_double(v(s)) << '\n';
    }
  }
}

void write_posterior_binary(const PosteriorSamples& samples, std::ostream& out) {
  nlohmann::json meta;
  meta["p"] = samples.layout.p;
  meta["E"] = samples.layout.E;
  meta["intercept"] = samples.layout.intercept;
  meta["likelihood_form"] = to_string(samples.form);
  meta["n_chains"] = samples.n_chains;
  meta["n_warmup"] = samples.n_warmup;
  meta["n_kept"] = samples.n_kept;
  meta["base_seed"] = samples.base_seed;
  meta["chain_seeds"] = samples.chain_seeds;
  meta["chain_lengths"] = nlohmann::json::array();
  for (const auto& c : samples.chains) meta["chain_lengths"].push_back(c.size());
  meta["covariate_names"] = samples.covariate_names;
  meta["rhat_threshold"] = samples.rhat_threshold;
  meta["warnings"] = samples.warnings;
  meta["config"] = samples.config_json;
  const std::string text = meta.dump();

  out.write(kMagic, sizeof(kMagic));
  put(out, kVersion);
  put(out, static_cast<std::uint32_t>(text.size()));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& c : samples.chains) {
    for (const auto& d : c) {
      const VectorXd v = samples.layout.flatten(d);
      out.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(sizeof(double) * v.size()));
    }
  }
  if (!out) throw Error("failed writing posterior dump");
}

PosteriorSamples read_posterior_binary(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw ParseError("not a posterior dump (bad magic)");
  const auto version = get<std::uint32_t>(in);
  if (version != kVersion) throw ParseError("unsupported posterior dump version " + std::to_string(version));
  const auto len = get<std::uint32_t>(in);
  std::string text(len, '\0');
  in.read(text.data(), len);
  if (!in) throw ParseError("posterior dump is truncated");
  const auto meta = nlohmann::json::parse(text, nullptr, false);
  if (meta.is_discarded()) throw ParseError("posterior dump metadata is not valid JSON");

  PosteriorSamples s;
  try {
    s.layout = DrawLayout{meta.at("p").get<Index>(), meta.at("E").get<Index>(), meta.at("intercept").get<bool>()};
    s.form = likelihood_form_from_string(meta.at("likelihood_form").get<std::string>());
    s.n_chains = meta.at("n_chains").get<int>();
    s.n_warmup = meta.at("n_warmup").get<int>();
    s.n_kept = meta.at("n_kept").get<int>();
    s.base_seed = meta.at("base_seed").get<std::uint64_t>();
    s.chain_seeds = meta.at("chain_seeds").get<std::vector<std::uint64_t>>();
    s.covariate_names = meta.at("covariate_names").get<std::vector<std::string>>();
    s.rhat_threshold = meta.at("rhat_threshold").get<double>();
    s.warnings = meta.at("warnings").get<std::vector<std::string>>();
    s.config_json = meta.at("config").get<std::string>();
    const auto lengths = meta.at("chain_lengths").get<std::vector<std::size_t>>();
    const Index S = s.layout.scalar_count();
    VectorXd v(S);
    for (const auto n : lengths) {
      std::vector<ParamDraw> chain;
      chain.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(sizeof(double) * S));
        if (!in) throw ParseError("posterior dump is truncated");
        chain.push_back(s.layout.unflatten(v));
      }
      s.chains.push_back(std::move(chain));
    }
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("posterior dump metadata: ") + e.what());
  }
  if (s.n_kept >= 4) s.diagnostics = diagnostics(s, s.rhat_threshold);
  return s;
}

void write_posterior_binary(const PosteriorSamples& samples, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  write_posterior_binary(samples, out);
}

PosteriorSamples read_posterior_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  return read_posterior_binary(in);
}

void write_diagnostics_csv(const std::vector<DiagnosticRow>& rows, std::ostream& out) {
  out << "param,rhat,ess,flagged\n";
  for (const auto& r : rows) {
    out << r.param << ',' << (std::isnan(r.rhat) ? "NA" : format_double(r.rhat)) << ','
        << (std::isnan(r.ess) ? "NA" : format_double(r.ess)) << ',' << (r.flagged ? 1 : 0) << '\n';
  }
}

void write_prediction_csv(const VectorXd& mean, const MatrixXd& intervals, std::ostream& out) {
  if (intervals.rows() != mean.size() || intervals.cols() != 2) throw ContractError("prediction CSV: dimension mismatch");
  out << "row,mean,lo,hi\n";
  for (Index r = 0; r < mean.size(); ++r)
    out << r << ',' << format_double(mean(r)) << ',' << format_double(intervals(r, 0)) << ','
        << format_double(intervals(r, 1)) << '\n';
}

void write_prediction_draws_csv(const PredictiveDraws& draws, std::ostream& out) {
  out << "row,draw,value\n";
  for (Index r = 0; r < draws.n0(); ++r)
    for (Index i = 0; i < draws.draws(); ++i) out << r << ',' << i << ',' << format_double(draws.response(r, i)) << '\n';
}

void write_comment_header(std::ostream& out, const std::string& config_json) {
  const auto j = parse_config(config_json);
  if (!j.is_object()) {
    out << "# config: " << config_json << '\n';
    return;
  }
  for (auto it = j.begin(); it != j.end(); ++it) out << "# " << it.key() << ": " << it.value().dump() << '\n';
}

std::string selection_report_json(const SelectionReport& report, const std::string& config_json) {
  nlohmann::json j;
  j["alpha"] = report.alpha;
  j["N"] = report.N;
  j["coordinates"] = nlohmann::json::array();
  for (const auto& c : report.coords) {
    j["coordinates"].push_back({{"name", c.name},
                                {"negative", c.negative},
                                {"positive", c.positive},
                                {"tail_fraction", c.tail_fraction},
                                {"selected", c.selected}});
  }
  j["warnings"] = report.warnings;
  j["config"] = parse_config(config_json);
  return j.dump(2);
}

std::string coverage_report_json(double nominal, double coverage, double clamp_fraction, const std::string& config_json) {
  nlohmann::json j;
  j["nominal"] = nominal;
  j["empirical_coverage"] = coverage;
  j["clamp_fraction"] = clamp_fraction;
  j["config"] = parse_config(config_json);
  return j.dump(2);
}

}  // namespace bgi

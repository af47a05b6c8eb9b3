#include "rpmixl/results_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

namespace rpmixl {

using ojson = nlohmann::ordered_json;

namespace {

// NaN and infinities travel as null.
ojson number(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

ojson numbers(const std::vector<double>& v) {
  auto out = ojson::array();
  for (double x : v) out.push_back(number(x));
  return out;
}

double get_number(const ojson& node) {
  if (node.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return node.get<double>();
}

std::vector<double> get_numbers(const ojson& node) {
  std::vector<double> out;
  for (const auto& x : node) out.push_back(get_number(x));
  return out;
}

ojson draws_to_json(const DrawConfig& d) {
  ojson j;
  j["n_draws"] = d.n_draws;
  j["burn_in"] = d.burn_in;
  j["primes"] = d.primes;
  j["shuffle_seed"] = d.shuffle_seed ? ojson(*d.shuffle_seed) : ojson(nullptr);
  return j;
}

DrawConfig draws_from_json(const ojson& j) {
  DrawConfig d;
  d.n_draws = j.at("n_draws").get<std::size_t>();
  d.burn_in = j.at("burn_in").get<std::size_t>();
  d.primes = j.at("primes").get<std::vector<std::uint32_t>>();
  if (!j.at("shuffle_seed").is_null()) d.shuffle_seed = j.at("shuffle_seed").get<std::uint64_t>();
  return d;
}

ojson effects_json(const MarginalEffectsTable& t) {
  ojson j;
  j["run_id"] = t.run_id;
  j["alternatives"] = t.alternatives;
  auto rows = ojson::array();
  for (const auto& r : t.rows) {
    ojson row;
    row["variable"] = r.variable;
    row["effects"] = numbers(r.effects);
    row["n_used"] = r.n_used;
    rows.push_back(std::move(row));
  }
  j["rows"] = std::move(rows);
  return j;
}

MarginalEffectsTable effects_from(const ojson& j) {
  MarginalEffectsTable t;
  t.run_id = j.at("run_id").get<std::string>();
  t.alternatives = j.at("alternatives").get<std::vector<std::string>>();
  for (const auto& row : j.at("rows")) {
    EffectsRow r;
    r.variable = row.at("variable").get<std::string>();
    r.effects = get_numbers(row.at("effects"));
    r.n_used = row.at("n_used").get<std::size_t>();
    t.rows.push_back(std::move(r));
  }
  return t;
}

}  // namespace

std::string results_to_json(const EstimationResult& r, const MarginalEffectsTable* effects) {
  ojson doc;
  doc["format"] = kResultsFormat;
  doc["run_id"] = r.run_id;
  doc["model"] = ojson::parse(serialize_model_spec(r.spec));
  auto inter = ojson::array();
  for (const auto& i : r.interactions) inter.push_back({{"name", i.name}, {"a", i.a}, {"b", i.b}});
  doc["interactions"] = std::move(inter);
  doc["n_observations"] = r.n_obs;
  doc["draws"] = draws_to_json(r.draws);
  doc["optimizer"] = {{"max_iterations", r.optimizer.max_iterations},
                      {"gradient_tolerance", r.optimizer.gradient_tolerance},
                      {"relative_ll_tolerance", r.optimizer.relative_ll_tolerance},
                      {"backtrack_factor", r.optimizer.backtrack_factor},
                      {"armijo_constant", r.optimizer.armijo_constant}};

  const ParameterLayout layout(r.spec);
  auto params = ojson::array();
  for (std::size_t i = 0; i < r.names.size(); ++i) {
    ojson p;
    p["name"] = r.names[i];
    p["role"] = i < layout.size() ? to_string(layout[i].role) : "unknown";
    p["estimate"] = number(r.theta_hat[i]);
    p["std_error"] = number(r.std_errors.at(i));
    p["t_stat"] = number(r.t_stats.at(i));
    params.push_back(std::move(p));
  }
  doc["parameters"] = std::move(params);
  auto cov = ojson::array();
  for (Eigen::Index i = 0; i < r.covariance.rows(); ++i) {
    auto row = ojson::array();
    for (Eigen::Index j = 0; j < r.covariance.cols(); ++j) row.push_back(number(r.covariance(i, j)));
    cov.push_back(std::move(row));
  }
  doc["covariance"] = std::move(cov);
  doc["covariance_method"] = to_string(r.covariance_method);
  doc["ll_zero"] = number(r.ll_zero);
  doc["ll_beta"] = number(r.ll_beta);
  doc["rho_squared"] = number(r.rho_squared);
  doc["converged"] = r.converged;
  doc["reason"] = r.reason;
  doc["iterations"] = r.iterations;
  doc["underflows"] = r.underflows;
  auto shares = ojson::array();
  for (const auto& s : r.shares) {
    shares.push_back({{"parameter", s.parameter},
                      {"mean", number(s.mean)},
                      {"sd", number(s.sd)},
                      {"above", number(s.above)},
                      {"below", number(s.below)},
                      {"degenerate", s.degenerate}});
  }
  doc["shares"] = std::move(shares);
  if (effects) doc["effects"] = effects_json(*effects);
  return doc.dump(2) + "\n";
}

ResultsDocument results_from_json(std::string_view text) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    throw std::runtime_error(fmt::format("results document is not valid JSON: {}", e.what()));
  }
  if (doc.value("format", std::string{}) != kResultsFormat)
    throw std::runtime_error("not an rpmixl results document");
  ResultsDocument out;
  auto& r = out.result;
  try {
    r.run_id = doc.at("run_id").get<std::string>();
    r.spec = parse_model_spec(doc.at("model").dump());
    for (const auto& i : doc.at("interactions"))
      r.interactions.push_back({i.at("name").get<std::string>(), i.at("a").get<std::string>(),
                                i.at("b").get<std::string>()});
    r.n_obs = doc.at("n_observations").get<std::size_t>();
    r.draws = draws_from_json(doc.at("draws"));
    const auto& opt = doc.at("optimizer");
    r.optimizer.max_iterations = opt.at("max_iterations").get<std::size_t>();
    r.optimizer.gradient_tolerance = opt.at("gradient_tolerance").get<double>();
    r.optimizer.relative_ll_tolerance = opt.at("relative_ll_tolerance").get<double>();
    r.optimizer.backtrack_factor = opt.at("backtrack_factor").get<double>();
    r.optimizer.armijo_constant = opt.at("armijo_constant").get<double>();
    for (const auto& p : doc.at("parameters")) {
      r.names.push_back(p.at("name").get<std::string>());
      r.theta_hat.values.push_back(get_number(p.at("estimate")));
      r.std_errors.push_back(get_number(p.at("std_error")));
      r.t_stats.push_back(get_number(p.at("t_stat")));
    }
    const auto& cov = doc.at("covariance");
    const auto n = static_cast<Eigen::Index>(cov.size());
    r.covariance.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto& row = cov.at(static_cast<std::size_t>(i));
      if (static_cast<Eigen::Index>(row.size()) != n) throw std::runtime_error("covariance is not square");
      for (Eigen::Index j = 0; j < n; ++j) r.covariance(i, j) = get_number(row.at(static_cast<std::size_t>(j)));
    }
    r.covariance_method = covariance_method_from_string(doc.at("covariance_method").get<std::string>());
    r.ll_zero = get_number(doc.at("ll_zero"));
    r.ll_beta = get_number(doc.at("ll_beta"));
    r.rho_squared = get_number(doc.at("rho_squared"));
    r.converged = doc.at("converged").get<bool>();
    r.reason = doc.at("reason").get<std::string>();
    r.iterations = doc.at("iterations").get<std::size_t>();
    r.underflows = doc.at("underflows").get<std::size_t>();
    for (const auto& s : doc.at("shares")) {
      DistributionShare share;
      share.parameter = s.at("parameter").get<std::string>();
      share.mean = get_number(s.at("mean"));
      share.sd = get_number(s.at("sd"));
      share.above = get_number(s.at("above"));
      share.below = get_number(s.at("below"));
      share.degenerate = s.at("degenerate").get<bool>();
      r.shares.push_back(std::move(share));
    }
    if (auto it = doc.find("effects"); it != doc.end()) out.effects = effects_from(*it);
  } catch (const ojson::exception& e) {
    throw std::runtime_error(fmt::format("malformed results document: {}", e.what()));
  }
  if (r.names.size() != ParameterLayout(r.spec).size())
    throw std::runtime_error("results document parameter count does not match its model");
  return out;
}

std::string effects_to_json(const MarginalEffectsTable& table) { return effects_json(table).dump(2) + "\n"; }

MarginalEffectsTable effects_from_json(std::string_view text) {
  try {
    return effects_from(ojson::parse(text));
  } catch (const ojson::exception& e) {
    throw std::runtime_error(fmt::format("malformed effects document: {}", e.what()));
  }
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot open '{}'", path));
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::string& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path));
  out << text;
}

}  // namespace rpmixl

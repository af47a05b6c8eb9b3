#include "rpmixl/synth.hpp"

#include <cmath>
#include <stdexcept>

#include <fmt/format.h>
#include <json.hpp>

#include "rpmixl/error.hpp"
#include "rpmixl/estimation.hpp"

namespace rpmixl {

void CovariateGenConfig::validate() const {
  if (n_observations < 1) throw std::invalid_argument("n_observations must be at least 1");
  for (const auto& [name, p] : probabilities) {
    if (!(p >= 0.0 && p <= 1.0))
      throw std::invalid_argument(fmt::format("Bernoulli probability for '{}' must lie in [0, 1]", name));
  }
}

namespace {

std::uint64_t mix64(std::uint64_t x) {
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

ObservationStream::ObservationStream(std::uint64_t seed, std::uint64_t index)
    : state_(mix64(mix64(seed + 0x9e3779b97f4a7c15ULL) ^ (index * 0xd1b54a32d192ed03ULL))) {}

double ObservationStream::uniform() {
  state_ += 0x9e3779b97f4a7c15ULL;
  const std::uint64_t bits = mix64(state_) >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double ObservationStream::normal() { return inv_normal_cdf(uniform()); }

Dataset simulate_dataset(const ModelSpec& spec, const ParameterVector& theta_true, const CovariateGenConfig& gen) {
  gen.validate();
  Dataset ds;
  ds.labels = spec.alternatives.labels;
  ds.label_column = spec.label_column;
  ds.provenance.source = fmt::format("simulated(seed={}, n={})", gen.seed, gen.n_observations);
  for (const auto& [name, p] : gen.probabilities) {
    if (ds.find(name) != ds.width() || name == spec.label_column)
      throw std::invalid_argument(fmt::format("duplicate generated column '{}'", name));
    ds.columns.push_back({name, true});
  }
  struct Product {
    std::size_t a, b;
  };
  std::vector<Product> products;
  for (const auto& inter : gen.interactions) {
    products.push_back({ds.index_of(inter.a), ds.index_of(inter.b)});
    if (ds.find(inter.name) != ds.width())
      throw std::invalid_argument(fmt::format("duplicate generated column '{}'", inter.name));
    ds.columns.push_back({inter.name, true});
    ds.provenance.derivations.push_back(inter);
  }
  for (const auto& name : spec.referenced_columns()) {
    if (ds.find(name) == ds.width())
      throw std::invalid_argument(fmt::format("no generator configured for model column '{}'", name));
  }

  const LikelihoodModel model(spec, ds);
  if (theta_true.size() != model.layout().size())
    throw std::invalid_argument(fmt::format("true parameter vector has {} values, layout has {}", theta_true.size(),
                                            model.layout().size()));

  const std::size_t J = spec.alternatives.size();
  const std::size_t n_base = gen.probabilities.size();
  std::vector<double> draw(model.n_random());
  std::vector<double> probs(J);
  ds.observations.reserve(gen.n_observations);
  for (std::size_t n = 0; n < gen.n_observations; ++n) {
    ObservationStream stream(gen.seed, n);
    Observation obs;
    obs.values.resize(ds.width());
    for (std::size_t c = 0; c < n_base; ++c) obs.values[c] = stream.uniform() < gen.probabilities[c].second ? 1.0 : 0.0;
    for (std::size_t k = 0; k < products.size(); ++k)
      obs.values[n_base + k] = obs.values[products[k].a] * obs.values[products[k].b];
    for (auto& v : draw) v = stream.normal();
    model.simulated_probabilities(theta_true, obs.values, draw, 1, probs);
    const double u = stream.uniform();
    double cumulative = 0.0;
    obs.chosen = J - 1;
    for (std::size_t j = 0; j < J; ++j) {
      cumulative += probs[j];
      if (u < cumulative) {
        obs.chosen = j;
        break;
      }
    }
    ds.observations.push_back(std::move(obs));
  }
  return ds;
}

RecoveryReport recovery_experiment(const ModelSpec& spec, const ParameterVector& theta_true,
                                   const CovariateGenConfig& gen, const DrawConfig& draws, std::size_t n_seeds,
                                   const OptimizerConfig& optimizer, std::size_t workers) {
  const ParameterLayout layout(spec);
  RecoveryReport report;
  report.names = layout.names();
  report.truth = theta_true.values;
  const std::size_t P = layout.size();

  for (std::size_t k = 0; k < n_seeds; ++k) {
    CovariateGenConfig g = gen;
    g.seed = gen.seed + k;
    Replication rep;
    rep.seed = g.seed;
    try {
      const Dataset ds = simulate_dataset(spec, theta_true, g);
      const LikelihoodModel model(spec, ds);
      const DrawBlock block = generate_draw_block(ds.size(), model.n_random(), draws);
      const auto result = estimate(model, ds, block, optimizer, workers);
      rep.estimate = result.theta_hat.values;
      rep.std_errors = result.std_errors;
      rep.converged = result.converged;
      rep.reason = result.reason;
    } catch (const std::exception& e) {
      throw EstimationError(fmt::format("recovery replication with seed {} failed: {}", g.seed, e.what()));
    }
    for (std::size_t i = 0; i < P; ++i) {
      const bool scale = layout[i].role == ParameterRole::RandomScale;
      const double est = scale ? std::abs(rep.estimate[i]) : rep.estimate[i];
      const double truth = scale ? std::abs(theta_true[i]) : theta_true[i];
      rep.error.push_back(est - truth);
      rep.within_3se.push_back(std::abs(est - truth) < 3.0 * rep.std_errors[i]);
    }
    report.replications.push_back(std::move(rep));
  }

  std::size_t hits = 0;
  for (std::size_t i = 0; i < P; ++i) {
    ParameterRecovery pr;
    pr.name = report.names[i];
    pr.truth = theta_true[i];
    std::size_t covered = 0;
    for (const auto& rep : report.replications) {
      pr.mean_bias += rep.error[i];
      covered += rep.within_3se[i] ? 1 : 0;
    }
    if (n_seeds > 0) {
      pr.mean_bias /= static_cast<double>(n_seeds);
      pr.coverage = static_cast<double>(covered) / static_cast<double>(n_seeds);
    }
    hits += covered;
    report.parameters.push_back(std::move(pr));
  }
  if (n_seeds > 0 && P > 0) report.overall_coverage = static_cast<double>(hits) / static_cast<double>(n_seeds * P);
  return report;
}

std::string recovery_report_json(const RecoveryReport& report) {
  nlohmann::ordered_json doc;
  doc["names"] = report.names;
  doc["truth"] = report.truth;
  doc["overall_coverage"] = report.overall_coverage;
  auto params = nlohmann::ordered_json::array();
  for (const auto& p : report.parameters) {
    nlohmann::ordered_json row;
    row["name"] = p.name;
    row["truth"] = p.truth;
    row["mean_bias"] = p.mean_bias;
    row["coverage"] = p.coverage;
    params.push_back(std::move(row));
  }
  doc["parameters"] = std::move(params);
  auto reps = nlohmann::ordered_json::array();
  for (const auto& r : report.replications) {
    nlohmann::ordered_json row;
    row["seed"] = r.seed;
    row["converged"] = r.converged;
    row["reason"] = r.reason;
    row["estimate"] = r.estimate;
    row["std_errors"] = r.std_errors;
    row["error"] = r.error;
    row["within_3se"] = r.within_3se;
    reps.push_back(std::move(row));
  }
  doc["replications"] = std::move(reps);
  return doc.dump(2);
}

}  // namespace rpmixl

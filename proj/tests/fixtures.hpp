#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "rpmixl/dataset.hpp"
#include "rpmixl/draws.hpp"
#include "rpmixl/likelihood.hpp"
#include "rpmixl/model_spec.hpp"

namespace rpmixl::testing {

// Injury-severity outcome model: non-surgical / surgical / fatal, surgical as the base.
inline const char* kInjuryModel = R"({
  "alternatives": ["non_surgical", "surgical", "fatal"],
  "base": "surgical",
  "label_column": "outcome",
  "utilities": [
    {"alt": "non_surgical", "var": "constant", "kind": "fixed"},
    {"alt": "fatal", "var": "constant", "kind": "fixed"},
    {"alt": "fatal", "var": "male", "kind": "random", "het_mean": ["motorcycle"], "dist": "normal"},
    {"alt": "fatal", "var": "rural_road", "kind": "random", "het_mean": ["nighttime"]},
    {"alt": "non_surgical", "var": "pedestrian", "kind": "fixed"},
    {"alt": "fatal", "var": "bus", "kind": "fixed"},
    {"alt": "fatal", "var": "truck", "kind": "fixed"},
    {"alt": "fatal", "var": "age_over_65", "kind": "fixed"},
    {"alt": "non_surgical", "var": "weekday", "kind": "fixed"},
    {"alt": "fatal", "var": "wet_pavement", "kind": "fixed"},
    {"alt": "non_surgical", "var": "low_visibility", "kind": "fixed"},
    {"alt": "fatal", "var": "speeding", "kind": "fixed"},
    {"alt": "fatal", "var": "overtaking", "kind": "fixed"},
    {"alt": "non_surgical", "var": "lowvis_bus", "kind": "fixed"},
    {"alt": "fatal", "var": "overtaking_wet", "kind": "fixed"}
  ]
})";

/// Random valid spec over columns x0..x{n_columns-1}.
inline ModelSpec random_spec(std::mt19937_64& rng, std::size_t n_columns = 6) {
  std::uniform_int_distribution<std::size_t> n_alt_dist(2, 4);
  std::bernoulli_distribution coin(0.5);
  ModelSpec spec;
  const std::size_t J = n_alt_dist(rng);
  for (std::size_t j = 0; j < J; ++j) spec.alternatives.labels.push_back(fmt::format("alt{}", j));
  spec.alternatives.base_index = std::uniform_int_distribution<std::size_t>(0, J - 1)(rng);
  spec.label_column = "outcome";
  std::vector<std::string> columns;
  for (std::size_t c = 0; c < n_columns; ++c) columns.push_back(fmt::format("x{}", c));

  for (std::size_t j = 0; j < J; ++j) {
    if (j != spec.alternatives.base_index && coin(rng)) {
      UtilityEntry e;
      e.alternative = j;
      e.variable = std::string(kConstant);
      spec.entries.push_back(e);
    }
  }
  std::uniform_int_distribution<std::size_t> pick_alt(0, J - 1);
  std::uniform_int_distribution<std::size_t> pick_col(0, n_columns - 1);
  std::uniform_int_distribution<std::size_t> n_entries(1, 5);
  const std::size_t wanted = n_entries(rng);
  for (std::size_t tries = 0; spec.entries.size() < wanted + 2 && tries < 50; ++tries) {
    UtilityEntry e;
    e.alternative = pick_alt(rng);
    e.variable = columns[pick_col(rng)];
    bool dup = false;
    for (const auto& other : spec.entries) dup |= other.alternative == e.alternative && other.variable == e.variable;
    if (dup) continue;
    if (coin(rng)) {
      e.kind = CoefficientKind::Random;
      for (const auto& c : columns) {
        if (c == e.variable) continue;
        const auto r = std::uniform_int_distribution<int>(0, 5)(rng);
        if (r == 0) e.mean_shifters.push_back(c);
        else if (r == 1) e.variance_shifters.push_back(c);
      }
    }
    spec.entries.push_back(e);
  }
  if (spec.entries.empty()) {
    UtilityEntry e;
    e.alternative = 0;
    e.variable = columns[0];
    spec.entries.push_back(e);
  }
  validate(spec);
  return spec;
}

/// Random 0/1 dataset over x0..x{n_columns-1} with uniformly random outcomes.
inline Dataset random_dataset(std::mt19937_64& rng, const ModelSpec& spec, std::size_t n, std::size_t n_columns = 6) {
  Dataset ds;
  ds.labels = spec.alternatives.labels;
  ds.label_column = spec.label_column;
  for (std::size_t c = 0; c < n_columns; ++c) ds.columns.push_back({fmt::format("x{}", c), true});
  std::bernoulli_distribution coin(0.5);
  std::uniform_int_distribution<std::size_t> alt(0, spec.alternatives.size() - 1);
  for (std::size_t i = 0; i < n; ++i) {
    Observation o;
    o.chosen = alt(rng);
    for (std::size_t c = 0; c < n_columns; ++c) o.values.push_back(coin(rng) ? 1.0 : 0.0);
    ds.observations.push_back(o);
  }
  return ds;
}

inline ParameterVector random_theta(std::mt19937_64& rng, std::size_t n, double spread = 1.0) {
  std::uniform_real_distribution<double> u(-spread, spread);
  ParameterVector theta = ParameterVector::zeros(n);
  for (auto& v : theta.values) v = u(rng);
  return theta;
}

}  // namespace rpmixl::testing

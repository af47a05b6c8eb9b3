#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "rpmixl/effects.hpp"
#include "rpmixl/error.hpp"

using namespace rpmixl;

namespace {

double row_sum(const EffectsRow& row) { return std::accumulate(row.effects.begin(), row.effects.end(), 0.0); }

}  // namespace

TEST_CASE("two observations, fixed parameters: hand-computed softmax differences") {
  const auto spec = parse_model_spec(R"({"alternatives": ["a", "b", "c"], "base": "a", "label_column": "y",
    "utilities": [{"alt": "b", "var": "constant", "kind": "fixed"},
                  {"alt": "b", "var": "x", "kind": "fixed"},
                  {"alt": "c", "var": "z", "kind": "fixed"}]})");
  Dataset ds;
  ds.columns = {{"x", true}, {"z", true}};
  ds.observations = {{0, {0.0, 1.0}}, {2, {1.0, 0.0}}};
  const LikelihoodModel model(spec, ds);
  const ParameterVector theta({0.3, 0.9, -0.4});
  const auto block = zero_draw_block(2, 0);

  auto probs = [](double ub, double uc) {
    const double d = 1.0 + std::exp(ub) + std::exp(uc);
    return std::vector<double>{1.0 / d, std::exp(ub) / d, std::exp(uc) / d};
  };
  std::vector<double> expected(3, 0.0);
  for (double z : {1.0, 0.0}) {
    const auto p1 = probs(0.3 + 0.9, -0.4 * z);
    const auto p0 = probs(0.3, -0.4 * z);
    for (int j = 0; j < 3; ++j) expected[j] += (p1[j] - p0[j]) / 2.0;
  }
  const auto row = average_discrete_effects(model, theta, ds, block, "x");
  CHECK(row.n_used == 2);
  for (int j = 0; j < 3; ++j) CHECK(std::abs(row.effects[j] - expected[j]) <= 1e-12);

  const auto zero_only = average_discrete_effects(model, theta, ds, block, "x", EffectsPopulation::ObservedZero);
  CHECK(zero_only.n_used == 1);
  const auto p1 = probs(1.2, -0.4), p0 = probs(0.3, -0.4);
  for (int j = 0; j < 3; ++j) CHECK(std::abs(zero_only.effects[j] - (p1[j] - p0[j])) <= 1e-12);
}

TEST_CASE("a variable outside the model has no effect") {
  std::mt19937_64 rng(83);
  const auto spec = parse_model_spec(R"({"alternatives": ["a", "b", "c"], "base": "b", "label_column": "y",
    "utilities": [{"alt": "a", "var": "x0", "kind": "random", "het_mean": ["x1"]},
                  {"alt": "c", "var": "x2", "kind": "fixed"}]})");
  const auto ds = testing::random_dataset(rng, spec, 40);
  const LikelihoodModel model(spec, ds);
  DrawConfig config;
  config.n_draws = 10;
  const auto block = generate_draw_block(ds.size(), 1, config);
  const auto theta = testing::random_theta(rng, model.layout().size());
  const auto row = average_discrete_effects(model, theta, ds, block, "x5");
  for (double e : row.effects) CHECK(e == 0.0);
}

TEST_CASE("flips propagate into shifters and derived interactions") {
  const auto spec = parse_model_spec(R"({"alternatives": ["a", "b"], "base": "a", "label_column": "y",
    "utilities": [{"alt": "b", "var": "ab", "kind": "fixed"}]})");
  Dataset ds;
  ds.columns = {{"p", true}, {"q", true}};
  ds.observations = {{0, {0.0, 1.0}}, {1, {1.0, 1.0}}, {0, {1.0, 0.0}}};
  ds = derive_interaction(ds, "p", "q", "ab");
  const LikelihoodModel model(spec, ds);
  const ParameterVector theta({1.5});
  const auto block = zero_draw_block(3, 0);
  const auto row = average_discrete_effects(model, theta, ds, block, "p");
  // Only observations with q = 1 respond: (sigmoid(1.5) - 0.5) averaged over 3.
  const double d = 1.0 / (1.0 + std::exp(-1.5)) - 0.5;
  CHECK(std::abs(row.effects[1] - 2.0 * d / 3.0) <= 1e-12);
  CHECK(std::abs(row_sum(row)) <= 1e-12);

  // Mean shifter path.
  const auto shift = parse_model_spec(R"({"alternatives": ["a", "b"], "base": "a", "label_column": "y",
    "utilities": [{"alt": "b", "var": "p", "kind": "random", "het_mean": ["q"]}]})");
  Dataset d2;
  d2.columns = {{"p", true}, {"q", true}};
  d2.observations = {{0, {1.0, 0.0}}, {1, {1.0, 1.0}}};
  const LikelihoodModel m2(shift, d2);
  DrawConfig config;
  config.n_draws = 20;
  const auto b2 = generate_draw_block(2, 1, config);
  const auto q = average_discrete_effects(m2, ParameterVector({0.0, 0.5, 2.0}), d2, b2, "q");
  CHECK(q.effects[1] > 0.0);
}

TEST_CASE("errors") {
  Dataset ds;
  ds.columns = {{"x", true}, {"age", false}};
  ds.observations = {{0, {1.0, 30.0}}, {1, {0.0, 50.0}}};
  const auto spec = parse_model_spec(R"({"alternatives": ["a", "b"], "base": "a", "label_column": "y",
    "utilities": [{"alt": "b", "var": "x", "kind": "fixed"}, {"alt": "b", "var": "age", "kind": "fixed"}]})");
  const LikelihoodModel model(spec, ds);
  const auto block = zero_draw_block(2, 0);
  const ParameterVector theta({0.1, 0.01});
  CHECK_THROWS_AS(average_discrete_effects(model, theta, ds, block, "age"), DataError);
  CHECK_THROWS_AS(average_discrete_effects(model, theta, ds, block, "missing"), DataError);
  CHECK(default_effect_variables(model, ds) == std::vector<std::string>{"x"});
}

TEST_CASE("property: rows sum to zero and lie in (-1, 1)") {
  std::mt19937_64 rng(89);
  for (int trial = 0; trial < 30; ++trial) {
    const auto spec = testing::random_spec(rng);
    const auto ds = testing::random_dataset(rng, spec, 25);
    const LikelihoodModel model(spec, ds);
    DrawConfig config;
    config.n_draws = 12;
    const auto block = generate_draw_block(ds.size(), model.n_random(), config);
    const auto theta = testing::random_theta(rng, model.layout().size(), 2.0);
    std::vector<std::string> vars;
    for (std::size_t c = 0; c < ds.width(); ++c) vars.push_back(ds.columns[c].name);
    const auto table = marginal_effects_table(model, theta, ds, block, vars, "run");
    CHECK(table.rows.size() == vars.size());
    for (const auto& row : table.rows) {
      CHECK(std::abs(row_sum(row)) <= 1e-10);
      for (double e : row.effects) {
        CHECK(e > -1.0);
        CHECK(e < 1.0);
      }
    }
  }
}

TEST_CASE("property: sign coherence for fixed-parameter models") {
  std::mt19937_64 rng(97);
  std::uniform_real_distribution<double> positive(0.05, 2.0);
  for (int trial = 0; trial < 30; ++trial) {
    auto spec = testing::random_spec(rng);
    for (auto& e : spec.entries) {
      e.kind = CoefficientKind::Fixed;
      e.mean_shifters.clear();
      e.variance_shifters.clear();
    }
    const auto ds = testing::random_dataset(rng, spec, 30);
    const LikelihoodModel model(spec, ds);
    const auto block = zero_draw_block(ds.size(), 0);
    auto theta = testing::random_theta(rng, model.layout().size(), 1.0);
    for (const auto& d : model.layout().descriptors()) {
      const auto& e = spec.entries[d.entry];
      if (e.is_constant()) continue;
      std::size_t uses = 0;
      for (const auto& other : spec.entries) uses += other.variable == e.variable;
      if (uses != 1) continue;
      theta[d.index] = positive(rng);
      const auto row = average_discrete_effects(model, theta, ds, block, e.variable);
      CHECK(row.effects[e.alternative] > 0.0);
    }
  }
}

TEST_CASE("forcing to the observed value contributes nothing for those observations") {
  const auto spec = parse_model_spec(R"({"alternatives": ["a", "b"], "base": "a", "label_column": "y",
    "utilities": [{"alt": "b", "var": "x", "kind": "fixed"}]})");
  Dataset ds;
  ds.columns = {{"x", true}};
  ds.observations = {{0, {1.0}}, {0, {1.0}}};
  const LikelihoodModel model(spec, ds);
  const auto row =
      average_discrete_effects(model, ParameterVector({0.7}), ds, zero_draw_block(2, 0), "x", EffectsPopulation::ObservedZero);
  CHECK(row.n_used == 0);
  for (double e : row.effects) CHECK(e == 0.0);
}

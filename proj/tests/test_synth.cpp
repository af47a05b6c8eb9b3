#include <doctest.h>

#include <cmath>
#include <random>

#include "rpmixl/synth.hpp"

using namespace rpmixl;

namespace {

ModelSpec three_way() {
  return parse_model_spec(R"({"alternatives": ["a", "b", "c"], "base": "a", "label_column": "y",
    "utilities": [{"alt": "b", "var": "constant", "kind": "fixed"},
                  {"alt": "c", "var": "constant", "kind": "fixed"},
                  {"alt": "c", "var": "x1", "kind": "random", "het_mean": ["x2"]},
                  {"alt": "b", "var": "x3", "kind": "fixed"}]})");
}

CovariateGenConfig gen_config(std::size_t n, std::uint64_t seed) {
  CovariateGenConfig gen;
  gen.probabilities = {{"x1", 0.5}, {"x2", 0.3}, {"x3", 0.6}};
  gen.n_observations = n;
  gen.seed = seed;
  return gen;
}

std::vector<double> shares(const Dataset& ds) {
  std::vector<double> s(ds.labels.size(), 0.0);
  for (const auto& o : ds.observations) s[o.chosen] += 1.0 / static_cast<double>(ds.size());
  return s;
}

}  // namespace

TEST_CASE("a saturated constant decides every outcome") {
  const auto spec = three_way();
  for (std::size_t k : {0, 1}) {
    auto theta = ParameterVector::zeros(6);
    theta[k] = 50.0;
    const auto ds = simulate_dataset(spec, theta, gen_config(500, 3));
    for (const auto& o : ds.observations) CHECK(o.chosen == k + 1);
  }
}

TEST_CASE("zero parameters give equal shares") {
  const auto ds = simulate_dataset(three_way(), ParameterVector::zeros(6), gen_config(10000, 4));
  for (double s : shares(ds)) CHECK(std::abs(s - 1.0 / 3.0) < 0.02);
}

TEST_CASE("same seed, same data; observations are independent streams") {
  const ParameterVector theta({0.2, -0.1, -0.4, 0.5, 1.0, 0.7});
  const auto a = simulate_dataset(three_way(), theta, gen_config(300, 11));
  const auto b = simulate_dataset(three_way(), theta, gen_config(300, 11));
  CHECK(a == b);
  CHECK_FALSE(a == simulate_dataset(three_way(), theta, gen_config(300, 12)));
  const auto longer = simulate_dataset(three_way(), theta, gen_config(400, 11));
  for (std::size_t n = 0; n < 300; ++n) CHECK(longer.observations[n] == a.observations[n]);

  ObservationStream s1(5, 9), s2(5, 9);
  for (int i = 0; i < 10; ++i) CHECK(s1.uniform() == s2.uniform());
}

TEST_CASE("generated covariates and interactions") {
  auto gen = gen_config(20000, 21);
  gen.interactions = {{"x1x2", "x1", "x2"}};
  const auto ds = simulate_dataset(three_way(), ParameterVector::zeros(6), gen);
  const auto t = summarize(ds);
  CHECK(std::abs(t.rows[0].mean - 0.5) < 0.02);
  CHECK(std::abs(t.rows[1].mean - 0.3) < 0.02);
  CHECK(std::abs(t.rows[3].mean - 0.15) < 0.02);
  for (const auto& o : ds.observations) CHECK(o.values[3] == o.values[0] * o.values[1]);
}

TEST_CASE("precondition violations") {
  CHECK_THROWS_AS(simulate_dataset(three_way(), ParameterVector::zeros(5), gen_config(10, 1)), std::invalid_argument);
  auto gen = gen_config(10, 1);
  gen.probabilities.pop_back();
  CHECK_THROWS_AS(simulate_dataset(three_way(), ParameterVector::zeros(6), gen), std::invalid_argument);
  gen = gen_config(10, 1);
  gen.probabilities[0].second = 1.5;
  CHECK_THROWS_AS(simulate_dataset(three_way(), ParameterVector::zeros(6), gen), std::invalid_argument);
}

TEST_CASE("property: empirical shares track model probabilities") {
  const auto spec = three_way();
  const ParameterVector theta({0.4, -0.3, -0.8, 0.6, 1.2, 0.9});
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto ds = simulate_dataset(spec, theta, gen_config(4000, seed));
    const LikelihoodModel model(spec, ds);
    DrawConfig config;
    config.n_draws = 400;
    const auto block = generate_draw_block(1, 1, config);
    std::vector<double> expected(3, 0.0), p(3);
    for (const auto& o : ds.observations) {
      model.simulated_probabilities(theta, o.values, block.observation(0), block.n_draws(), p);
      for (int j = 0; j < 3; ++j) expected[j] += p[j] / static_cast<double>(ds.size());
    }
    const auto got = shares(ds);
    for (int j = 0; j < 3; ++j)
      CHECK(std::abs(got[j] - expected[j]) < 3.0 * std::sqrt(expected[j] * (1 - expected[j]) / 4000.0));
  }
}

TEST_CASE("recovery report structure with one replication") {
  DrawConfig draws;
  draws.n_draws = 30;
  const ParameterVector theta({0.4, -0.3, -0.8, 0.6, 1.2, 0.9});
  const auto report = recovery_experiment(three_way(), theta, gen_config(500, 7), draws, 1);
  REQUIRE(report.replications.size() == 1);
  CHECK(report.replications[0].seed == 7);
  CHECK(report.parameters.size() == 6);
  CHECK(report.names[4] == "c:x1:sd");
  CHECK(report.replications[0].error[4] == std::abs(report.replications[0].estimate[4]) - 1.2);
  CHECK(recovery_report_json(report).find("\"replications\"") != std::string::npos);
}

TEST_CASE("zero truth: small mean bias for fixed coefficients") {
  const auto spec = parse_model_spec(R"({"alternatives": ["a", "b", "c"], "base": "a", "label_column": "y",
    "utilities": [{"alt": "b", "var": "constant", "kind": "fixed"},
                  {"alt": "c", "var": "constant", "kind": "fixed"},
                  {"alt": "c", "var": "x1", "kind": "fixed"},
                  {"alt": "b", "var": "x3", "kind": "fixed"}]})");
  DrawConfig draws;
  draws.n_draws = 1;
  const auto report = recovery_experiment(spec, ParameterVector::zeros(4), gen_config(2000, 100), draws, 20);
  for (const auto& p : report.parameters) CHECK(std::abs(p.mean_bias) <= 0.1);
}

TEST_CASE("recovery holds with a variance shifter at zero") {
  const auto spec = parse_model_spec(R"({"alternatives": ["a", "b", "c"], "base": "a", "label_column": "y",
    "utilities": [{"alt": "b", "var": "constant", "kind": "fixed"},
                  {"alt": "c", "var": "x1", "kind": "random", "het_mean": ["x2"], "het_var": ["x3"]},
                  {"alt": "b", "var": "x3", "kind": "fixed"}]})");
  DrawConfig draws;
  draws.n_draws = 100;
  const ParameterVector theta({0.3, -0.5, 0.3, 1.0, 1.0, 0.0});
  const auto report = recovery_experiment(spec, theta, gen_config(1500, 200), draws, 6);
  CHECK(report.overall_coverage >= 0.9);
}

#include "rpmixl/effects.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "rpmixl/error.hpp"
#include "rpmixl/parallel.hpp"

namespace rpmixl {

const EffectsRow* MarginalEffectsTable::find(std::string_view variable) const {
  auto it = std::find_if(rows.begin(), rows.end(), [&](const EffectsRow& r) { return r.variable == variable; });
  return it == rows.end() ? nullptr : &*it;
}

namespace {

struct Recompute {
  std::size_t target;
  std::size_t a;
  std::size_t b;
};

// Derivations downstream of `column`, in derivation order.
std::vector<Recompute> dependent_derivations(const Dataset& ds, std::size_t column) {
  std::set<std::size_t> affected{column};
  std::vector<Recompute> out;
  for (const auto& d : ds.provenance.derivations) {
    const std::size_t target = ds.index_of(d.name);
    if (target == column) continue;
    const std::size_t a = ds.index_of(d.a);
    const std::size_t b = ds.index_of(d.b);
    if (affected.count(a) || affected.count(b)) {
      out.push_back({target, a, b});
      affected.insert(target);
    }
  }
  return out;
}

}  // namespace

EffectsRow average_discrete_effects(const LikelihoodModel& model, const ParameterVector& theta, const Dataset& ds,
                                    const DrawBlock& block, std::string_view variable, EffectsPopulation population,
                                    std::size_t workers) {
  const std::size_t column = ds.index_of(variable);
  if (!ds.columns[column].binary)
    throw DataError(fmt::format("marginal effects need a binary indicator; '{}' is not binary", variable), 0,
                    std::string(variable));
  if (block.n_obs() != ds.size() || block.n_dims() != model.n_random())
    throw std::invalid_argument("draw block shape does not match the dataset and model");

  const auto recompute = dependent_derivations(ds, column);
  const std::size_t J = model.n_alternatives();
  const std::size_t N = ds.size();
  std::vector<double> diffs(N * J, 0.0);
  std::vector<char> used(N, 0);

  parallel_for(
      N,
      [&](std::size_t n) {
        const auto& obs = ds.observations[n];
        if (population == EffectsPopulation::ObservedZero && obs.values[column] != 0.0) return;
        used[n] = 1;
        std::vector<double> values = obs.values;
        std::vector<double> p1(J), p0(J);
        auto state = [&](double forced, std::span<double> out) {
          values[column] = forced;
          for (const auto& r : recompute) values[r.target] = values[r.a] * values[r.b];
          model.simulated_probabilities(theta, values, block.observation(n), block.n_draws(), out);
        };
        state(1.0, p1);
        state(0.0, p0);
        for (std::size_t j = 0; j < J; ++j) diffs[n * J + j] = p1[j] - p0[j];
      },
      workers == 0 ? worker_count() : workers);

  EffectsRow row;
  row.variable = std::string(variable);
  row.effects.assign(J, 0.0);
  for (std::size_t n = 0; n < N; ++n) {
    if (!used[n]) continue;
    ++row.n_used;
    for (std::size_t j = 0; j < J; ++j) row.effects[j] += diffs[n * J + j];
  }
  if (row.n_used > 0) {
    for (auto& e : row.effects) e /= static_cast<double>(row.n_used);
  }
  return row;
}

std::vector<std::string> default_effect_variables(const LikelihoodModel& model, const Dataset& ds) {
  std::vector<std::string> out;
  const auto& spec = model.spec();
  for (const auto& d : model.layout().descriptors()) {
    if (d.role != ParameterRole::FixedBeta && d.role != ParameterRole::RandomMean) continue;
    const auto& e = spec.entries[d.entry];
    if (e.is_constant()) continue;
    const std::size_t c = ds.find(e.variable);
    if (c == ds.width() || !ds.columns[c].binary) continue;
    if (std::find(out.begin(), out.end(), e.variable) == out.end()) out.push_back(e.variable);
  }
  return out;
}

MarginalEffectsTable marginal_effects_table(const LikelihoodModel& model, const ParameterVector& theta,
                                            const Dataset& ds, const DrawBlock& block,
                                            const std::vector<std::string>& variables, std::string run_id,
                                            EffectsPopulation population, std::size_t workers) {
  MarginalEffectsTable table;
  table.run_id = std::move(run_id);
  table.alternatives = model.spec().alternatives.labels;
  for (const auto& v : variables)
    table.rows.push_back(average_discrete_effects(model, theta, ds, block, v, population, workers));
  return table;
}

}  // namespace rpmixl

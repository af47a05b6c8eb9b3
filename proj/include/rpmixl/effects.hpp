#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "rpmixl/dataset.hpp"
#include "rpmixl/draws.hpp"
#include "rpmixl/likelihood.hpp"

namespace rpmixl {

enum class EffectsPopulation {
  AllObservations,  // every observation, whatever its observed value
  ObservedZero,     // only observations where the indicator is 0
};

struct EffectsRow {
  std::string variable;
  std::vector<double> effects;  // per alternative: mean of P(x=1) - P(x=0)
  std::size_t n_used = 0;

  bool operator==(const EffectsRow&) const = default;
};

struct MarginalEffectsTable {
  std::string run_id;
  std::vector<std::string> alternatives;
  std::vector<EffectsRow> rows;

  const EffectsRow* find(std::string_view variable) const;
  bool operator==(const MarginalEffectsTable&) const = default;
};

/// Average discrete change of every outcome probability when `variable` flips 0 -> 1.
///
/// Derived interaction columns that depend on the variable are rebuilt in both states, and the
/// same draws are used for both (common random numbers).
EffectsRow average_discrete_effects(const LikelihoodModel& model, const ParameterVector& theta, const Dataset& ds,
                                    const DrawBlock& block, std::string_view variable,
                                    EffectsPopulation population = EffectsPopulation::AllObservations,
                                    std::size_t workers = 0);

/// Binary, non-constant utility variables in layout order (one row per distinct column).
std::vector<std::string> default_effect_variables(const LikelihoodModel& model, const Dataset& ds);

MarginalEffectsTable marginal_effects_table(const LikelihoodModel& model, const ParameterVector& theta,
                                            const Dataset& ds, const DrawBlock& block,
                                            const std::vector<std::string>& variables, std::string run_id,
                                            EffectsPopulation population = EffectsPopulation::AllObservations,
                                            std::size_t workers = 0);

}  // namespace rpmixl

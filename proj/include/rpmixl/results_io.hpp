#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "rpmixl/effects.hpp"
#include "rpmixl/estimation.hpp"

namespace rpmixl {

inline constexpr std::string_view kResultsFormat = "rpmixl-results/1";

/// Estimation result plus (optionally) the marginal effects computed for the same run.
struct ResultsDocument {
  EstimationResult result;
  std::optional<MarginalEffectsTable> effects;
};

/// Lossless JSON: every EstimationResult field, the parameter table and effects when present.
std::string results_to_json(const EstimationResult& result, const MarginalEffectsTable* effects = nullptr);
ResultsDocument results_from_json(std::string_view text);

std::string effects_to_json(const MarginalEffectsTable& table);
MarginalEffectsTable effects_from_json(std::string_view text);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

}  // namespace rpmixl

#pragma once

#include <string>

#include "rpmixl/effects.hpp"
#include "rpmixl/estimation.hpp"

namespace rpmixl {

struct ReportOptions {
  bool abs_t = false;  // print |t| instead of signed t
};

struct RenderedReport {
  std::string text;      // fixed-width table
  std::string document;  // results_to_json(result, &effects)
};

/// Renders the estimation table: constants, random parameters with their standard deviation and
/// sign shares, heterogeneity in means and variances, fixed parameters, interactions, fit footer.
/// Throws std::invalid_argument when `effects` belongs to another run.
RenderedReport render_report(const EstimationResult& result, const MarginalEffectsTable& effects,
                             const ReportOptions& options = {});

}  // namespace rpmixl

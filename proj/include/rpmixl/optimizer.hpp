#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace rpmixl {

struct OptimizerConfig {
  std::size_t max_iterations = 500;
  double gradient_tolerance = 1e-5;     // inf-norm
  double relative_ll_tolerance = 1e-9;  // |delta f| / max(|f|, 1)
  double backtrack_factor = 0.5;
  double armijo_constant = 1e-4;

  void validate() const;
  bool operator==(const OptimizerConfig&) const = default;
};

/// Returns f(x) and writes its gradient into `gradient`. Maximized.
using Objective = std::function<double(std::span<const double> x, std::span<double> gradient)>;

struct OptimizationResult {
  std::vector<double> x;
  double value = 0.0;
  std::vector<double> gradient;
  bool converged = false;
  std::string reason;
  std::size_t iterations = 0;
  /// Objective at the start and after every accepted step.
  std::vector<double> trajectory;
};

/// BFGS ascent with Armijo backtracking. Throws EstimationError when f(x0) is not finite.
OptimizationResult maximize(const Objective& objective, std::vector<double> x0, const OptimizerConfig& config);

}  // namespace rpmixl

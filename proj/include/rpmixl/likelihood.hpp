#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "rpmixl/dataset.hpp"
#include "rpmixl/draws.hpp"
#include "rpmixl/model_spec.hpp"

namespace rpmixl {

/// Estimable parameters aligned to a ParameterLayout. Random scales are raw (sign-free);
/// the reported standard deviation is |scale|.
struct ParameterVector {
  std::vector<double> values;

  ParameterVector() = default;
  explicit ParameterVector(std::vector<double> v) : values(std::move(v)) {}
  static ParameterVector zeros(std::size_t n) { return ParameterVector(std::vector<double>(n, 0.0)); }

  std::size_t size() const noexcept { return values.size(); }
  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  bool operator==(const ParameterVector&) const = default;
};

struct LikelihoodValue {
  double loglik = 0.0;
  std::vector<double> per_obs;  // ln of simulated probability of the chosen outcome
  std::size_t underflows = 0;   // observations floored at ln(kProbabilityFloor)
};

inline constexpr double kProbabilityFloor = 1e-300;

/// Spec bound to a dataset's column positions. Immutable; safe to share across threads.
class LikelihoodModel {
 public:
  LikelihoodModel(ModelSpec spec, const Dataset& ds);

  const ModelSpec& spec() const noexcept { return spec_; }
  const ParameterLayout& layout() const noexcept { return layout_; }
  std::size_t n_alternatives() const noexcept { return spec_.alternatives.size(); }
  std::size_t n_random() const noexcept { return n_random_; }
  std::size_t n_entries() const noexcept { return entries_.size(); }

  /// Per-entry coefficient for one observation row and one draw (length n_random()).
  std::vector<double> realized_coefficients(const ParameterVector& theta, std::span<const double> values,
                                            std::span<const double> draw) const;

  /// Simulated probability of `chosen` averaged over `n_draws` draws (draw-major, n_random() wide).
  /// When `gradient` is non-empty it receives d ln P / d theta (zero when floored).
  double observation_probability(const ParameterVector& theta, std::span<const double> values,
                                 std::span<const double> draws, std::size_t n_draws, std::size_t chosen,
                                 std::span<double> gradient = {}) const;

  /// Draw-averaged probabilities of every alternative.
  void simulated_probabilities(const ParameterVector& theta, std::span<const double> values,
                               std::span<const double> draws, std::size_t n_draws, std::span<double> out) const;

 private:
  struct Shift {
    std::size_t column;
    std::size_t slot;
  };
  struct CompiledEntry {
    std::size_t alternative = 0;
    std::size_t column = kNone;  // kNone for the constant
    std::size_t dim = kNone;     // random dimension, kNone when fixed
    std::size_t beta = 0;
    std::size_t scale = 0;
    std::vector<Shift> mean_shifts;
    std::vector<Shift> variance_shifts;
  };
  static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

  double regressor(const CompiledEntry& e, std::span<const double> values) const {
    return e.column == kNone ? 1.0 : values[e.column];
  }
  // Deterministic part (beta + Theta Z) and draw multiplier (s exp(Psi W)) of each entry.
  void entry_terms(const ParameterVector& theta, std::span<const double> values, std::span<double> location,
                   std::span<double> multiplier) const;

  ModelSpec spec_;
  ParameterLayout layout_;
  std::vector<CompiledEntry> entries_;
  std::size_t n_random_ = 0;
  std::size_t width_ = 0;
};

/// Softmax with max subtraction.
std::vector<double> choice_probabilities(std::span<const double> utilities);
void choice_probabilities(std::span<const double> utilities, std::span<double> out);

LikelihoodValue simulated_loglik(const LikelihoodModel& model, const ParameterVector& theta, const Dataset& ds,
                                 const DrawBlock& block, std::size_t workers = 0);

/// Closed-form logit log-likelihood with every random draw at zero (random entries collapse to
/// their shifted means).
LikelihoodValue mnl_loglik(const LikelihoodModel& model, const ParameterVector& theta, const Dataset& ds,
                           std::size_t workers = 0);

enum class GradientMethod { Analytic, CentralDifference };

std::vector<double> loglik_gradient(const LikelihoodModel& model, const ParameterVector& theta, const Dataset& ds,
                                    const DrawBlock& block, GradientMethod method = GradientMethod::Analytic,
                                    std::size_t workers = 0);

/// Log-likelihood with analytic gradient and optionally the N x P matrix of per-observation scores.
struct LikelihoodEvaluation {
  LikelihoodValue value;
  std::vector<double> gradient;
  Eigen::MatrixXd scores;
};

LikelihoodEvaluation evaluate_loglik(const LikelihoodModel& model, const ParameterVector& theta, const Dataset& ds,
                                     const DrawBlock& block, bool keep_scores = false, std::size_t workers = 0);

/// Same as evaluate_loglik with a single all-zero draw per observation (closed-form logit).
LikelihoodEvaluation evaluate_mnl(const LikelihoodModel& model, const ParameterVector& theta, const Dataset& ds,
                                  bool keep_scores = false, std::size_t workers = 0);

/// Zero draws sized for `model`, useful wherever the closed-form logit is wanted.
DrawBlock zero_draw_block(std::size_t n_obs, std::size_t n_random);

}  // namespace rpmixl

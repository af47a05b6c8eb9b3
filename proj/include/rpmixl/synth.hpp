#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rpmixl/dataset.hpp"
#include "rpmixl/draws.hpp"
#include "rpmixl/likelihood.hpp"
#include "rpmixl/model_spec.hpp"
#include "rpmixl/optimizer.hpp"

namespace rpmixl {

struct CovariateGenConfig {
  /// Bernoulli probability per generated column, in column order.
  std::vector<std::pair<std::string, double>> probabilities;
  /// Product columns derived after generation.
  std::vector<Interaction> interactions;
  std::size_t n_observations = 1000;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Counter-based pseudo-random stream: observation `n` of seed `s` always gets the same stream.
class ObservationStream {
 public:
  ObservationStream(std::uint64_t seed, std::uint64_t index);
  double uniform();  // in (0, 1)
  double normal();

 private:
  std::uint64_t state_;
};

/// Draws covariates, one coefficient vector per observation and an outcome from the logit
/// probabilities. Deterministic given gen.seed.
Dataset simulate_dataset(const ModelSpec& spec, const ParameterVector& theta_true, const CovariateGenConfig& gen);

struct Replication {
  std::uint64_t seed = 0;
  std::vector<double> estimate;
  std::vector<double> std_errors;
  std::vector<double> error;  // estimate - truth (scales by absolute value)
  std::vector<bool> within_3se;
  bool converged = false;
  std::string reason;
};

struct ParameterRecovery {
  std::string name;
  double truth = 0.0;
  double mean_bias = 0.0;
  double coverage = 0.0;  // share of replications within 3 standard errors
};

struct RecoveryReport {
  std::vector<std::string> names;
  std::vector<double> truth;
  std::vector<Replication> replications;
  std::vector<ParameterRecovery> parameters;
  double overall_coverage = 0.0;  // share of (parameter, seed) pairs within 3 standard errors
};

/// Replication k simulates with seed gen.seed + k, then estimates with `draws` and `optimizer`.
RecoveryReport recovery_experiment(const ModelSpec& spec, const ParameterVector& theta_true,
                                   const CovariateGenConfig& gen, const DrawConfig& draws, std::size_t n_seeds,
                                   const OptimizerConfig& optimizer = {}, std::size_t workers = 0);

std::string recovery_report_json(const RecoveryReport& report);

}  // namespace rpmixl

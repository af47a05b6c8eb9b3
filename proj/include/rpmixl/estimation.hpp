#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rpmixl/dataset.hpp"
#include "rpmixl/draws.hpp"
#include "rpmixl/likelihood.hpp"
#include "rpmixl/model_spec.hpp"
#include "rpmixl/optimizer.hpp"

namespace rpmixl {

enum class CovarianceMethod { Hessian, BHHH, None };

std::string_view to_string(CovarianceMethod method) noexcept;
CovarianceMethod covariance_method_from_string(std::string_view text);

/// Population split of a normally distributed coefficient around zero.
struct DistributionShare {
  std::string parameter;  // name of the random mean
  double mean = 0.0;
  double sd = 0.0;  // |raw scale|
  double above = 0.0;
  double below = 0.0;
  bool degenerate = false;  // scale == 0: point mass, shares are 0/1 by the sign of the mean

  bool operator==(const DistributionShare&) const = default;
};

/// Phi(mean / |scale|). Throws std::domain_error when scale == 0.
double share_above_zero(double mean, double scale);
/// Never throws; flags the point-mass case instead.
DistributionShare distribution_share(std::string parameter, double mean, double scale);

struct FitStatistics {
  double rho_squared = 0.0;
  double lr_chi2 = 0.0;
  std::size_t df = 0;
  double p_value = 0.0;  // NaN when df == 0
};

/// rho^2 = 1 - ll_beta / ll_zero, LR = 2 (ll_beta - ll_zero). Throws std::invalid_argument when
/// ll_zero >= 0 or ll_beta < ll_zero.
FitStatistics fit_statistics(double ll_zero, double ll_beta, std::size_t df_diff);

/// Chi-square upper tail probability.
double chi_square_upper_tail(double statistic, std::size_t df);

using GradientFunction = std::function<std::vector<double>(std::span<const double>)>;

/// Central differences of an analytic gradient, step max(1e-4, 1e-4 |x_i|), symmetrized.
Eigen::MatrixXd numerical_hessian(const GradientFunction& gradient, std::span<const double> x);

struct CovarianceResult {
  Eigen::MatrixXd covariance;
  std::vector<double> std_errors;
  std::vector<double> t_stats;  // signed
  CovarianceMethod method = CovarianceMethod::Hessian;
};

/// Inverse of -hessian when negative definite, else inverse of `scores`' outer-product sum.
/// Throws SingularCovarianceError (with the near-null direction) when both fail.
CovarianceResult covariance_from_information(const Eigen::MatrixXd& hessian, const Eigen::MatrixXd* scores,
                                             std::span<const double> estimate);

CovarianceResult covariance_and_tstats(const LikelihoodModel& model, const ParameterVector& theta_hat,
                                       const Dataset& ds, const DrawBlock& block, std::size_t workers = 0);

/// Starting point: a closed-form logit fit over fixed betas and random means, scales at 0.1,
/// shifters at 0.
ParameterVector starting_values(const LikelihoodModel& model, const Dataset& ds, const OptimizerConfig& config,
                                std::size_t workers = 0);

/// Maximizes the simulated log-likelihood from `start` (or starting_values()). Throws
/// EstimationError naming the offending parameter when the start is not finite.
OptimizationResult maximize_loglik(const LikelihoodModel& model, const Dataset& ds, const DrawBlock& block,
                                   const OptimizerConfig& config, std::optional<ParameterVector> start = {},
                                   std::size_t workers = 0);

struct EstimationResult {
  ModelSpec spec;
  std::vector<Interaction> interactions;
  std::vector<std::string> names;
  ParameterVector theta_hat;
  Eigen::MatrixXd covariance;
  std::vector<double> std_errors;
  std::vector<double> t_stats;
  double ll_zero = 0.0;
  double ll_beta = 0.0;
  double rho_squared = 0.0;
  bool converged = false;
  std::string reason;
  std::size_t iterations = 0;
  CovarianceMethod covariance_method = CovarianceMethod::Hessian;
  DrawConfig draws;
  OptimizerConfig optimizer;
  std::vector<DistributionShare> shares;
  std::size_t n_obs = 0;
  std::size_t underflows = 0;
  std::string run_id;

  bool operator==(const EstimationResult& other) const;
};

/// Full pipeline: LL(0), maximization, covariance, t-statistics, shares.
EstimationResult estimate(const LikelihoodModel& model, const Dataset& ds, const DrawBlock& block,
                          const OptimizerConfig& config, std::size_t workers = 0);

/// Stable identifier of an estimation run's inputs (hex FNV-1a of model, data, draw and optimizer settings).
std::string run_identifier(const ModelSpec& spec, const Dataset& ds, const DrawConfig& draws,
                           const OptimizerConfig& optimizer);

}  // namespace rpmixl

#include "rpmixl/estimation.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <boost/math/distributions/chi_squared.hpp>
#include <fmt/format.h>

#include "rpmixl/error.hpp"

namespace rpmixl {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

std::string_view to_string(CovarianceMethod method) noexcept {
  switch (method) {
    case CovarianceMethod::Hessian: return "hessian";
    case CovarianceMethod::BHHH: return "bhhh";
    case CovarianceMethod::None: return "none";
  }
  return "none";
}

CovarianceMethod covariance_method_from_string(std::string_view text) {
  if (text == "hessian") return CovarianceMethod::Hessian;
  if (text == "bhhh") return CovarianceMethod::BHHH;
  if (text == "none") return CovarianceMethod::None;
  throw std::invalid_argument(fmt::format("unknown covariance method '{}'", text));
}

double share_above_zero(double mean, double scale) {
  if (scale == 0.0) throw std::domain_error("share_above_zero: zero scale is a point mass");
  return normal_cdf(mean / std::abs(scale));
}

DistributionShare distribution_share(std::string parameter, double mean, double scale) {
  DistributionShare share;
  share.parameter = std::move(parameter);
  share.mean = mean;
  share.sd = std::abs(scale);
  if (scale == 0.0) {
    share.degenerate = true;
    share.above = mean > 0.0 ? 1.0 : 0.0;
    share.below = mean < 0.0 ? 1.0 : 0.0;
  } else {
    share.above = share_above_zero(mean, scale);
    share.below = normal_cdf(-mean / std::abs(scale));
  }
  return share;
}

double chi_square_upper_tail(double statistic, std::size_t df) {
  if (df == 0) return kNaN;
  boost::math::chi_squared dist(static_cast<double>(df));
  return boost::math::cdf(boost::math::complement(dist, std::max(statistic, 0.0)));
}

FitStatistics fit_statistics(double ll_zero, double ll_beta, std::size_t df_diff) {
  if (!(ll_zero < 0.0)) throw std::invalid_argument("fit_statistics: LL(0) must be negative");
  if (ll_beta < ll_zero)
    throw std::invalid_argument(
        fmt::format("fit_statistics: LL(beta) = {} is below LL(0) = {}; the restricted model cannot fit better",
                    ll_beta, ll_zero));
  FitStatistics fit;
  fit.rho_squared = 1.0 - ll_beta / ll_zero;
  fit.lr_chi2 = 2.0 * (ll_beta - ll_zero);
  fit.df = df_diff;
  fit.p_value = chi_square_upper_tail(fit.lr_chi2, df_diff);
  return fit;
}

Eigen::MatrixXd numerical_hessian(const GradientFunction& gradient, std::span<const double> x) {
  const auto n = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd H(n, n);
  std::vector<double> probe(x.begin(), x.end());
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto ui = static_cast<std::size_t>(i);
    const double h = std::max(1e-4, 1e-4 * std::abs(x[ui]));
    probe[ui] = x[ui] + h;
    const auto up = gradient(probe);
    probe[ui] = x[ui] - h;
    const auto down = gradient(probe);
    probe[ui] = x[ui];
    for (Eigen::Index j = 0; j < n; ++j)
      H(j, i) = (up[static_cast<std::size_t>(j)] - down[static_cast<std::size_t>(j)]) / (2.0 * h);
  }
  return 0.5 * (H + H.transpose());
}

namespace {

std::vector<double> smallest_eigenvector(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);
  const Eigen::VectorXd v = solver.eigenvectors().col(0);
  return {v.data(), v.data() + v.size()};
}

}  // namespace

CovarianceResult covariance_from_information(const Eigen::MatrixXd& hessian, const Eigen::MatrixXd* scores,
                                             std::span<const double> estimate) {
  const auto n = hessian.rows();
  CovarianceResult out;
  const Eigen::MatrixXd information = -hessian;
  Eigen::LLT<Eigen::MatrixXd> llt(information);
  if (llt.info() == Eigen::Success) {
    out.covariance = llt.solve(Eigen::MatrixXd::Identity(n, n));
    out.method = CovarianceMethod::Hessian;
  } else {
    if (scores == nullptr)
      throw SingularCovarianceError("negative Hessian is not positive definite and no scores were supplied",
                                    smallest_eigenvector(information));
    const Eigen::MatrixXd outer = scores->transpose() * *scores;
    Eigen::LLT<Eigen::MatrixXd> bhhh(outer);
    if (bhhh.info() != Eigen::Success)
      throw SingularCovarianceError("both the Hessian and the BHHH outer-product matrix are singular",
                                    smallest_eigenvector(outer));
    out.covariance = bhhh.solve(Eigen::MatrixXd::Identity(n, n));
    out.method = CovarianceMethod::BHHH;
  }
  out.covariance = (0.5 * (out.covariance + out.covariance.transpose())).eval();
  for (Eigen::Index i = 0; i < n; ++i) {
    const double var = out.covariance(i, i);
    const double se = var > 0.0 ? std::sqrt(var) : 0.0;
    out.std_errors.push_back(se);
    out.t_stats.push_back(se > 0.0 ? estimate[static_cast<std::size_t>(i)] / se : kNaN);
  }
  return out;
}

CovarianceResult covariance_and_tstats(const LikelihoodModel& model, const ParameterVector& theta_hat,
                                       const Dataset& ds, const DrawBlock& block, std::size_t workers) {
  const GradientFunction gradient = [&](std::span<const double> x) {
    return evaluate_loglik(model, ParameterVector({x.begin(), x.end()}), ds, block, false, workers).gradient;
  };
  const Eigen::MatrixXd hessian = numerical_hessian(gradient, theta_hat.values);
  const auto at_estimate = evaluate_loglik(model, theta_hat, ds, block, true, workers);
  return covariance_from_information(hessian, &at_estimate.scores, theta_hat.values);
}

ParameterVector starting_values(const LikelihoodModel& model, const Dataset& ds, const OptimizerConfig& config,
                                std::size_t workers) {
  const auto& layout = model.layout();
  std::vector<std::size_t> free;
  for (const auto& d : layout.descriptors()) {
    if (d.role == ParameterRole::FixedBeta || d.role == ParameterRole::RandomMean) free.push_back(d.index);
  }
  ParameterVector full = ParameterVector::zeros(layout.size());
  const Objective objective = [&](std::span<const double> x, std::span<double> gradient) {
    for (std::size_t i = 0; i < free.size(); ++i) full[free[i]] = x[i];
    const auto eval = evaluate_mnl(model, full, ds, false, workers);
    for (std::size_t i = 0; i < free.size(); ++i) gradient[i] = eval.gradient[free[i]];
    return eval.value.loglik;
  };
  const auto fit = maximize(objective, std::vector<double>(free.size(), 0.0), config);
  ParameterVector start = ParameterVector::zeros(layout.size());
  for (std::size_t i = 0; i < free.size(); ++i) start[free[i]] = fit.x[i];
  for (const auto& d : layout.descriptors()) {
    if (d.role == ParameterRole::RandomScale) start[d.index] = 0.1;
  }
  return start;
}

OptimizationResult maximize_loglik(const LikelihoodModel& model, const Dataset& ds, const DrawBlock& block,
                                   const OptimizerConfig& config, std::optional<ParameterVector> start,
                                   std::size_t workers) {
  ParameterVector theta0 = start ? std::move(*start) : starting_values(model, ds, config, workers);
  const auto& layout = model.layout();
  if (theta0.size() != layout.size())
    throw EstimationError(fmt::format("start vector has {} values, layout has {}", theta0.size(), layout.size()));
  for (std::size_t i = 0; i < theta0.size(); ++i) {
    if (!std::isfinite(theta0[i]))
      throw EstimationError(fmt::format("non-finite starting value for parameter '{}'", layout[i].name));
  }

  const Objective objective = [&](std::span<const double> x, std::span<double> gradient) {
    const auto eval = evaluate_loglik(model, ParameterVector({x.begin(), x.end()}), ds, block, false, workers);
    std::copy(eval.gradient.begin(), eval.gradient.end(), gradient.begin());
    return eval.value.loglik;
  };
  try {
    return maximize(objective, theta0.values, config);
  } catch (const EstimationError&) {
    // Name the first parameter whose removal restores a finite likelihood.
    for (std::size_t i = 0; i < theta0.size(); ++i) {
      ParameterVector probe = theta0;
      probe[i] = 0.0;
      const auto eval = evaluate_loglik(model, probe, ds, block, false, workers);
      if (std::isfinite(eval.value.loglik))
        throw EstimationError(fmt::format("non-finite log-likelihood at start; offending parameter '{}' = {}",
                                          layout[i].name, theta0[i]));
    }
    throw EstimationError("non-finite log-likelihood at start");
  }
}

EstimationResult estimate(const LikelihoodModel& model, const Dataset& ds, const DrawBlock& block,
                          const OptimizerConfig& config, std::size_t workers) {
  if (ds.empty()) throw EstimationError("cannot estimate on an empty dataset");
  const auto& layout = model.layout();
  EstimationResult result;
  result.spec = model.spec();
  result.interactions = ds.provenance.derivations;
  result.names = layout.names();
  result.draws = block.config();
  result.optimizer = config;
  result.n_obs = ds.size();
  result.run_id = run_identifier(model.spec(), ds, block.config(), config);

  result.ll_zero = simulated_loglik(model, ParameterVector::zeros(layout.size()), ds, block, workers).loglik;
  const auto opt = maximize_loglik(model, ds, block, config, {}, workers);
  result.theta_hat = ParameterVector(opt.x);
  result.converged = opt.converged;
  result.reason = opt.reason;
  result.iterations = opt.iterations;
  const auto at_hat = simulated_loglik(model, result.theta_hat, ds, block, workers);
  result.ll_beta = at_hat.loglik;
  result.underflows = at_hat.underflows;
  result.rho_squared = 1.0 - result.ll_beta / result.ll_zero;

  try {
    auto cov = covariance_and_tstats(model, result.theta_hat, ds, block, workers);
    result.covariance = std::move(cov.covariance);
    result.std_errors = std::move(cov.std_errors);
    result.t_stats = std::move(cov.t_stats);
    result.covariance_method = cov.method;
  } catch (const SingularCovarianceError&) {
    if (result.converged) throw;
    const auto n = static_cast<Eigen::Index>(layout.size());
    result.covariance = Eigen::MatrixXd::Constant(n, n, kNaN);
    result.std_errors.assign(layout.size(), kNaN);
    result.t_stats.assign(layout.size(), kNaN);
    result.covariance_method = CovarianceMethod::None;
  }

  for (const auto& slot : layout.entry_slots()) {
    if (layout[slot.beta].role != ParameterRole::RandomMean) continue;
    result.shares.push_back(
        distribution_share(layout[slot.beta].name, result.theta_hat[slot.beta], result.theta_hat[slot.scale]));
  }
  return result;
}

namespace {

bool same_number(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

bool same_numbers(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!same_number(a[i], b[i])) return false;
  return true;
}

}  // namespace

bool EstimationResult::operator==(const EstimationResult& o) const {
  if (covariance.rows() != o.covariance.rows() || covariance.cols() != o.covariance.cols()) return false;
  for (Eigen::Index i = 0; i < covariance.size(); ++i)
    if (!same_number(covariance.data()[i], o.covariance.data()[i])) return false;
  return spec == o.spec && interactions == o.interactions && names == o.names &&
         same_numbers(theta_hat.values, o.theta_hat.values) && same_numbers(std_errors, o.std_errors) &&
         same_numbers(t_stats, o.t_stats) && same_number(ll_zero, o.ll_zero) && same_number(ll_beta, o.ll_beta) &&
         same_number(rho_squared, o.rho_squared) && converged == o.converged && reason == o.reason &&
         iterations == o.iterations && covariance_method == o.covariance_method && draws == o.draws &&
         optimizer == o.optimizer && shares == o.shares && n_obs == o.n_obs && underflows == o.underflows &&
         run_id == o.run_id;
}

std::string run_identifier(const ModelSpec& spec, const Dataset& ds, const DrawConfig& draws,
                           const OptimizerConfig& optimizer) {
  std::ostringstream text;
  text << serialize_model_spec(spec) << '\n';
  write_dataset(ds, text);
  for (const auto& d : ds.provenance.derivations) text << d.name << '=' << d.a << '*' << d.b << '\n';
  text << fmt::format("draws {} {} {}", draws.n_draws, draws.burn_in,
                      draws.shuffle_seed ? std::to_string(*draws.shuffle_seed) : "none");
  for (auto p : draws.primes) text << ' ' << p;
  text << fmt::format("\noptimizer {} {} {} {} {}\n", optimizer.max_iterations, optimizer.gradient_tolerance,
                      optimizer.relative_ll_tolerance, optimizer.backtrack_factor, optimizer.armijo_constant);

  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text.str()) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return fmt::format("{:016x}", hash);
}

}  // namespace rpmixl

#include "rpmixl/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "rpmixl/error.hpp"

namespace rpmixl {

void OptimizerConfig::validate() const {
  if (max_iterations < 1) throw std::invalid_argument("max_iterations must be positive");
  auto unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!unit(gradient_tolerance) || !unit(relative_ll_tolerance) || !unit(backtrack_factor) || !unit(armijo_constant))
    throw std::invalid_argument("optimizer tolerances and line-search constants must lie in (0, 1)");
}

namespace {

using Vec = Eigen::VectorXd;

Vec to_vec(const std::vector<double>& v) { return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())); }

double inf_norm(const Vec& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

}  // namespace

OptimizationResult maximize(const Objective& objective, std::vector<double> x0, const OptimizerConfig& config) {
  config.validate();
  const auto n = static_cast<Eigen::Index>(x0.size());
  std::vector<double> grad_buf(x0.size());
  auto eval = [&](const Vec& x, Vec& g) {
    const double f = objective(std::span<const double>(x.data(), static_cast<std::size_t>(n)), grad_buf);
    g = to_vec(grad_buf);
    return f;
  };

  Vec x = to_vec(x0);
  Vec g(n);
  double f = eval(x, g);
  if (!std::isfinite(f) || !g.allFinite()) throw EstimationError("objective is not finite at the starting point");

  OptimizationResult result;
  result.trajectory.push_back(f);
  auto finish = [&](bool converged, std::string reason) {
    result.x.assign(x.data(), x.data() + n);
    result.value = f;
    result.gradient.assign(g.data(), g.data() + n);
    result.converged = converged;
    result.reason = std::move(reason);
    return result;
  };
  if (inf_norm(g) < config.gradient_tolerance) return finish(true, "gradient tolerance");

  // Inverse Hessian of -f. The first step is a steepest-ascent step of unit inf-norm length.
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n) / std::max(1.0, inf_norm(g));
  bool fresh = true;
  Vec x_new(n), g_new(n);
  while (result.iterations < config.max_iterations) {
    Vec direction = H * g;
    double slope = g.dot(direction);
    if (!(slope > 0.0)) {
      H = Eigen::MatrixXd::Identity(n, n) / std::max(1.0, inf_norm(g));
      fresh = true;
      direction = H * g;
      slope = g.dot(direction);
    }

    double step = 1.0;
    double f_new = 0.0;
    bool accepted = false;
    for (int attempt = 0; attempt < 60; ++attempt) {
      x_new = x + step * direction;
      f_new = eval(x_new, g_new);
      if (std::isfinite(f_new) && g_new.allFinite() && f_new >= f + config.armijo_constant * step * slope) {
        accepted = true;
        break;
      }
      step *= config.backtrack_factor;
    }
    if (!accepted) {
      if (!fresh) {
        H = Eigen::MatrixXd::Identity(n, n) / std::max(1.0, inf_norm(g));
        fresh = true;
        continue;
      }
      return finish(false, "line search failed to improve");
    }

    const Vec s = x_new - x;
    const Vec y = g - g_new;  // gradient change of -f
    const double f_old = f;
    x = x_new;
    g = g_new;
    f = f_new;
    ++result.iterations;
    result.trajectory.push_back(f);

    const double ys = y.dot(s);
    if (ys > 1e-12 * s.norm() * y.norm()) {
      if (fresh) H = Eigen::MatrixXd::Identity(n, n) * (ys / y.squaredNorm());
      const double rho = 1.0 / ys;
      const Vec Hy = H * y;
      H += rho * rho * (ys + y.dot(Hy)) * (s * s.transpose()) - rho * (Hy * s.transpose() + s * Hy.transpose());
      fresh = false;
    }

    if (inf_norm(g) < config.gradient_tolerance) return finish(true, "gradient tolerance");
    if (std::abs(f - f_old) / std::max(std::abs(f), 1.0) < config.relative_ll_tolerance)
      return finish(true, "relative log-likelihood change");
  }
  return finish(false, "iteration limit");
}

}  // namespace rpmixl

#include "rpmixl/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "rpmixl/parallel.hpp"

namespace rpmixl {

LikelihoodModel::LikelihoodModel(ModelSpec spec, const Dataset& ds)
    : spec_(std::move(spec)), layout_(spec_), width_(ds.width()) {
  const auto& slots = layout_.entry_slots();
  for (std::size_t i = 0; i < spec_.entries.size(); ++i) {
    const auto& e = spec_.entries[i];
    CompiledEntry c;
    c.alternative = e.alternative;
    c.column = e.is_constant() ? kNone : ds.index_of(e.variable);
    c.beta = slots[i].beta;
    if (e.is_random()) {
      c.dim = n_random_++;
      c.scale = slots[i].scale;
      for (std::size_t j = 0; j < e.mean_shifters.size(); ++j)
        c.mean_shifts.push_back({ds.index_of(e.mean_shifters[j]), slots[i].mean_shifters[j]});
      for (std::size_t j = 0; j < e.variance_shifters.size(); ++j)
        c.variance_shifts.push_back({ds.index_of(e.variance_shifters[j]), slots[i].variance_shifters[j]});
    }
    entries_.push_back(std::move(c));
  }
}

void LikelihoodModel::entry_terms(const ParameterVector& theta, std::span<const double> values,
                                  std::span<double> location, std::span<double> multiplier) const {
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    const auto& e = entries_[k];
    double loc = theta[e.beta];
    for (const auto& z : e.mean_shifts) loc += theta[z.slot] * values[z.column];
    location[k] = loc;
    if (e.dim == kNone) {
      multiplier[k] = 0.0;
      continue;
    }
    double psi_w = 0.0;
    for (const auto& w : e.variance_shifts) psi_w += theta[w.slot] * values[w.column];
    multiplier[k] = theta[e.scale] * std::exp(psi_w);
  }
}

std::vector<double> LikelihoodModel::realized_coefficients(const ParameterVector& theta,
                                                           std::span<const double> values,
                                                           std::span<const double> draw) const {
  if (draw.size() != n_random_) throw std::invalid_argument("draw length must equal the number of random entries");
  std::vector<double> location(entries_.size()), multiplier(entries_.size());
  entry_terms(theta, values, location, multiplier);
  for (std::size_t k = 0; k < entries_.size(); ++k) {
    if (entries_[k].dim != kNone) location[k] += multiplier[k] * draw[entries_[k].dim];
  }
  return location;
}

namespace {

inline void softmax_inplace(std::span<double> v) {
  const double m = *std::max_element(v.begin(), v.end());
  double total = 0.0;
  for (auto& x : v) {
    x = std::exp(x - m);
    total += x;
  }
  const double inv = 1.0 / total;
  for (auto& x : v) x *= inv;
}

}  // namespace

void choice_probabilities(std::span<const double> utilities, std::span<double> out) {
  std::copy(utilities.begin(), utilities.end(), out.begin());
  softmax_inplace(out.first(utilities.size()));
}

std::vector<double> choice_probabilities(std::span<const double> utilities) {
  std::vector<double> out(utilities.size());
  choice_probabilities(utilities, out);
  return out;
}

double LikelihoodModel::observation_probability(const ParameterVector& theta, std::span<const double> values,
                                                std::span<const double> draws, std::size_t n_draws,
                                                std::size_t chosen, std::span<double> gradient) const {
  const std::size_t E = entries_.size();
  const std::size_t J = n_alternatives();
  const std::size_t D = n_random_;
  std::vector<double> location(E), multiplier(E), x(E), utility(J);
  entry_terms(theta, values, location, multiplier);
  for (std::size_t k = 0; k < E; ++k) x[k] = regressor(entries_[k], values);

  const bool want_gradient = !gradient.empty();
  std::vector<double> a(want_gradient ? E : 0), b(want_gradient ? E : 0);
  double total = 0.0;
  for (std::size_t r = 0; r < n_draws; ++r) {
    const double* v = draws.data() + r * D;
    std::fill(utility.begin(), utility.end(), 0.0);
    for (std::size_t k = 0; k < E; ++k) {
      const auto& e = entries_[k];
      const double beta = e.dim == kNone ? location[k] : location[k] + multiplier[k] * v[e.dim];
      utility[e.alternative] += beta * x[k];
    }
    softmax_inplace(utility);
    const double pc = utility[chosen];
    total += pc;
    if (want_gradient) {
      for (std::size_t k = 0; k < E; ++k) {
        const auto& e = entries_[k];
        const double g = pc * ((e.alternative == chosen ? 1.0 : 0.0) - utility[e.alternative]) * x[k];
        a[k] += g;
        if (e.dim != kNone) b[k] += g * v[e.dim];
      }
    }
  }
  const double probability = total / static_cast<double>(n_draws);

  if (want_gradient) {
    std::fill(gradient.begin(), gradient.end(), 0.0);
    if (probability >= kProbabilityFloor) {
      const double inv = 1.0 / total;  // = 1 / (R * probability)
      for (std::size_t k = 0; k < E; ++k) {
        const auto& e = entries_[k];
        gradient[e.beta] += a[k] * inv;
        for (const auto& z : e.mean_shifts) gradient[z.slot] += a[k] * values[z.column] * inv;
        if (e.dim == kNone) continue;
        double psi_w = 0.0;
        for (const auto& w : e.variance_shifts) psi_w += theta[w.slot] * values[w.column];
        const double expo = std::exp(psi_w);
        gradient[e.scale] += b[k] * expo * inv;
        for (const auto& w : e.variance_shifts)
          gradient[w.slot] += b[k] * multiplier[k] * values[w.column] * inv;
      }
    }
  }
  return probability;
}

void LikelihoodModel::simulated_probabilities(const ParameterVector& theta, std::span<const double> values,
                                              std::span<const double> draws, std::size_t n_draws,
                                              std::span<double> out) const {
  const std::size_t E = entries_.size();
  const std::size_t J = n_alternatives();
  std::vector<double> location(E), multiplier(E), x(E), utility(J);
  entry_terms(theta, values, location, multiplier);
  for (std::size_t k = 0; k < E; ++k) x[k] = regressor(entries_[k], values);
  std::fill(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(J), 0.0);
  for (std::size_t r = 0; r < n_draws; ++r) {
    const double* v = draws.data() + r * n_random_;
    std::fill(utility.begin(), utility.end(), 0.0);
    for (std::size_t k = 0; k < E; ++k) {
      const auto& e = entries_[k];
      const double beta = e.dim == kNone ? location[k] : location[k] + multiplier[k] * v[e.dim];
      utility[e.alternative] += beta * x[k];
    }
    softmax_inplace(utility);
    for (std::size_t j = 0; j < J; ++j) out[j] += utility[j];
  }
  const double inv = 1.0 / static_cast<double>(n_draws);
  for (std::size_t j = 0; j < J; ++j) out[j] *= inv;
}

namespace {

void check_shapes(const LikelihoodModel& model, const ParameterVector& theta, const Dataset& ds,
                  const DrawBlock& block) {
  if (theta.size() != model.layout().size())
    throw std::invalid_argument(
        fmt::format("parameter vector has {} values, layout has {}", theta.size(), model.layout().size()));
  if (block.n_obs() != ds.size() || block.n_dims() != model.n_random())
    throw std::invalid_argument(fmt::format("draw block shape ({}, {}, {}) does not match {} observations and {} "
                                            "random entries",
                                            block.n_obs(), block.n_draws(), block.n_dims(), ds.size(),
                                            model.n_random()));
}

std::size_t resolve_workers(std::size_t workers) { return workers == 0 ? worker_count() : workers; }

LikelihoodEvaluation run(const LikelihoodModel& model, const ParameterVector& theta, const Dataset& ds,
                         const DrawBlock& block, bool want_gradient, bool keep_scores, std::size_t workers) {
  check_shapes(model, theta, ds, block);
  const std::size_t N = ds.size();
  const std::size_t P = theta.size();
  LikelihoodEvaluation eval;
  eval.value.per_obs.resize(N);
  std::vector<double> score_rows(want_gradient ? N * P : 0);
  std::vector<char> floored(N, 0);

  parallel_for(
      N,
      [&](std::size_t n) {
        const auto& obs = ds.observations[n];
        std::span<double> grad;
        if (want_gradient) grad = std::span<double>(score_rows.data() + n * P, P);
        const double p =
            model.observation_probability(theta, obs.values, block.observation(n), block.n_draws(), obs.chosen, grad);
        if (!(p >= kProbabilityFloor)) {
          floored[n] = 1;
          eval.value.per_obs[n] = std::log(kProbabilityFloor);
        } else {
          eval.value.per_obs[n] = std::log(p);
        }
      },
      resolve_workers(workers));

  double total = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    total += eval.value.per_obs[n];
    eval.value.underflows += static_cast<std::size_t>(floored[n]);
  }
  eval.value.loglik = total;

  if (want_gradient) {
    eval.gradient.assign(P, 0.0);
    for (std::size_t n = 0; n < N; ++n)
      for (std::size_t k = 0; k < P; ++k) eval.gradient[k] += score_rows[n * P + k];
    if (keep_scores) {
      eval.scores.resize(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(P));
      for (std::size_t n = 0; n < N; ++n)
        for (std::size_t k = 0; k < P; ++k)
          eval.scores(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k)) = score_rows[n * P + k];
    }
  }
  return eval;
}

}  // namespace

DrawBlock zero_draw_block(std::size_t n_obs, std::size_t n_random) {
  DrawConfig config;
  config.n_draws = 1;
  config.burn_in = 0;
  return DrawBlock(n_obs, 1, n_random, std::vector<double>(n_obs * n_random, 0.0), config);
}

LikelihoodValue simulated_loglik(const LikelihoodModel& model, const ParameterVector& theta, const Dataset& ds,
                                 const DrawBlock& block, std::size_t workers) {
  return run(model, theta, ds, block, false, false, workers).value;
}

LikelihoodValue mnl_loglik(const LikelihoodModel& model, const ParameterVector& theta, const Dataset& ds,
                           std::size_t workers) {
  return run(model, theta, ds, zero_draw_block(ds.size(), model.n_random()), false, false, workers).value;
}

LikelihoodEvaluation evaluate_loglik(const LikelihoodModel& model, const ParameterVector& theta, const Dataset& ds,
                                     const DrawBlock& block, bool keep_scores, std::size_t workers) {
  return run(model, theta, ds, block, true, keep_scores, workers);
}

LikelihoodEvaluation evaluate_mnl(const LikelihoodModel& model, const ParameterVector& theta, const Dataset& ds,
                                  bool keep_scores, std::size_t workers) {
  return run(model, theta, ds, zero_draw_block(ds.size(), model.n_random()), true, keep_scores, workers);
}

std::vector<double> loglik_gradient(const LikelihoodModel& model, const ParameterVector& theta, const Dataset& ds,
                                    const DrawBlock& block, GradientMethod method, std::size_t workers) {
  if (method == GradientMethod::Analytic) return evaluate_loglik(model, theta, ds, block, false, workers).gradient;

  std::vector<double> gradient(theta.size());
  ParameterVector probe = theta;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double h = std::max(1e-6, 1e-6 * std::abs(theta[i]));
    probe[i] = theta[i] + h;
    const double up = simulated_loglik(model, probe, ds, block, workers).loglik;
    probe[i] = theta[i] - h;
    const double down = simulated_loglik(model, probe, ds, block, workers).loglik;
    probe[i] = theta[i];
    gradient[i] = (up - down) / (2.0 * h);
  }
  return gradient;
}

}  // namespace rpmixl

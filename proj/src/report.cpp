#include "rpmixl/report.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "rpmixl/results_io.hpp"

namespace rpmixl {

namespace {

class TableWriter {
 public:
  TableWriter(const EstimationResult& result, const MarginalEffectsTable& effects, const ReportOptions& options)
      : result_(result), effects_(effects), options_(options), layout_(result.spec) {
    for (const auto& d : layout_.descriptors()) name_width_ = std::max(name_width_, label(d).size() + 2);
    for (const auto& alt : effects.alternatives) me_width_ = std::max(me_width_, alt.size() + 2);
    rendered_.assign(layout_.size(), 0);
  }

  std::string render() {
    const auto& spec = result_.spec;
    const auto& alts = spec.alternatives;
    out_ += "Random parameters multinomial logit model with heterogeneity in the means of random parameters\n";
    out_ += fmt::format("Outcomes: {} (base alternative: {})\n", fmt::join(alts.labels, ", "),
                        alts.labels[alts.base_index]);
    out_ += fmt::format("Observations: {}   Halton draws: {}   Burn-in: {}   Shuffle seed: {}   Run: {}\n",
                        result_.n_obs, result_.draws.n_draws, result_.draws.burn_in,
                        result_.draws.shuffle_seed ? std::to_string(*result_.draws.shuffle_seed) : "none",
                        result_.run_id);
    rule();
    out_ += fmt::format("{:<{}}{:>12}{:>14}", "", name_width_, "Estimated", "");
    if (!effects_.alternatives.empty()) out_ += fmt::format("  {}", "Marginal effects");
    out_ += "\n";
    out_ += fmt::format("{:<{}}{:>12}{:>14}", "Variable", name_width_, "parameter", "t-Statistics");
    for (const auto& alt : effects_.alternatives) out_ += fmt::format("{:>{}}", alt, me_width_);
    out_ += "\n";
    rule();

    const auto& slots = layout_.entry_slots();
    for (const auto& d : layout_.descriptors()) {
      if (d.role == ParameterRole::FixedBeta && spec.entries[d.entry].is_constant()) row(d);
    }

    std::vector<std::size_t> random_entries;
    for (std::size_t i = 0; i < spec.entries.size(); ++i)
      if (spec.entries[i].is_random()) random_entries.push_back(i);
    if (!random_entries.empty()) {
      section("Random parameters in utility functions");
      for (auto i : random_entries) {
        row(layout_[slots[i].beta]);
        row(layout_[slots[i].scale]);
        share_line(layout_[slots[i].beta].name);
      }
    }
    bool any_mean = false, any_var = false;
    for (auto i : random_entries) {
      any_mean |= !slots[i].mean_shifters.empty();
      any_var |= !slots[i].variance_shifters.empty();
    }
    if (any_mean) {
      section("Heterogeneity in the mean of the random parameter");
      for (auto i : random_entries)
        for (auto k : slots[i].mean_shifters) row(layout_[k]);
    }
    if (any_var) {
      section("Heterogeneity in the variance of the random parameter");
      for (auto i : random_entries)
        for (auto k : slots[i].variance_shifters) row(layout_[k]);
    }

    std::vector<const ParameterDescriptor*> fixed, interactions;
    for (const auto& d : layout_.descriptors()) {
      const auto& e = spec.entries[d.entry];
      if (d.role != ParameterRole::FixedBeta || e.is_constant()) continue;
      (interaction(e.variable) ? interactions : fixed).push_back(&d);
    }
    if (!fixed.empty()) {
      section("Fixed parameters in utility functions");
      for (const auto* d : fixed) row(*d);
    }
    if (!interactions.empty()) {
      section("Interactions");
      for (const auto* d : interactions) row(*d);
    }
    rule();
    footer();

    const auto missing = std::count(rendered_.begin(), rendered_.end(), 0);
    const auto repeated = std::count_if(rendered_.begin(), rendered_.end(), [](int c) { return c > 1; });
    if (missing != 0 || repeated != 0)
      throw std::logic_error("report layout does not cover every parameter exactly once");
    return out_;
  }

 private:
  const Interaction* interaction(const std::string& column) const {
    auto it = std::find_if(result_.interactions.begin(), result_.interactions.end(),
                           [&](const Interaction& i) { return i.name == column; });
    return it == result_.interactions.end() ? nullptr : &*it;
  }

  std::string variable_label(const UtilityEntry& e) const {
    if (e.is_constant()) return "Constant";
    if (const auto* i = interaction(e.variable)) return fmt::format("({} * {}) interaction", i->a, i->b);
    return e.variable;
  }

  std::string label(const ParameterDescriptor& d) const {
    const auto& e = result_.spec.entries[d.entry];
    const std::string alt = fmt::format("[{}]", result_.spec.alternatives.labels[e.alternative]);
    switch (d.role) {
      case ParameterRole::FixedBeta:
      case ParameterRole::RandomMean: return fmt::format("{} {}", variable_label(e), alt);
      case ParameterRole::RandomScale: return "  Standard deviation of parameter distribution";
      case ParameterRole::MeanShifter:
      case ParameterRole::VarianceShifter: return fmt::format("{}: {} {}", variable_label(e), d.shifter, alt);
    }
    return d.name;
  }

  static std::string num(double v, int precision, std::size_t width) {
    if (!std::isfinite(v)) return fmt::format("{:>{}}", "n/a", width);
    return fmt::format("{:>{}.{}f}", v, width, precision);
  }

  void rule() { out_ += std::string(name_width_ + 26 + me_width_ * effects_.alternatives.size(), '-') + "\n"; }

  void section(std::string_view title) { out_ += fmt::format("{}\n", title); }

  void row(const ParameterDescriptor& d) {
    ++rendered_[d.index];
    double estimate = result_.theta_hat[d.index];
    double t = result_.t_stats[d.index];
    if (d.role == ParameterRole::RandomScale && estimate < 0.0) {
      estimate = -estimate;
      t = -t;
    }
    if (options_.abs_t) t = std::abs(t);
    out_ += fmt::format("{:<{}}{}{}", label(d), name_width_, num(estimate, 3, 12), num(t, 3, 14));
    if (d.role == ParameterRole::FixedBeta || d.role == ParameterRole::RandomMean) {
      if (const auto* me = effects_.find(result_.spec.entries[d.entry].variable)) {
        for (double v : me->effects) out_ += num(v, 3, me_width_);
      }
    }
    out_ += "\n";
  }

  void share_line(const std::string& parameter) {
    auto it = std::find_if(result_.shares.begin(), result_.shares.end(),
                           [&](const DistributionShare& s) { return s.parameter == parameter; });
    if (it == result_.shares.end()) return;
    out_ += fmt::format("{:<{}}{:>12}{:>14}{}\n", "  Share above / below zero", name_width_,
                        fmt::format("{:.2f}%", 100.0 * it->above), fmt::format("{:.2f}%", 100.0 * it->below),
                        it->degenerate ? "  (point mass)" : "");
  }

  void footer() {
    const auto line = [this](std::string_view name, const std::string& value) {
      out_ += fmt::format("{:<{}}{:>12}\n", name, name_width_, value);
    };
    line("Number of observations", std::to_string(result_.n_obs));
    line("Log likelihood at zero, LL(0)", fmt::format("{:.3f}", result_.ll_zero));
    line("Log likelihood at convergence, LL(beta)", fmt::format("{:.3f}", result_.ll_beta));
    line("rho^2 = 1 - LL(beta)/LL(0)", fmt::format("{:.3f}", result_.rho_squared));
    line("Parameters", std::to_string(layout_.size()));
    line("Converged", result_.converged ? "yes" : "no");
    line("Stopping rule", result_.reason);
    line("Iterations", std::to_string(result_.iterations));
    line("Covariance", std::string(to_string(result_.covariance_method)));
    if (result_.underflows > 0) line("Floored probabilities", std::to_string(result_.underflows));
    out_ += fmt::format("t-Statistics are {}\n", options_.abs_t ? "absolute values" : "signed");
  }

  const EstimationResult& result_;
  const MarginalEffectsTable& effects_;
  const ReportOptions& options_;
  ParameterLayout layout_;
  std::size_t name_width_ = 40;
  std::size_t me_width_ = 12;
  std::vector<int> rendered_;
  std::string out_;
};

}  // namespace

RenderedReport render_report(const EstimationResult& result, const MarginalEffectsTable& effects,
                             const ReportOptions& options) {
  if (effects.run_id != result.run_id)
    throw std::invalid_argument(
        fmt::format("effects run '{}' does not match results run '{}'", effects.run_id, result.run_id));
  RenderedReport out;
  out.text = TableWriter(result, effects, options).render();
  out.document = results_to_json(result, &effects);
  return out;
}

}  // namespace rpmixl

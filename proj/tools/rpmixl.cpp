// rpmixl: estimate random-parameters multinomial logit models with heterogeneity in means and
// variances by simulated maximum likelihood.
//
// Exit codes: 0 success, 1 I/O or internal failure, 2 usage error, 3 data/model validation
// error, 4 estimation failure or non-convergence (results are still written).

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include "rpmixl/dataset.hpp"
#include "rpmixl/draws.hpp"
#include "rpmixl/effects.hpp"
#include "rpmixl/error.hpp"
#include "rpmixl/estimation.hpp"
#include "rpmixl/likelihood.hpp"
#include "rpmixl/model_spec.hpp"
#include "rpmixl/report.hpp"
#include "rpmixl/results_io.hpp"
#include "rpmixl/synth.hpp"

namespace {

using namespace rpmixl;
using ojson = nlohmann::ordered_json;

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitEstimation = 4;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct DataArgs {
  std::string data;
  std::string model;
  std::vector<std::string> interactions;
  std::vector<std::string> continuous;
  std::vector<std::string> label_map;

  void add_to(CLI::App* cmd, bool need_model = true) {
    cmd->add_option("--data", data, "Observation CSV")->required();
    auto* m = cmd->add_option("--model", model, "Model specification (JSON)");
    if (need_model) m->required();
    cmd->add_option("--interaction", interactions, "Derived column name=a*b (repeatable)");
    cmd->add_option("--continuous", continuous, "Column allowed to hold non-indicator values (repeatable)");
    cmd->add_option("--label-map", label_map, "Remap a raw label: raw=alternative (repeatable)");
  }

  LoadOptions options(const std::vector<Interaction>& extra = {}) const {
    LoadOptions opts;
    opts.continuous = continuous;
    for (const auto& text : label_map) {
      const auto eq = text.find('=');
      if (eq == std::string::npos || eq == 0) throw UsageError(fmt::format("malformed --label-map '{}'", text));
      opts.label_map[text.substr(0, eq)] = text.substr(eq + 1);
    }
    opts.interactions = extra;
    for (const auto& text : interactions) opts.interactions.push_back(parse_interaction(text));
    return opts;
  }
};

void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

EffectsPopulation population_from(const std::string& text) {
  if (text == "all") return EffectsPopulation::AllObservations;
  if (text == "observed-zero") return EffectsPopulation::ObservedZero;
  throw UsageError(fmt::format("unknown effects population '{}'", text));
}

int run_summarize(const DataArgs& args, const std::string& label_column, const std::string& json_out) {
  Dataset ds;
  std::vector<std::string> skipped;
  if (!args.model.empty()) {
    ds = load_dataset(args.data, load_model_spec(args.model), args.options());
  } else {
    ds = load_numeric_table(args.data, &skipped);
    if (!label_column.empty()) {
      const std::size_t c = ds.find(label_column);
      if (c != ds.width()) {
        ds.columns.erase(ds.columns.begin() + static_cast<std::ptrdiff_t>(c));
        for (auto& o : ds.observations) o.values.erase(o.values.begin() + static_cast<std::ptrdiff_t>(c));
      }
    }
    for (const auto& inter : args.options().interactions) ds = derive_interaction(ds, inter.a, inter.b, inter.name);
  }
  const auto table = summarize(ds);
  std::cout << render_summary_text(table);
  if (!skipped.empty()) std::cout << fmt::format("(non-numeric columns skipped: {})\n", fmt::join(skipped, ", "));
  if (!json_out.empty()) write_text_file(json_out, render_summary_json(table) + "\n");
  return kExitOk;
}

struct EstimateArgs {
  DataArgs data;
  std::size_t draws = 1000;
  std::size_t burn_in = 10;
  std::optional<std::uint64_t> shuffle_seed;
  std::vector<std::uint32_t> primes;
  bool abs_t = false;
  std::string out;
  std::string report;
  std::size_t max_iterations = 500;
  std::string population = "all";
};

int run_estimate(const EstimateArgs& args) {
  const ModelSpec spec = load_model_spec(args.data.model);
  const Dataset ds = load_dataset(args.data.data, spec, args.data.options());
  if (ds.empty()) throw DataError("dataset has no observations");
  const LikelihoodModel model(spec, ds);

  DrawConfig draws;
  draws.n_draws = args.draws;
  draws.burn_in = args.burn_in;
  draws.shuffle_seed = args.shuffle_seed;
  draws.primes = args.primes;
  const DrawBlock block = generate_draw_block(ds.size(), model.n_random(), draws);

  OptimizerConfig optimizer;
  optimizer.max_iterations = args.max_iterations;
  const auto result = estimate(model, ds, block, optimizer);
  const auto effects = marginal_effects_table(model, result.theta_hat, ds, block, default_effect_variables(model, ds),
                                              result.run_id, population_from(args.population));
  const auto rendered = render_report(result, effects, ReportOptions{args.abs_t});
  write_text_file(args.out, rendered.document);
  if (!args.report.empty()) emit(args.report, rendered.text);
  if (!result.converged) {
    std::cerr << fmt::format("warning: estimation did not converge ({})\n", result.reason);
    return kExitEstimation;
  }
  return kExitOk;
}

int run_effects(const DataArgs& data, const std::string& results_path, const std::string& out,
                const std::vector<std::string>& variables, const std::string& population) {
  const auto doc = results_from_json(read_text_file(results_path));
  const auto& result = doc.result;
  const ModelSpec spec = load_model_spec(data.model);
  if (!(spec == result.spec)) throw SpecError("", "model file differs from the model recorded in the results");
  const Dataset ds = load_dataset(data.data, spec, data.options(result.interactions));
  if (run_identifier(spec, ds, result.draws, result.optimizer) != result.run_id)
    throw DataError("data do not match the run recorded in the results document");
  const LikelihoodModel model(spec, ds);
  const DrawBlock block = generate_draw_block(ds.size(), model.n_random(), result.draws);
  const auto vars = variables.empty() ? default_effect_variables(model, ds) : variables;
  const auto table =
      marginal_effects_table(model, result.theta_hat, ds, block, vars, result.run_id, population_from(population));
  emit(out, effects_to_json(table));
  return kExitOk;
}

int run_report(const std::string& results_path, const std::string& effects_path, bool abs_t, const std::string& out) {
  const auto doc = results_from_json(read_text_file(results_path));
  MarginalEffectsTable effects;
  if (!effects_path.empty()) {
    effects = effects_from_json(read_text_file(effects_path));
  } else if (doc.effects) {
    effects = *doc.effects;
  } else {
    effects.run_id = doc.result.run_id;
  }
  emit(out, render_report(doc.result, effects, ReportOptions{abs_t}).text);
  return kExitOk;
}

struct SimulationParams {
  ParameterVector theta;
  CovariateGenConfig gen;
  ojson raw;
};

SimulationParams load_simulation_params(const std::string& path, const ModelSpec& spec) {
  SimulationParams out;
  try {
    out.raw = ojson::parse(read_text_file(path));
  } catch (const ojson::parse_error& e) {
    throw SpecError("", fmt::format("parameter file is not valid JSON: {}", e.what()));
  }
  const ParameterLayout layout(spec);
  out.theta = ParameterVector::zeros(layout.size());
  for (const auto& [key, value] : out.raw.items()) {
    if (key != "theta" && key != "covariates" && key != "interactions") throw SpecError(key, "unknown key");
  }
  if (auto it = out.raw.find("theta"); it != out.raw.end()) {
    for (const auto& [name, value] : it->items()) {
      const std::size_t i = layout.find(name);
      if (i == layout.size()) throw SpecError("theta." + name, "no such parameter in the model layout");
      if (!value.is_number()) throw SpecError("theta." + name, "expected a number");
      out.theta[i] = value.get<double>();
    }
  }
  if (auto it = out.raw.find("covariates"); it != out.raw.end()) {
    for (const auto& [name, value] : it->items()) {
      if (!value.is_number()) throw SpecError("covariates." + name, "expected a probability");
      out.gen.probabilities.emplace_back(name, value.get<double>());
    }
  }
  if (auto it = out.raw.find("interactions"); it != out.raw.end()) {
    for (const auto& text : *it) out.gen.interactions.push_back(parse_interaction(text.get<std::string>()));
  }
  return out;
}

int run_simulate(const std::string& model_path, const std::string& params_path, std::size_t n, std::uint64_t seed,
                 const std::string& out) {
  const ModelSpec spec = load_model_spec(model_path);
  auto params = load_simulation_params(params_path, spec);
  params.gen.n_observations = n;
  params.gen.seed = seed;
  const Dataset ds = simulate_dataset(spec, params.theta, params.gen);
  save_dataset(ds, out);

  const ParameterLayout layout(spec);
  ojson sidecar;
  sidecar["model"] = ojson::parse(serialize_model_spec(spec));
  ojson theta;
  for (std::size_t i = 0; i < layout.size(); ++i) theta[layout[i].name] = params.theta[i];
  sidecar["theta_true"] = std::move(theta);
  ojson covariates = ojson::object();
  for (const auto& [name, p] : params.gen.probabilities) covariates[name] = p;
  sidecar["covariates"] = std::move(covariates);
  auto inter = ojson::array();
  for (const auto& i : params.gen.interactions) inter.push_back(fmt::format("{}={}*{}", i.name, i.a, i.b));
  sidecar["interactions"] = std::move(inter);
  sidecar["n"] = n;
  sidecar["seed"] = seed;
  write_text_file(out + ".json", sidecar.dump(2) + "\n");
  return kExitOk;
}

int run_recover(const std::string& model_path, const std::string& params_path, std::size_t n, std::size_t draws,
                std::size_t burn_in, std::size_t seeds, std::uint64_t seed, const std::string& out) {
  const ModelSpec spec = load_model_spec(model_path);
  auto params = load_simulation_params(params_path, spec);
  params.gen.n_observations = n;
  params.gen.seed = seed;
  DrawConfig config;
  config.n_draws = draws;
  config.burn_in = burn_in;
  const auto report = recovery_experiment(spec, params.theta, params.gen, config, seeds);
  emit(out, recovery_report_json(report) + "\n");
  std::cerr << fmt::format("overall coverage (within 3 s.e.): {:.3f}\n", report.overall_coverage);
  return kExitOk;
}

int run_lrtest(const std::string& restricted_path, const std::string& unrestricted_path) {
  const auto restricted = results_from_json(read_text_file(restricted_path)).result;
  const auto unrestricted = results_from_json(read_text_file(unrestricted_path)).result;
  if (unrestricted.names.size() <= restricted.names.size())
    throw UsageError("the unrestricted model must have more parameters than the restricted model");
  const std::size_t df = unrestricted.names.size() - restricted.names.size();
  const auto fit = fit_statistics(restricted.ll_beta, unrestricted.ll_beta, df);
  std::cout << fmt::format("LL(restricted)   {:.3f}\nLL(unrestricted) {:.3f}\nchi2             {:.3f}\n"
                           "df               {}\np-value          {:.6g}\n",
                           restricted.ll_beta, unrestricted.ll_beta, fit.lr_chi2, fit.df, fit.p_value);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Random-parameters multinomial logit with heterogeneity in means and variances"};
  app.require_subcommand(1);

  DataArgs summarize_args;
  std::string summarize_label, summarize_json;
  auto* summarize_cmd = app.add_subcommand("summarize", "Per-column mean, sd (divisor N), max and min");
  summarize_args.add_to(summarize_cmd, false);
  summarize_cmd->add_option("--label-column", summarize_label, "Column to exclude when no model is given");
  summarize_cmd->add_option("--json", summarize_json, "Also write the summary as JSON");

  EstimateArgs est;
  auto* estimate_cmd = app.add_subcommand("estimate", "Simulated maximum likelihood estimation");
  est.data.add_to(estimate_cmd);
  estimate_cmd->add_option("--draws", est.draws, "Halton draws per observation")->check(CLI::PositiveNumber);
  estimate_cmd->add_option("--burn-in", est.burn_in, "Initial Halton points discarded");
  estimate_cmd->add_option("--shuffle-seed", est.shuffle_seed, "Seed for per-observation draw order shuffling");
  estimate_cmd->add_option("--primes", est.primes, "Halton bases per random dimension");
  estimate_cmd->add_flag("--abs-t", est.abs_t, "Report absolute t-statistics");
  estimate_cmd->add_option("--out", est.out, "Results document (JSON)")->required();
  estimate_cmd->add_option("--report", est.report, "Text report ('-' for stdout)");
  estimate_cmd->add_option("--max-iterations", est.max_iterations)->check(CLI::PositiveNumber);
  estimate_cmd->add_option("--effects-population", est.population, "all | observed-zero");

  DataArgs effects_args;
  std::string effects_results, effects_out, effects_population = "all";
  std::vector<std::string> effects_vars;
  auto* effects_cmd = app.add_subcommand("effects", "Average discrete-change marginal effects");
  effects_args.add_to(effects_cmd);
  effects_cmd->add_option("--results", effects_results, "Results document from estimate")->required();
  effects_cmd->add_option("--out", effects_out, "Effects document (JSON); stdout when omitted");
  effects_cmd->add_option("--variable", effects_vars, "Indicator to flip (repeatable; default: model variables)");
  effects_cmd->add_option("--effects-population", effects_population, "all | observed-zero");

  std::string report_results, report_effects, report_out;
  bool report_abs_t = false;
  auto* report_cmd = app.add_subcommand("report", "Render the estimation table from a results document");
  report_cmd->add_option("--results", report_results)->required();
  report_cmd->add_option("--effects", report_effects, "Effects document (default: effects inside results)");
  report_cmd->add_flag("--abs-t", report_abs_t);
  report_cmd->add_option("--out", report_out, "Text output; stdout when omitted");

  std::string sim_model, sim_params, sim_out;
  std::size_t sim_n = 1000;
  std::uint64_t sim_seed = 1;
  auto* simulate_cmd = app.add_subcommand("simulate", "Generate a synthetic dataset from known parameters");
  simulate_cmd->add_option("--model", sim_model)->required();
  simulate_cmd->add_option("--params", sim_params, "JSON with theta, covariates, interactions")->required();
  simulate_cmd->add_option("--n", sim_n)->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--seed", sim_seed);
  simulate_cmd->add_option("--out", sim_out)->required();

  std::string rec_model, rec_params, rec_out;
  std::size_t rec_n = 2000, rec_draws = 500, rec_burn = 10, rec_seeds = 20;
  std::uint64_t rec_seed = 1;
  auto* recover_cmd = app.add_subcommand("recover", "Parameter recovery experiment over several seeds");
  recover_cmd->add_option("--model", rec_model)->required();
  recover_cmd->add_option("--params", rec_params)->required();
  recover_cmd->add_option("--n", rec_n)->check(CLI::PositiveNumber);
  recover_cmd->add_option("--draws", rec_draws)->check(CLI::PositiveNumber);
  recover_cmd->add_option("--burn-in", rec_burn);
  recover_cmd->add_option("--seeds", rec_seeds)->check(CLI::PositiveNumber);
  recover_cmd->add_option("--seed", rec_seed, "First simulation seed");
  recover_cmd->add_option("--out", rec_out, "Recovery report (JSON); stdout when omitted");

  std::string lr_restricted, lr_unrestricted;
  auto* lrtest_cmd = app.add_subcommand("lrtest", "Likelihood ratio test between two results documents");
  lrtest_cmd->add_option("--restricted", lr_restricted)->required();
  lrtest_cmd->add_option("--unrestricted", lr_unrestricted)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*summarize_cmd) return run_summarize(summarize_args, summarize_label, summarize_json);
    if (*estimate_cmd) return run_estimate(est);
    if (*effects_cmd) return run_effects(effects_args, effects_results, effects_out, effects_vars, effects_population);
    if (*report_cmd) return run_report(report_results, report_effects, report_abs_t, report_out);
    if (*simulate_cmd) return run_simulate(sim_model, sim_params, sim_n, sim_seed, sim_out);
    if (*recover_cmd)
      return run_recover(rec_model, rec_params, rec_n, rec_draws, rec_burn, rec_seeds, rec_seed, rec_out);
    if (*lrtest_cmd) return run_lrtest(lr_restricted, lr_unrestricted);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const SpecError& e) {
    std::cerr << "model error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const EstimationError& e) {
    std::cerr << "estimation error: " << e.what() << "\n";
    return kExitEstimation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

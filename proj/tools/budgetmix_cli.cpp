// Command-line front end: design, calibrate, plan and simulate from a JSON config.
#include "budgetmix/experiment.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

using namespace budgetmix;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", c.out, "output directory");
  cmd->add_option("--seed", c.seed, "override the config seed");
  cmd->add_option("--mode", c.mode, "override the cost model")->check(CLI::IsMember({"broadcast", "unicast"}));
}

ExperimentConfig load(const Common& c) {
  ExperimentConfig cfg = load_experiment_config(c.config);
  if (c.seed) cfg.seed = *c.seed;
  if (c.mode) cfg.costs.mode = *c.mode == "broadcast" ? CostMode::Broadcast : CostMode::Unicast;
  return cfg;
}

void emit(const Common& c, const std::string& file, const Json& j) {
  if (!c.out.empty()) {
    fs::create_directories(c.out);
    write_json_file((fs::path(c.out) / file).string(), j);
  }
  std::cout << j.dump(2) << '\n';
}

double pick_budget(std::optional<double> budget, const CostModel& c) {
  if (budget) return *budget;
  const auto [lo, hi] = budget_window(c);
  return (lo + hi) / 2.0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Budgeted mixing-matrix design, planning and simulation"};
  app.require_subcommand(1);

  Common common;
  std::optional<double> budget;
  std::size_t samples = 2000;
  double delta = 1e-3;
  std::string plan_path, profile_path;

  auto* design_b = app.add_subcommand("design-broadcast", "activation probabilities and divergence at one budget");
  add_common(design_b, common);
  design_b->add_option("--budget", budget, "per-node budget D (default: middle of the window)");
  design_b->add_option("--samples", samples, "Monte-Carlo draws for rho");

  auto* design_u = app.add_subcommand("design-unicast", "designed unicast distribution at one budget");
  add_common(design_u, common);
  design_u->add_option("--budget", budget, "per-node budget D (default: middle of the window)");
  design_u->add_option("--delta", delta, "stopping tolerance on successive rho");

  auto* calibrate = app.add_subcommand("calibrate", "rho upper profile over the budget grid");
  add_common(calibrate, common);

  auto* plan = app.add_subcommand("plan", "multi-phase plan");
  add_common(plan, common);
  plan->add_option("--profile", profile_path, "use a saved profile instead of calibrating")->check(CLI::ExistingFile);

  auto* simulate = app.add_subcommand("simulate", "simulate a saved plan");
  add_common(simulate, common);
  simulate->add_option("--plan", plan_path, "plan JSON")->required()->check(CLI::ExistingFile);

  auto* run = app.add_subcommand("run", "full pipeline");
  add_common(run, common);

  CLI11_PARSE(app, argc, argv);

  try {
    ExperimentConfig cfg = load(common);
    if (common.out.empty()) common.out = run->parsed() || simulate->parsed() ? "out" : "";

    if (run->parsed()) {
      const auto result = run_experiment(cfg, common.out);
      std::cout << result.summary.dump(2) << '\n';
      return result.exit_code;
    }

    const Topology t = build_topology(cfg);
    const CostModel c = build_cost_model(cfg, t);

    if (design_b->parsed()) {
      if (!std::holds_alternative<BroadcastCost>(c)) throw ConfigError({"mode: design-broadcast needs broadcast costs"});
      const double d = pick_budget(budget, c);
      const auto a = activation_probabilities(std::get<BroadcastCost>(c), d);
      const auto est = rho_monte_carlo(broadcast_distribution(t, a), samples, cfg.seed);
      Json j{{"budget", d},
             {"omega", std::vector<double>(a.omega.data(), a.omega.data() + a.omega.size())},
             {"rho_estimate", est.estimate},
             {"standard_error", est.standard_error},
             {"samples", samples}};
      if (t.edge_count() == static_cast<std::size_t>(t.size()) * (t.size() - 1) / 2 && a.omega.maxCoeff() > 0.0)
        j["rho_asymptotic_clique"] = rho_asymptotic_clique(a);
      emit(common, "design_broadcast.json", j);
      return kExitOk;
    }
    if (design_u->parsed()) {
      if (!std::holds_alternative<UnicastCost>(c)) throw ConfigError({"mode: design-unicast needs unicast costs"});
      const double d = pick_budget(budget, c);
      Rng rng = split_stream(cfg.seed, 1);
      const auto design = design_unicast(t, std::get<UnicastCost>(c), d, delta, rng);
      Json j{{"budget", d}, {"rho", design.rho}, {"rho_history", design.rho_history}, {"failed", design.failed}};
      j["distribution"] = distribution_to_json(design.distribution());
      emit(common, "design_unicast.json", j);
      return design.failed ? kExitDesign : kExitOk;
    }

    const auto grid = build_budget_grid(cfg, c);
    CalibrationOptions copts;
    copts.samples = cfg.planner.samples;
    copts.delta = cfg.planner.delta;
    copts.seed = cfg.seed;

    if (calibrate->parsed()) {
      emit(common, "profile.json", profile_to_json(calibrate_rho_profile(t, c, grid, copts)));
      return kExitOk;
    }
    if (plan->parsed()) {
      const RhoProfile profile = profile_path.empty() ? calibrate_rho_profile(t, c, grid, copts)
                                                      : profile_from_json(read_json_file(profile_path));
      const ConvergenceParams params = build_convergence_params(cfg, build_problem(cfg, t.size()));
      PlannerGrids grids{grid, cfg.planner.durations};
      if (grids.durations.empty() && cfg.planner.max_phases == 2)
        grids.durations = default_duration_grid(plan_phase_count(1, profile, params, grids).horizon,
                                                cfg.planner.duration_count);
      emit(common, "plan.json", plan_to_json(plan_multi_phase(cfg.planner.max_phases, profile, params, grids)));
      return kExitOk;
    }
    if (simulate->parsed()) {
      fs::create_directories(common.out);
      const PhasePlan p = plan_from_json(read_json_file(plan_path));
      emit(common, "summary.json", simulate_plan(cfg, p, common.out));
      return kExitOk;
    }
  } catch (const ConfigError& e) {
    std::cerr << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const BudgetInfeasible& e) {
    std::cerr << "budget infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const NoPlan& e) {
    std::cerr << "no plan: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const DesignFailure& e) {
    std::cerr << "design failure: " << e.what() << '\n';
    return kExitDesign;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kExitOk;
}

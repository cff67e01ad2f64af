#pragma once

#include "budgetmix/convergence.hpp"
#include "budgetmix/cost.hpp"
#include "budgetmix/planner.hpp"
#include "budgetmix/serialization.hpp"
#include "budgetmix/simulator.hpp"
#include "budgetmix/topology.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace budgetmix {

/// Every schema violation found in a config, each prefixed with its JSON path.
struct ConfigError : std::runtime_error {
  explicit ConfigError(std::vector<std::string> v);
  std::vector<std::string> violations;
};

struct TopologySource {
  enum class Kind { Clique, File, Roofnet };
  Kind kind = Kind::Clique;
  int nodes = 0;
  std::string path;
  std::uint64_t seed = 0;
};

/// Scalar entries apply to every node (or every edge for link costs).
struct CostSpec {
  CostMode mode = CostMode::Broadcast;
  bool testbed = false;
  std::variant<double, std::vector<double>> comp = 0.0;
  std::variant<double, std::vector<double>> tx = 0.0;
  std::variant<double, std::vector<std::vector<double>>> link = 0.0;
};

/// Fields left unset are derived from the synthetic problem.
struct ConvergenceSpec {
  std::optional<double> L, M1, M2, sigma_hat, zeta_hat, f0, xi0, r0;
  double epsilon = 0.01;
  bool convex = true;
};

struct PlannerSpec {
  int max_phases = 2;
  std::vector<double> budgets;  ///< empty: default grid over the window
  int budget_count = 25;
  std::vector<std::int64_t> durations;
  int duration_count = 20;
  std::size_t samples = 500;
  double delta = 1e-3;
};

struct SimulationSpec {
  int dim = 20;
  double hetero = 1.0;
  double noise = 0.1;
  int runs = 1;
  std::optional<double> eta;  ///< unset: prescribed_learning_rate
  std::int64_t max_iterations = 100000;
  std::optional<double> target_gap;  ///< unset: epsilon
  bool stop_at_target = true;
  /// Rescale closed phases by (pilot iterations to target) / (bound horizon).
  bool normalize = false;
  /// Also simulate the single-phase schedule at the top of the budget window.
  bool baseline = false;
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  TopologySource topology;
  CostSpec costs;
  ConvergenceSpec convergence;
  PlannerSpec planner;
  SimulationSpec simulation;
};

/// Validates the whole document and throws ConfigError listing every
/// violation. Relative topology paths resolve against base_dir.
ExperimentConfig parse_experiment_config(std::string_view text, const std::string& base_dir = ".");
ExperimentConfig load_experiment_config(const std::string& path);

Topology build_topology(const ExperimentConfig& cfg);
/// Throws ConfigError when table sizes do not match the topology.
CostModel build_cost_model(const ExperimentConfig& cfg, const Topology& t);
SyntheticProblem build_problem(const ExperimentConfig& cfg, int nodes);
ConvergenceParams build_convergence_params(const ExperimentConfig& cfg, const SyntheticProblem& p);
/// Planner budget grid, each budget checked against the window (BudgetInfeasible).
std::vector<double> build_budget_grid(const ExperimentConfig& cfg, const CostModel& c);

/// The budgeted design at one budget: the broadcast sampler, or the
/// designed finite unicast distribution (DesignFailure when ρ stays at 1).
MixingDistribution design_distribution(const Topology& t, const CostModel& c, double budget, double delta, Rng& rng);

std::vector<SimPhase> simulation_phases(const PhasePlan& plan, const Topology& t, const CostModel& c, double delta,
                                        Rng& rng);

/// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitDesign = 4;

struct ExperimentResult {
  Json summary;
  int exit_code = kExitOk;
};

/// design → calibrate → plan → simulate. Writes profile.json, plan.json,
/// trace_run<k>.csv (and baseline_run<k>.csv) and summary.json into out_dir.
/// Stage failures are recorded in the summary as {"stage", "kind", "message"}.
ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir);

/// Simulation stage on its own for a given plan; also used by run_experiment.
Json simulate_plan(const ExperimentConfig& cfg, const PhasePlan& plan, const std::string& out_dir);

}  // namespace budgetmix

#pragma once

#include "budgetmix/convergence.hpp"
#include "budgetmix/cost.hpp"
#include "budgetmix/topology.hpp"

#include <cstdint>
#include <stdexcept>
#include <vector>

namespace budgetmix {

/// Upper envelope ρ⁺(D) sampled on a budget grid.
struct RhoProfile {
  enum class Source { Analytic, Empirical };
  std::vector<double> budgets;    ///< strictly increasing
  std::vector<double> rho_upper;  ///< non-increasing, in [0, 1]
  Source source = Source::Empirical;

  /// Linear interpolation; clamps to the end values outside the grid.
  double rho_at(double budget) const;
  void check() const;
};

struct CalibrationOptions {
  std::size_t samples = 500;  ///< Monte-Carlo draws per budget
  double delta = 1e-3;        ///< unicast design stopping tolerance
  std::uint64_t seed = 0;
};

/// ρ⁺ at each budget: closed form for a homogeneous clique (broadcast) or
/// 4/d on a clique (unicast); otherwise the designed distribution's ρ, Monte
/// Carlo plus three standard errors for samplers and exact for finite
/// supports. A running minimum then makes the profile non-increasing.
/// Budgets are sorted; throws std::invalid_argument on an empty list and
/// BudgetInfeasible below the window.
RhoProfile calibrate_rho_profile(const Topology& t, const CostModel& c, std::vector<double> budgets,
                                 const CalibrationOptions& options = {});

/// D·(T + m·√(Tπ/8)).
double q_bound(std::int64_t iterations, double budget, int nodes);

/// q at the single-phase horizon for p = 1 − ρ⁺(D); +∞ when p = 0 or the
/// horizon search gives up.
double q_k1_objective(double budget, const RhoProfile& profile, const ConvergenceParams& params);

/// q(τ₁, D₁) + q(T₃ − τ₁, D₂) for the two-phase schedule; +∞ as above.
double q_k2_objective(double budget1, double budget2, std::int64_t tau1, const RhoProfile& profile,
                      const ConvergenceParams& params);

struct PlannedPhase {
  double budget = 0;
  std::int64_t duration = 0;  ///< for the last phase: horizon minus the closed phases
  double p = 0;
};

struct PhasePlan {
  int K = 1;
  std::vector<PlannedPhase> phases;
  std::int64_t horizon = 0;
  double objective = 0;

  /// p-schedule of the plan (last phase open).
  PSchedule schedule() const;
};

struct PlannerGrids {
  std::vector<double> budgets;
  /// τ₁ candidates; empty means default_duration_grid over the best single-phase horizon.
  std::vector<std::int64_t> durations;
};

/// `count` evenly spaced budgets covering [lo, hi] inclusive.
std::vector<double> default_budget_grid(double lo, double hi, int count = 25);
/// `count` log-spaced distinct durations in [1, horizon].
std::vector<std::int64_t> default_duration_grid(std::int64_t horizon, int count = 20);

struct NoPlan : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Best plan with exactly K phases (K ∈ {1, 2}) by exhaustive grid search;
/// the lowest grid index wins ties. Throws NoPlan when every point is +∞.
PhasePlan plan_phase_count(int K, const RhoProfile& profile, const ConvergenceParams& params, const PlannerGrids& grids);

/// argmin over K = 1..max_phases of plan_phase_count, smaller K on ties.
PhasePlan plan_multi_phase(int max_phases, const RhoProfile& profile, const ConvergenceParams& params,
                           const PlannerGrids& grids);

/// Scales each closed phase by t_actual / t_bound (rounded, at least 1).
/// The horizon is kept; the last phase absorbs the difference.
PhasePlan normalize_phase_lengths(const PhasePlan& plan, std::int64_t t_actual, std::int64_t t_bound);

}  // namespace budgetmix

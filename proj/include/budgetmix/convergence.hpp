#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace budgetmix {

/// Problem constants feeding the iteration bounds.
struct ConvergenceParams {
  double L = 1.0;          ///< smoothness
  double M1 = 0.0;         ///< noise growth
  double M2 = 0.0;         ///< heterogeneity growth
  double sigma_hat = 0.0;  ///< gradient noise level
  double zeta_hat = 0.0;   ///< heterogeneity level
  double epsilon = 1.0;    ///< required convergence level
  double f0 = 1.0;         ///< initial optimality gap (nonconvex criterion)
  double xi0 = 0.0;        ///< initial consensus distance
  double r0 = 1.0;         ///< initial squared distance to the optimum (convex criterion)
  int nodes = 1;           ///< m, enters the σ̂²/(mT) terms
  bool convex = true;

  /// Throws std::invalid_argument if a field is out of its domain.
  void check() const;
};

/// Piecewise-constant p sequence. Every phase but the last lasts `length`
/// iterations; the last one runs forever (its length is ignored).
/// Iteration j (0-indexed) uses the p of the phase that contains it.
struct PSchedule {
  struct Phase {
    double p = 1.0;
    std::int64_t length = 0;
  };
  std::vector<Phase> phases;

  static PSchedule constant(double p) { return PSchedule{{{p, 0}}}; }
  static PSchedule two_phase(double p1, std::int64_t tau1, double p2) { return PSchedule{{{p1, tau1}, {p2, 0}}}; }

  /// Iterations covered by the closed phases.
  std::int64_t closed_length() const;
  double p_at(std::int64_t j) const;
  /// Minimum p over phases that actually occur (zero-length closed phases skipped).
  double p_min() const;
  void check() const;
};

/// π₀ … π_{T−1} by the backward recursion π_j = 1 + (1 − p^{(j)}/2)·π_{j+1},
/// with π = 2/p_K throughout the open final phase. Infinite entries when any
/// occurring p is 0.
std::vector<double> pi_values(const PSchedule& s, std::int64_t horizon);

struct PiAggregates {
  double pi1 = 0;  ///< (1/T) Σ π_j
  double pi2 = 0;  ///< (1/T) Σ π_j / p^{(j)}
  double pi0 = 0;
};

/// Π₁(T), Π₂(T) (and π₀) summed directly from pi_values. O(T).
PiAggregates pi_aggregates(const PSchedule& s, std::int64_t horizon);

/// Same quantities in O(#phases) from per-phase geometric sums; used by the
/// iteration searches where T reaches 10⁶ and beyond.
PiAggregates phase_aggregates(const PSchedule& s, std::int64_t horizon);

/// Two-phase closed forms (p1 for τ₁ iterations, then p2), T ≥ τ₁ ≥ 1.
PiAggregates pi_aggregates_two_phase(double p1, std::int64_t tau1, double p2, std::int64_t horizon);

/// Left-hand side of the nonconvex stopping rule; compare against ε/16.
double nonconvex_bound(const PiAggregates& agg, double p_min, const ConvergenceParams& params, std::int64_t horizon);
/// Left-hand side of the convex stopping rule; compare against ε.
double convex_bound(const PiAggregates& agg, double p_min, const ConvergenceParams& params, std::int64_t horizon);

bool t_condition_nonconvex(double pi1, double pi2, double pi0, double p_min, const ConvergenceParams& params,
                           std::int64_t horizon);
bool t_condition_convex(double pi1, double pi2, double pi0, double p_min, const ConvergenceParams& params,
                        std::int64_t horizon);

/// Horizon search cap; beyond it the schedule is reported as not converging.
inline constexpr std::int64_t kMaxHorizon = 1'000'000'000'000;

/// Smallest T ≥ 1 satisfying the criterion selected by params.convex, by
/// doubling then bisection. nullopt when nothing up to kMaxHorizon passes.
std::optional<std::int64_t> t2_min_iterations(const PSchedule& s, const ConvergenceParams& params);

/// Phase horizon: smallest T ≥ Σ closed τ_s satisfying the criterion.
std::optional<std::int64_t> t3_phase_horizon(const PSchedule& s, const ConvergenceParams& params);

/// Step size from the bound proofs for horizon T; terms that do not apply
/// (zero noise) are +∞ and drop out of the minimum.
double prescribed_learning_rate(const ConvergenceParams& params, std::int64_t horizon, const PSchedule& s);

}  // namespace budgetmix

#pragma once

#include "budgetmix/core.hpp"
#include "budgetmix/mixing.hpp"
#include "budgetmix/topology.hpp"

#include <vector>

namespace budgetmix {

/// Per-iteration energy under broadcast: comp[i] always, tx[i] once when
/// node i has any active link.
struct BroadcastCost {
  Vector comp;
  Vector tx;

  static BroadcastCost homogeneous(int m, double comp, double tx);
  int size() const { return static_cast<int>(comp.size()); }
  /// Throws std::invalid_argument on size mismatch or negative entries.
  void check() const;
};

/// Node activation probabilities ω_i ∈ [0, 1].
struct ActivationProfile {
  Vector omega;
  int size() const { return static_cast<int>(omega.size()); }
};

/// ω_i = min((D − c_i^a)/c_i^b, 1), with ω_i = 1 when c_i^b = 0.
/// Throws BudgetInfeasible when D < max_i c_i^a.
ActivationProfile activation_probabilities(const BroadcastCost& c, double budget);

/// [max_i c_i^a, max_i (c_i^a + c_i^b)]: budgets below are infeasible,
/// budgets at the top activate every node.
std::pair<double, double> broadcast_budget_window(const BroadcastCost& c);

/// One draw of the budgeted broadcast design: U ~ ∏ Bernoulli(ω_i), then
/// Metropolis weights on the subgraph induced by U.
MixingMatrix sample_broadcast_matrix(const Topology& t, const ActivationProfile& a, Rng& rng);

/// The broadcast design as a procedural distribution (captures copies).
MixingDistribution broadcast_distribution(const Topology& t, const ActivationProfile& a);

/// m⊥ = E[1/|U| | U ≠ ∅] for |U| Poisson-binomial in ω, computed exactly in O(m²).
double m_perp(const ActivationProfile& a);

/// ‖m⊥·ωωᵀ + diag(1 − ω) − J‖, the large-m divergence on a clique.
double rho_asymptotic_clique(const ActivationProfile& a);

/// 1 − (D − c^a)/c^b, valid for c^a ≤ D < c^a + c^b.
double rho_homogeneous_clique(double comp, double tx, double budget);

}  // namespace budgetmix

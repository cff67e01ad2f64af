#pragma once

#include "budgetmix/core.hpp"
#include "budgetmix/mixing.hpp"
#include "budgetmix/topology.hpp"

#include <cstddef>
#include <limits>
#include <vector>

namespace budgetmix {

/// Per-iteration energy under unicast: comp[i] always plus link(i, j) for
/// every active link (i, j). `link` is symmetric and zero off the base edges.
struct UnicastCost {
  Vector comp;
  Matrix link;

  static UnicastCost homogeneous(const Topology& t, double comp, double link_cost);
  int size() const { return static_cast<int>(comp.size()); }
  void check(const Topology& t) const;
  /// max_j c_ij^b over the neighbors of i (0 for isolated nodes).
  double max_link(int i) const;
};

/// [max_i c_i^a, max_i (c_i^a + Σ_j c_ij^b)].
std::pair<double, double> unicast_budget_window(const UnicastCost& c);

/// Candidate mixing matrices with the subgraphs they were built on; W₀ = I
/// on the edgeless graph always comes first.
struct CandidateSet {
  std::vector<MixingMatrix> matrices;
  std::vector<Topology> subgraphs;

  static CandidateSet identity_only(int m);
  void add(const Topology& subgraph);
  std::size_t size() const { return matrices.size(); }
};

/// floor(min_i (D − c_i^a) / max_j c_ij^b), clamped to [0, m−1].
/// Throws BudgetInfeasible when D < max_i c_i^a.
int regular_degree(const UnicastCost& c, double budget);

/// d-regular random graph H from the pairing model, intersected with the
/// base edges. Odd d·m decrements d. Pairs are drawn one at a time and a
/// draw that would create a loop or repeated edge is rejected; an attempt
/// that gets stuck restarts, up to 100 attempts, after which the simple
/// partial pairing of the last attempt is used.
Topology sample_regular_subgraph(const Topology& t, int degree, Rng& rng);

/// Same oracle without the intersection, exposed for regularity checks.
Topology sample_regular_graph(int m, int degree, Rng& rng);

/// W = I − (D_deg − A) with A[u, v] = 1 / max(deg u, deg v) on the subgraph edges.
MixingMatrix candidate_matrix(const Topology& subgraph);

/// Expected per-node link energy of each candidate: a(i, h) = Σ_{j:(i,j)∈E_h} c_ij^b.
Matrix candidate_link_costs(const CandidateSet& cands, const UnicastCost& c);

struct DistributionOptions {
  int max_iterations = 5000;
  double initial_step = 0.5;
  /// Stop once the best objective has not improved by more than 1e-12 for this many iterations.
  int patience = 1000;
  /// Feasible starting point (e.g. the previous solution padded with zeros); defaults to mass on I.
  std::vector<double> warm_start;
};

struct DistributionSolution {
  std::vector<double> probabilities;
  double rho = 1.0;
  int iterations = 0;
};

/// Minimizes ‖Σ p_h W_hᵀW_h − J‖ over the simplex under the per-node
/// expected-cost constraints c_i^a + Σ_h p_h a(i, h) ≤ D by projected
/// subgradient descent (Dykstra projection) and returns the best iterate.
/// Throws BudgetInfeasible if even all mass on W₀ = I violates the budget.
DistributionSolution optimize_distribution(const CandidateSet& cands, const UnicastCost& c, double budget,
                                           const DistributionOptions& options = {});

/// Euclidean projection onto {p ≥ 0, Σp = 1}.
std::vector<double> project_simplex(const std::vector<double>& v);

struct UnicastDesign {
  CandidateSet candidates;
  std::vector<double> probabilities;
  double rho = 1.0;
  /// ρ_1, ρ_2, … after each oracle draw; non-increasing.
  std::vector<double> rho_history;
  bool failed = false;

  MixingDistribution distribution() const;
};

/// ρ values at least this close to 1 count as "no mixing".
inline constexpr double kRhoOneTolerance = 1e-9;

/// Iteratively draws regular subgraphs, adds their candidate matrices and
/// re-optimizes the distribution until |ρ_k − ρ_{k−1}| < delta with ρ_k < 1,
/// or 20·m draws. `failed` is set when ρ never leaves 1.
UnicastDesign design_unicast(const Topology& t, const UnicastCost& c, double budget, double delta, Rng& rng);

/// max_i 4·max_j c_ij^b / (D − c_i^a); +∞ when D equals some c_i^a.
double ramanujan_rho_bound(const UnicastCost& c, double budget);

}  // namespace budgetmix

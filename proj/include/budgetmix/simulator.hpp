#pragma once

#include "budgetmix/convergence.hpp"
#include "budgetmix/cost.hpp"
#include "budgetmix/mixing.hpp"
#include "budgetmix/topology.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace budgetmix {

/// F_i(x) = ½‖A_i x − b_i‖², F = (1/m) Σ F_i, with additive isotropic
/// Gaussian gradient noise of scale noise_sigma per coordinate.
class SyntheticProblem {
 public:
  /// Takes explicit per-node data; solves the normal equations for x* and
  /// F_inf. Throws std::invalid_argument on inconsistent shapes or a
  /// singular Σ A_iᵀA_i.
  SyntheticProblem(std::vector<Matrix> a, std::vector<Vector> b, double noise_sigma);

  int nodes() const { return static_cast<int>(a_.size()); }
  int dim() const { return static_cast<int>(x_star_.size()); }
  double noise_sigma() const { return noise_; }
  const Matrix& a(int i) const { return a_[static_cast<std::size_t>(i)]; }
  const Vector& b(int i) const { return b_[static_cast<std::size_t>(i)]; }
  const Vector& x_star() const { return x_star_; }
  double f_inf() const { return f_inf_; }

  double local_loss(int i, const Vector& x) const;
  double loss(const Vector& x) const;
  Vector exact_gradient(int i, const Vector& x) const;
  Vector full_gradient(const Vector& x) const;
  /// max_i λ_max(A_iᵀA_i): every F_i is L-smooth with this L.
  double smoothness() const;

 private:
  std::vector<Matrix> a_;
  std::vector<Vector> b_;
  double noise_;
  Vector x_star_;
  double f_inf_ = 0;
};

/// A_i = Q_i diag(s) Q_iᵀ with Q_i random orthogonal and s uniform in
/// [1, √10] (so A_iᵀA_i has condition number at most 10); b_i = A_i x_c +
/// hetero·z_i with z_i standard normal and a shared random x_c.
SyntheticProblem make_quadratic_problem(int m, int dim, double hetero, double noise, Rng& rng);

/// A_iᵀ(A_i x − b_i) + noise·N(0, I).
Vector local_gradient(const SyntheticProblem& p, int i, const Vector& x, Rng& rng);

struct SimState {
  Matrix x;  ///< row i is node i's parameters
  std::int64_t t = 0;
};

/// x_i ← Σ_j W[i,j](x_j − η g_j) for all i from the pre-step state.
SimState dpsgd_step(const SimState& s, const MixingMatrix& w, double eta, const SyntheticProblem& p, Rng& rng);

/// (1/m) Σ ‖x_i − x̄‖².
double consensus_distance(const Matrix& x);

inline Vector mean_parameters(const Matrix& x) { return x.colwise().mean().transpose(); }

struct EnergyLedger {
  CostMode mode = CostMode::Broadcast;
  Vector energy;

  static EnergyLedger empty(CostMode mode, int m) { return {mode, Vector::Zero(m)}; }
};

/// Charges one iteration with mixing matrix w: c_i^a plus c_i^b once if node
/// i has any nonzero link (broadcast) or plus c_ij^b per nonzero link
/// (unicast). Throws std::invalid_argument when the ledger and cost modes differ.
EnergyLedger energy_step(const EnergyLedger& l, const MixingMatrix& w, const CostModel& c, const Topology& t);

double max_per_node_energy(const EnergyLedger& l);

struct SimPhase {
  MixingDistribution distribution;
  std::int64_t duration = 0;  ///< ignored for the last phase
};

struct SimOptions {
  /// Initial parameters (m × dim); zeros when absent.
  std::optional<Matrix> initial;
  /// Stop as soon as F(x̄) − F_inf ≤ this value.
  std::optional<double> stop_gap;
};

/// Row k describes the state after k iterations; row 0 is the initial state.
struct SimTrace {
  std::vector<std::int64_t> iteration;
  std::vector<double> loss;
  std::vector<double> consensus;
  std::vector<Vector> energy;

  std::size_t size() const { return iteration.size(); }
  /// First iteration with F(x̄) − F_inf ≤ gap, if any.
  std::optional<std::size_t> first_below(double gap, double f_inf) const;
};

/// Runs T iterations of D-PSGD, drawing W independently each iteration from
/// the phase covering it. Deterministic in the state of rng.
SimTrace run_simulation(const SyntheticProblem& p, const std::vector<SimPhase>& schedule, double eta,
                        std::int64_t iterations, const CostModel& c, const Topology& t, Rng& rng,
                        const SimOptions& options = {});

/// Constants of the convergence calculus for this problem started at x0
/// (rows per node): L from smoothness(), σ̂² = noise²·dim, M₁ = 0, and the
/// heterogeneity split ζ̂² = 2·mean‖∇F_i(x*)‖², M₂ = 2·mean‖H_i − H̄‖²/λ_min(H̄)².
ConvergenceParams derive_convergence_params(const SyntheticProblem& p, const Matrix& x0, double epsilon,
                                            bool convex = true);

}  // namespace budgetmix

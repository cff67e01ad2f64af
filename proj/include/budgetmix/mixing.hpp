#pragma once

#include "budgetmix/core.hpp"
#include "budgetmix/topology.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <variant>
#include <vector>

namespace budgetmix {

/// Dense m×m mixing matrix. Valid ones are symmetric, row-stochastic in the
/// sum sense (entries may be negative) and supported on the closed
/// neighborhoods of the base topology; see validate_mixing.
using MixingMatrix = Matrix;

inline constexpr double kRowSumTolerance = 1e-10;
/// An off-diagonal entry counts as a link iff its magnitude exceeds this.
inline constexpr double kNonzeroThreshold = 1e-15;

struct MixingViolation {
  enum class Kind { Asymmetric, RowSum, OffTopology, OutOfUnitInterval };
  Kind kind;
  int row;
  int col;
  double value;
  bool warning_only() const { return kind == Kind::OutOfUnitInterval; }
};

struct ValidationReport {
  std::vector<MixingViolation> violations;
  std::vector<MixingViolation> warnings;
  bool valid() const { return violations.empty(); }
  std::string describe() const;
};

/// Checks symmetry, unit row sums and topology compliance. Entries outside
/// [0, 1] are reported as warnings only.
ValidationReport validate_mixing(const MixingMatrix& w, const Topology& t);

/// Metropolis–Hastings weights restricted to the active set U: for linked
/// i, j ∈ U, W[i,j] = 1 / max(|V_i ∩ U|, |V_j ∩ U|); inactive nodes keep an
/// identity row; diagonals close the row sums.
MixingMatrix metropolis_weights(const Topology& t, const std::vector<char>& active);
MixingMatrix metropolis_weights(const Topology& t, const std::vector<int>& active_nodes);

/// Distribution over mixing matrices, either with finite support or given by
/// a seeded sampler.
class MixingDistribution {
 public:
  using Sampler = std::function<MixingMatrix(Rng&)>;

  struct Finite {
    std::vector<MixingMatrix> candidates;
    std::vector<double> probabilities;
  };
  struct Procedural {
    int dimension = 0;
    Sampler sample;
  };

  /// Throws std::invalid_argument unless probabilities are a distribution
  /// (non-negative, summing to 1 within 1e-12) over same-sized matrices.
  static MixingDistribution finite(std::vector<MixingMatrix> candidates, std::vector<double> probabilities);
  static MixingDistribution point_mass(MixingMatrix w);
  static MixingDistribution procedural(int dimension, Sampler sampler);

  int dimension() const;
  bool is_finite() const { return std::holds_alternative<Finite>(support_); }
  const Finite& finite_support() const;

  MixingMatrix sample(Rng& rng) const;

 private:
  explicit MixingDistribution(std::variant<Finite, Procedural> support) : support_(std::move(support)) {}
  std::variant<Finite, Procedural> support_;
};

/// ‖Σ_h Pr[W_h]·W_hᵀW_h − J‖ for a finite distribution; throws Unsupported otherwise.
double rho_exact(const MixingDistribution& d);

/// ‖M − J‖ for a symmetric second-moment matrix M = E[WᵀW].
double rho_from_second_moment(const Matrix& second_moment);

struct RhoEstimate {
  double estimate = 0;
  double standard_error = 0;
};

/// Monte-Carlo divergence: ‖(1/n)Σ W_kᵀW_k − J‖ over n draws, with a
/// batch-means standard error from min(10, n) near-equal batches.
/// Deterministic in `seed`.
RhoEstimate rho_monte_carlo(const MixingDistribution& d, std::size_t n, std::uint64_t seed);

}  // namespace budgetmix

#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace budgetmix {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Every randomized routine takes one of these by reference; seeding it is the caller's job.
using Rng = std::mt19937_64;

/// D is below the computation cost of some node.
struct BudgetInfeasible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The unicast design never left rho = 1 within its iteration cap.
struct DesignFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Operation requested on a distribution that cannot support it (e.g. exact rho of a sampler).
struct Unsupported : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// E[1/|U| | U nonempty] with every activation probability zero.
struct UndefinedConditional : std::domain_error {
  using std::domain_error::domain_error;
};

/// Derives an independent generator for stream `index` of a base seed.
inline Rng split_stream(std::uint64_t seed, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return Rng(seq);
}

}  // namespace budgetmix

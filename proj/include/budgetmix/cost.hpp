#pragma once

#include "budgetmix/broadcast.hpp"
#include "budgetmix/unicast.hpp"

#include <string_view>
#include <utility>
#include <variant>

namespace budgetmix {

enum class CostMode { Broadcast, Unicast };

using CostModel = std::variant<BroadcastCost, UnicastCost>;

inline CostMode cost_mode(const CostModel& c) {
  return std::holds_alternative<BroadcastCost>(c) ? CostMode::Broadcast : CostMode::Unicast;
}

inline std::string_view to_string(CostMode mode) { return mode == CostMode::Broadcast ? "broadcast" : "unicast"; }

/// Feasible budgets [lowest, saturating] for either model.
inline std::pair<double, double> budget_window(const CostModel& c) {
  if (const auto* b = std::get_if<BroadcastCost>(&c)) return broadcast_budget_window(*b);
  return unicast_budget_window(std::get<UnicastCost>(c));
}

/// The TX2/NX testbed figures: alternating devices, c^a = 0.086 for both,
/// c^b = 0.533 on even nodes and 1.333 on odd nodes.
inline BroadcastCost testbed_broadcast_cost(int m) {
  BroadcastCost c{Vector::Constant(m, 0.086), Vector(m)};
  for (int i = 0; i < m; ++i) c.tx(i) = i % 2 == 0 ? 0.533 : 1.333;
  return c;
}

}  // namespace budgetmix

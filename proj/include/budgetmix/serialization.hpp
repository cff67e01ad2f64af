#pragma once

#include "budgetmix/mixing.hpp"
#include "budgetmix/planner.hpp"
#include "budgetmix/simulator.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>

namespace budgetmix {

using Json = nlohmann::json;

/// {"m": m, "entries": [[row 0], [row 1], ...]}
Json matrix_to_json(const Matrix& w);
Matrix matrix_from_json(const Json& j);

/// {"m", "probabilities", "candidates": [matrix...]}; finite supports only.
Json distribution_to_json(const MixingDistribution& d);
MixingDistribution distribution_from_json(const Json& j);

/// {"K", "phases": [{"budget", "duration", "p"}], "horizon", "objective"};
/// an infinite objective is written as null.
Json plan_to_json(const PhasePlan& plan);
PhasePlan plan_from_json(const Json& j);

/// {"budgets", "rho_upper", "source": "analytic" | "empirical"}
Json profile_to_json(const RhoProfile& profile);
RhoProfile profile_from_json(const Json& j);

/// iteration,loss,consensus,energy_node_0..energy_node_{m-1}
void write_trace_csv(std::ostream& out, const SimTrace& trace);

/// Doubles printed with round-trip precision.
std::string format_number(double x);

void write_json_file(const std::string& path, const Json& j);
Json read_json_file(const std::string& path);

}  // namespace budgetmix

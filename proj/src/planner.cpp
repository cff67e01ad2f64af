#include "budgetmix/planner.hpp"

#include "budgetmix/mixing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

namespace budgetmix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool homogeneous(const Vector& v) { return v.size() == 0 || (v.array() == v(0)).all(); }

bool is_clique(const Topology& t) {
  const auto m = static_cast<std::size_t>(t.size());
  return t.edge_count() == m * (m - 1) / 2;
}

double probability_from_profile(const RhoProfile& profile, double budget) {
  return std::clamp(1.0 - profile.rho_at(budget), 0.0, 1.0);
}

}  // namespace

double RhoProfile::rho_at(double budget) const {
  if (budgets.empty()) throw std::invalid_argument("empty rho profile");
  if (budget <= budgets.front()) return rho_upper.front();
  if (budget >= budgets.back()) return rho_upper.back();
  const auto hi = static_cast<std::size_t>(std::upper_bound(budgets.begin(), budgets.end(), budget) - budgets.begin());
  const std::size_t lo = hi - 1;
  if (budget == budgets[lo]) return rho_upper[lo];
  const double f = (budget - budgets[lo]) / (budgets[hi] - budgets[lo]);
  return rho_upper[lo] + f * (rho_upper[hi] - rho_upper[lo]);
}

void RhoProfile::check() const {
  if (budgets.empty() || budgets.size() != rho_upper.size()) throw std::invalid_argument("malformed rho profile");
  for (std::size_t k = 0; k < budgets.size(); ++k) {
    if (!(rho_upper[k] >= 0.0 && rho_upper[k] <= 1.0)) throw std::invalid_argument("profile rho outside [0, 1]");
    if (k > 0 && !(budgets[k] > budgets[k - 1])) throw std::invalid_argument("profile budgets not increasing");
    if (k > 0 && rho_upper[k] > rho_upper[k - 1]) throw std::invalid_argument("profile rho increases with budget");
  }
}

RhoProfile calibrate_rho_profile(const Topology& t, const CostModel& c, std::vector<double> budgets,
                                 const CalibrationOptions& options) {
  if (budgets.empty()) throw std::invalid_argument("no budgets to calibrate");
  std::sort(budgets.begin(), budgets.end());
  budgets.erase(std::unique(budgets.begin(), budgets.end()), budgets.end());

  const bool clique = is_clique(t);
  const auto* bc = std::get_if<BroadcastCost>(&c);
  const auto* uc = std::get_if<UnicastCost>(&c);
  if (bc) bc->check();
  if (uc) uc->check(t);
  const bool analytic = clique && (uc || (homogeneous(bc->comp) && homogeneous(bc->tx) && bc->tx.size() > 0 && bc->tx(0) > 0));

  RhoProfile profile;
  profile.budgets = budgets;
  profile.source = analytic ? RhoProfile::Source::Analytic : RhoProfile::Source::Empirical;
  for (std::size_t k = 0; k < budgets.size(); ++k) {
    const double budget = budgets[k];
    double rho;
    if (bc && analytic) {
      activation_probabilities(*bc, budget);  // feasibility check
      const double comp = bc->comp(0), tx = bc->tx(0);
      rho = budget >= comp + tx ? 0.0 : rho_homogeneous_clique(comp, tx, budget);
    } else if (uc && analytic) {
      const int d = regular_degree(*uc, budget);
      rho = d > 0 ? std::min(1.0, 4.0 / d) : 1.0;
    } else if (bc) {
      const auto dist = broadcast_distribution(t, activation_probabilities(*bc, budget));
      const auto est = rho_monte_carlo(dist, options.samples, split_stream(options.seed, k)());
      rho = est.estimate + 3.0 * est.standard_error;
    } else {
      Rng rng = split_stream(options.seed, k);
      rho = design_unicast(t, *uc, budget, options.delta, rng).rho;
    }
    rho = std::clamp(rho, 0.0, 1.0);
    if (k > 0) rho = std::min(rho, profile.rho_upper.back());
    profile.rho_upper.push_back(rho);
  }
  return profile;
}

double q_bound(std::int64_t iterations, double budget, int nodes) {
  if (iterations < 0 || budget < 0.0) throw std::invalid_argument("q_bound needs T >= 0 and D >= 0");
  const double t = static_cast<double>(iterations);
  return budget * (t + nodes * std::sqrt(t * std::numbers::pi / 8.0));
}

double q_k1_objective(double budget, const RhoProfile& profile, const ConvergenceParams& params) {
  const double p = probability_from_profile(profile, budget);
  if (p <= 0.0) return kInf;
  const auto horizon = t2_min_iterations(PSchedule::constant(p), params);
  return horizon ? q_bound(*horizon, budget, params.nodes) : kInf;
}

double q_k2_objective(double budget1, double budget2, std::int64_t tau1, const RhoProfile& profile,
                      const ConvergenceParams& params) {
  if (tau1 < 0) throw std::invalid_argument("negative phase length");
  const double p1 = probability_from_profile(profile, budget1);
  const double p2 = probability_from_profile(profile, budget2);
  if (p2 <= 0.0 || (tau1 > 0 && p1 <= 0.0)) return kInf;
  const auto horizon = t3_phase_horizon(PSchedule::two_phase(p1, tau1, p2), params);
  if (!horizon) return kInf;
  return q_bound(tau1, budget1, params.nodes) + q_bound(*horizon - tau1, budget2, params.nodes);
}

PSchedule PhasePlan::schedule() const {
  PSchedule s;
  for (const auto& ph : phases) s.phases.push_back({ph.p, ph.duration});
  return s;
}

std::vector<double> default_budget_grid(double lo, double hi, int count) {
  if (count < 1 || hi < lo) throw std::invalid_argument("bad budget grid");
  if (count == 1) return {lo};
  std::vector<double> grid(static_cast<std::size_t>(count));
  for (int k = 0; k < count; ++k) grid[static_cast<std::size_t>(k)] = lo + (hi - lo) * k / (count - 1);
  grid.back() = hi;
  return grid;
}

std::vector<std::int64_t> default_duration_grid(std::int64_t horizon, int count) {
  if (horizon < 1 || count < 1) throw std::invalid_argument("bad duration grid");
  std::set<std::int64_t> values;
  const double top = std::log(static_cast<double>(horizon));
  for (int k = 0; k < count; ++k) {
    const double e = count == 1 ? top : top * k / (count - 1);
    values.insert(std::clamp<std::int64_t>(std::llround(std::exp(e)), 1, horizon));
  }
  return {values.begin(), values.end()};
}

PhasePlan plan_phase_count(int K, const RhoProfile& profile, const ConvergenceParams& params, const PlannerGrids& grids) {
  if (grids.budgets.empty()) throw std::invalid_argument("empty budget grid");
  std::vector<double> p(grids.budgets.size());
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = probability_from_profile(profile, grids.budgets[k]);

  PhasePlan best;
  best.K = K;
  best.objective = kInf;
  if (K == 1) {
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (p[k] <= 0.0) continue;
      const auto horizon = t2_min_iterations(PSchedule::constant(p[k]), params);
      if (!horizon) continue;
      const double q = q_bound(*horizon, grids.budgets[k], params.nodes);
      if (q < best.objective) {
        best.objective = q;
        best.horizon = *horizon;
        best.phases = {{grids.budgets[k], *horizon, p[k]}};
      }
    }
  } else if (K == 2) {
    std::vector<std::int64_t> durations = grids.durations;
    if (durations.empty()) durations = default_duration_grid(plan_phase_count(1, profile, params, grids).horizon);
    for (std::size_t a = 0; a < p.size(); ++a) {
      if (p[a] <= 0.0) continue;
      for (std::size_t b = 0; b < p.size(); ++b) {
        if (p[b] <= 0.0) continue;
        for (const std::int64_t tau : durations) {
          if (tau < 1) throw std::invalid_argument("phase durations must be >= 1");
          const auto horizon = t3_phase_horizon(PSchedule::two_phase(p[a], tau, p[b]), params);
          if (!horizon) continue;
          const double q = q_bound(tau, grids.budgets[a], params.nodes) +
                           q_bound(*horizon - tau, grids.budgets[b], params.nodes);
          if (q < best.objective) {
            best.objective = q;
            best.horizon = *horizon;
            best.phases = {{grids.budgets[a], tau, p[a]}, {grids.budgets[b], *horizon - tau, p[b]}};
          }
        }
      }
    }
  } else {
    throw std::invalid_argument("only K = 1 or K = 2 phases are supported");
  }
  if (!std::isfinite(best.objective)) throw NoPlan("no grid point converges");
  return best;
}

PhasePlan plan_multi_phase(int max_phases, const RhoProfile& profile, const ConvergenceParams& params,
                           const PlannerGrids& grids) {
  if (max_phases < 1 || max_phases > 2) throw std::invalid_argument("max_phases must be 1 or 2");
  PhasePlan best = plan_phase_count(1, profile, params, grids);
  if (max_phases == 2) {
    PlannerGrids g = grids;
    if (g.durations.empty()) g.durations = default_duration_grid(best.horizon);
    PhasePlan two = plan_phase_count(2, profile, params, g);
    if (two.objective < best.objective) best = std::move(two);
  }
  return best;
}

PhasePlan normalize_phase_lengths(const PhasePlan& plan, std::int64_t t_actual, std::int64_t t_bound) {
  if (t_actual < 1 || t_bound < t_actual) throw std::invalid_argument("need t_bound >= t_actual >= 1");
  PhasePlan out = plan;
  if (out.phases.empty()) return out;
  const double ratio = static_cast<double>(t_actual) / static_cast<double>(t_bound);
  std::int64_t closed = 0;
  for (std::size_t s = 0; s + 1 < out.phases.size(); ++s) {
    auto& d = out.phases[s].duration;
    d = std::max<std::int64_t>(1, std::llround(static_cast<double>(d) * ratio));
    closed += d;
  }
  out.phases.back().duration = std::max<std::int64_t>(0, out.horizon - closed);
  return out;
}

}  // namespace budgetmix

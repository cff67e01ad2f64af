#include "budgetmix/convergence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace budgetmix {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void ConvergenceParams::check() const {
  auto nonneg = [](double x, const char* name) {
    if (!(x >= 0.0)) throw std::invalid_argument(std::string(name) + " must be >= 0");
  };
  nonneg(M1, "M1");
  nonneg(M2, "M2");
  nonneg(sigma_hat, "sigma_hat");
  nonneg(zeta_hat, "zeta_hat");
  nonneg(f0, "f0");
  nonneg(xi0, "xi0");
  nonneg(r0, "r0");
  if (!(L > 0.0)) throw std::invalid_argument("L must be > 0");
  if (!(epsilon > 0.0)) throw std::invalid_argument("epsilon must be > 0");
  if (nodes < 1) throw std::invalid_argument("nodes must be >= 1");
}

std::int64_t PSchedule::closed_length() const {
  std::int64_t total = 0;
  for (std::size_t s = 0; s + 1 < phases.size(); ++s) total += phases[s].length;
  return total;
}

double PSchedule::p_at(std::int64_t j) const {
  for (std::size_t s = 0; s + 1 < phases.size(); ++s) {
    if (j < phases[s].length) return phases[s].p;
    j -= phases[s].length;
  }
  return phases.back().p;
}

double PSchedule::p_min() const {
  double out = phases.back().p;
  for (std::size_t s = 0; s + 1 < phases.size(); ++s)
    if (phases[s].length > 0) out = std::min(out, phases[s].p);
  return out;
}

void PSchedule::check() const {
  if (phases.empty()) throw std::invalid_argument("schedule has no phases");
  for (std::size_t s = 0; s < phases.size(); ++s) {
    if (!(phases[s].p >= 0.0 && phases[s].p <= 1.0)) throw std::invalid_argument("phase p outside [0, 1]");
    if (s + 1 < phases.size() && phases[s].length < 0) throw std::invalid_argument("negative phase length");
  }
}

std::vector<double> pi_values(const PSchedule& s, std::int64_t horizon) {
  s.check();
  if (horizon < 0) throw std::invalid_argument("negative horizon");
  if (s.p_min() <= 0.0) return std::vector<double>(static_cast<std::size_t>(horizon), kInf);
  const std::int64_t tail_start = s.closed_length();
  const double tail = 2.0 / s.phases.back().p;
  std::vector<double> pi(static_cast<std::size_t>(horizon), tail);
  double next = tail;
  for (std::int64_t j = tail_start - 1; j >= 0; --j) {
    const double value = 1.0 + (1.0 - s.p_at(j) / 2.0) * next;
    if (j < horizon) pi[static_cast<std::size_t>(j)] = value;
    next = value;
  }
  return pi;
}

PiAggregates pi_aggregates(const PSchedule& s, std::int64_t horizon) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  const auto pi = pi_values(s, horizon);
  if (s.p_min() <= 0.0) return {kInf, kInf, kInf};
  double sum1 = 0, sum2 = 0;
  for (std::int64_t j = 0; j < horizon; ++j) {
    sum1 += pi[static_cast<std::size_t>(j)];
    sum2 += pi[static_cast<std::size_t>(j)] / s.p_at(j);
  }
  const double t = static_cast<double>(horizon);
  return {sum1 / t, sum2 / t, pi.front()};
}

PiAggregates phase_aggregates(const PSchedule& s, std::int64_t horizon) {
  s.check();
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  if (s.p_min() <= 0.0) return {kInf, kInf, kInf};

  const double p_last = s.phases.back().p;
  const std::int64_t tail_start = s.closed_length();
  double sum1 = 0, sum2 = 0;
  if (horizon > tail_start) {
    const double count = static_cast<double>(horizon - tail_start);
    sum1 += count * 2.0 / p_last;
    sum2 += count * 2.0 / (p_last * p_last);
  }

  // Walk closed phases backwards. Inside a phase with ratio a = 1 − p/2 and
  // fixed point c = 2/p, the entry k steps before the phase end is
  // c − a^k (c − π_next).
  double next = 2.0 / p_last;
  std::int64_t end = tail_start;
  for (std::size_t idx = s.phases.size() - 1; idx-- > 0;) {
    const auto& ph = s.phases[idx];
    const std::int64_t n = ph.length;
    if (n == 0) continue;
    const double a = 1.0 - ph.p / 2.0;
    const double c = 2.0 / ph.p;
    const std::int64_t k_lo = std::max<std::int64_t>(1, end - horizon + 1);
    if (k_lo <= n) {
      const double count = static_cast<double>(n - k_lo + 1);
      const double geo = (std::pow(a, static_cast<double>(k_lo)) - std::pow(a, static_cast<double>(n + 1))) / (1.0 - a);
      const double phase_sum = c * count - (c - next) * geo;
      sum1 += phase_sum;
      sum2 += phase_sum / ph.p;
    }
    next = c - std::pow(a, static_cast<double>(n)) * (c - next);
    end -= n;
  }
  const double t = static_cast<double>(horizon);
  return {sum1 / t, sum2 / t, next};
}

PiAggregates pi_aggregates_two_phase(double p1, std::int64_t tau1, double p2, std::int64_t horizon) {
  if (!(p1 > 0.0 && p1 <= 1.0 && p2 > 0.0 && p2 <= 1.0)) throw std::invalid_argument("p1, p2 must lie in (0, 1]");
  if (tau1 < 1 || horizon < tau1) throw std::invalid_argument("need T >= tau1 >= 1");
  const double a = 1.0 - p1 / 2.0;
  // Σ_{j=1}^{τ₁} a^j
  const double geo = a * (1.0 - std::pow(a, static_cast<double>(tau1))) / (1.0 - a);
  const double t = static_cast<double>(horizon);
  const double tau = static_cast<double>(tau1);
  PiAggregates out;
  out.pi1 = 2.0 * (t - tau) / (t * p2) + 2.0 * tau / (t * p1) - (2.0 / (t * p1) - 2.0 / (t * p2)) * geo;
  out.pi2 = 2.0 * (t - tau) / (t * p2 * p2) + 2.0 * tau / (t * p1 * p1) - (2.0 / (t * p1 * p1) - 2.0 / (t * p2 * p1)) * geo;
  out.pi0 = 2.0 / p1 - std::pow(a, tau) * (2.0 / p1 - 2.0 / p2);
  return out;
}

double nonconvex_bound(const PiAggregates& agg, double p_min, const ConvergenceParams& q, std::int64_t horizon) {
  if (!(p_min > 0.0) || !std::isfinite(agg.pi1) || !std::isfinite(agg.pi2)) return kInf;
  const double t = static_cast<double>(horizon);
  const double sigma2 = q.sigma_hat * q.sigma_hat;
  const double zeta2 = q.zeta_hat * q.zeta_hat;
  const double alpha = 2.0 * q.L * q.L * ((sigma2 + q.M1 * zeta2) * agg.pi1 + 6.0 * zeta2 * agg.pi2);
  const double kappa = std::sqrt((1.0 + q.M1) * (1.0 + q.M2)) / p_min;
  const double noise = 2.0 * std::sqrt(sigma2 * q.L * q.f0 / (q.nodes * t));
  const double drift = 2.0 * std::cbrt(q.f0 * q.f0 * alpha / (t * t));
  // The three 1/T terms are summed before dividing so exact cases stay exact.
  const double linear = (q.L * q.L * (2.0 + agg.pi0) * q.xi0 + 20.0 * q.L * kappa * q.f0 + 4.0 * q.f0 * q.L * (q.M1 + 1.0)) / t;
  return noise + drift + linear;
}

double convex_bound(const PiAggregates& agg, double p_min, const ConvergenceParams& q, std::int64_t horizon) {
  if (!(p_min > 0.0) || !std::isfinite(agg.pi1) || !std::isfinite(agg.pi2)) return kInf;
  const double t = static_cast<double>(horizon);
  const double sigma2 = q.sigma_hat * q.sigma_hat;
  const double zeta2 = q.zeta_hat * q.zeta_hat;
  const double noise = 4.0 * std::sqrt(sigma2 * q.r0 / (q.nodes * t));
  const double linear = (6.0 * q.L * (1.0 + agg.pi0) * q.xi0 + 1800.0 * q.r0 * q.L / p_min) / t;
  const double drift = 220.0 * std::cbrt(q.r0 * q.r0) * std::cbrt(q.L * (agg.pi1 * sigma2 + agg.pi2 * zeta2)) / std::cbrt(t * t);
  return noise + linear + drift;
}

bool t_condition_nonconvex(double pi1, double pi2, double pi0, double p_min, const ConvergenceParams& params,
                           std::int64_t horizon) {
  if (horizon < 1) return false;
  return nonconvex_bound({pi1, pi2, pi0}, p_min, params, horizon) <= params.epsilon / 16.0;
}

bool t_condition_convex(double pi1, double pi2, double pi0, double p_min, const ConvergenceParams& params,
                        std::int64_t horizon) {
  if (horizon < 1) return false;
  return convex_bound({pi1, pi2, pi0}, p_min, params, horizon) <= params.epsilon;
}

namespace {

bool condition_at(const PSchedule& s, const ConvergenceParams& params, std::int64_t horizon) {
  const auto agg = phase_aggregates(s, horizon);
  const double p_min = s.p_min();
  return params.convex ? t_condition_convex(agg.pi1, agg.pi2, agg.pi0, p_min, params, horizon)
                       : t_condition_nonconvex(agg.pi1, agg.pi2, agg.pi0, p_min, params, horizon);
}

std::optional<std::int64_t> search_from(const PSchedule& s, const ConvergenceParams& params, std::int64_t lo) {
  params.check();
  s.check();
  if (s.p_min() <= 0.0) return std::nullopt;
  lo = std::max<std::int64_t>(lo, 1);
  if (condition_at(s, params, lo)) return lo;
  std::int64_t failing = lo;
  std::int64_t hi = lo;
  while (true) {
    if (hi >= kMaxHorizon) return std::nullopt;
    hi = std::min(hi * 2, kMaxHorizon);
    if (condition_at(s, params, hi)) break;
    failing = hi;
  }
  while (hi - failing > 1) {
    const std::int64_t mid = failing + (hi - failing) / 2;
    if (condition_at(s, params, mid))
      hi = mid;
    else
      failing = mid;
  }
  return hi;
}

}  // namespace

std::optional<std::int64_t> t2_min_iterations(const PSchedule& s, const ConvergenceParams& params) {
  return search_from(s, params, 1);
}

std::optional<std::int64_t> t3_phase_horizon(const PSchedule& s, const ConvergenceParams& params) {
  return search_from(s, params, s.closed_length());
}

double prescribed_learning_rate(const ConvergenceParams& q, std::int64_t horizon, const PSchedule& s) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  const double t = static_cast<double>(horizon);
  const double p_min = s.p_min();
  const auto agg = phase_aggregates(s, horizon);
  const double sigma2 = q.sigma_hat * q.sigma_hat;
  const double zeta2 = q.zeta_hat * q.zeta_hat;
  auto guarded = [](double numerator, double denominator, double power) {
    return denominator > 0.0 ? std::pow(numerator / denominator, power) : kInf;
  };
  if (q.convex) {
    const double noise = guarded(q.nodes * q.r0, sigma2 * t, 0.5);
    const double mixing = p_min / (900.0 * q.L);
    const double drift = guarded(q.r0, t * q.L * (agg.pi1 * sigma2 + zeta2 * agg.pi2), 1.0 / 3.0);
    return std::min({noise, mixing, drift});
  }
  const double alpha = 2.0 * q.L * q.L * ((sigma2 + q.M1 * zeta2) * agg.pi1 + 6.0 * zeta2 * agg.pi2);
  const double kappa = std::sqrt((1.0 + q.M1) * (1.0 + q.M2)) / p_min;
  const double noise = guarded(q.nodes * q.f0, sigma2 * q.L * t, 0.5);
  const double drift = guarded(q.f0, t * alpha, 1.0 / 3.0);
  return std::min({noise, drift, 1.0 / (20.0 * q.L * kappa), 1.0 / (4.0 * q.L * (q.M1 + 1.0))});
}

}  // namespace budgetmix

#include "budgetmix/broadcast.hpp"

#include "budgetmix/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace budgetmix {

BroadcastCost BroadcastCost::homogeneous(int m, double comp, double tx) {
  BroadcastCost c{Vector::Constant(m, comp), Vector::Constant(m, tx)};
  c.check();
  return c;
}

void BroadcastCost::check() const {
  if (comp.size() != tx.size()) throw std::invalid_argument("comp and tx sizes differ");
  if (comp.size() > 0 && (comp.minCoeff() < 0.0 || tx.minCoeff() < 0.0))
    throw std::invalid_argument("broadcast costs must be non-negative");
}

ActivationProfile activation_probabilities(const BroadcastCost& c, double budget) {
  c.check();
  const double worst = c.comp.size() ? c.comp.maxCoeff() : 0.0;
  if (budget < worst)
    throw BudgetInfeasible("budget " + std::to_string(budget) + " below max computation cost " + std::to_string(worst));
  ActivationProfile a{Vector(c.size())};
  for (int i = 0; i < c.size(); ++i)
    a.omega(i) = c.tx(i) == 0.0 ? 1.0 : std::min((budget - c.comp(i)) / c.tx(i), 1.0);
  return a;
}

std::pair<double, double> broadcast_budget_window(const BroadcastCost& c) {
  c.check();
  return {c.comp.maxCoeff(), (c.comp + c.tx).maxCoeff()};
}

MixingMatrix sample_broadcast_matrix(const Topology& t, const ActivationProfile& a, Rng& rng) {
  if (a.size() != t.size()) throw std::invalid_argument("activation profile size must equal node count");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<char> active(static_cast<std::size_t>(t.size()));
  for (int i = 0; i < t.size(); ++i) active[static_cast<std::size_t>(i)] = unit(rng) < a.omega(i) ? 1 : 0;
  return metropolis_weights(t, active);
}

MixingDistribution broadcast_distribution(const Topology& t, const ActivationProfile& a) {
  if (a.size() != t.size()) throw std::invalid_argument("activation profile size must equal node count");
  return MixingDistribution::procedural(t.size(), [t, a](Rng& rng) { return sample_broadcast_matrix(t, a, rng); });
}

double m_perp(const ActivationProfile& a) {
  const int m = a.size();
  // pmf[k] = Pr[|U| = k], built one Bernoulli at a time.
  std::vector<double> pmf(static_cast<std::size_t>(m) + 1, 0.0);
  pmf[0] = 1.0;
  for (int i = 0; i < m; ++i) {
    const double w = a.omega(i);
    if (w < 0.0 || w > 1.0) throw std::invalid_argument("activation probability outside [0, 1]");
    for (int k = i + 1; k >= 1; --k)
      pmf[static_cast<std::size_t>(k)] = pmf[static_cast<std::size_t>(k)] * (1.0 - w) + pmf[static_cast<std::size_t>(k - 1)] * w;
    pmf[0] *= 1.0 - w;
  }
  double nonempty = 0, weighted = 0;
  for (int k = 1; k <= m; ++k) {
    nonempty += pmf[static_cast<std::size_t>(k)];
    weighted += pmf[static_cast<std::size_t>(k)] / k;
  }
  if (nonempty <= 0.0) throw UndefinedConditional("m_perp undefined: no node can activate");
  return weighted / nonempty;
}

double rho_asymptotic_clique(const ActivationProfile& a) {
  const double mp = m_perp(a);
  const Vector& w = a.omega;
  Matrix op = mp * w * w.transpose();
  op.diagonal().array() += 1.0 - w.array();
  op -= averaging_matrix(a.size());
  return spectral_norm(op);
}

double rho_homogeneous_clique(double comp, double tx, double budget) {
  if (!(tx > 0.0) || budget < comp || budget >= comp + tx)
    throw std::invalid_argument("need c^a <= D < c^a + c^b with c^b > 0");
  return 1.0 - (budget - comp) / tx;
}

}  // namespace budgetmix

#include "budgetmix/mixing.hpp"

#include "budgetmix/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace budgetmix {

std::string ValidationReport::describe() const {
  auto name = [](MixingViolation::Kind k) {
    switch (k) {
      case MixingViolation::Kind::Asymmetric: return "asymmetric";
      case MixingViolation::Kind::RowSum: return "row-sum";
      case MixingViolation::Kind::OffTopology: return "off-topology";
      case MixingViolation::Kind::OutOfUnitInterval: return "outside-[0,1]";
    }
    return "?";
  };
  std::ostringstream out;
  for (const auto& v : violations)
    out << "violation " << name(v.kind) << " at (" << v.row << "," << v.col << ") value " << v.value << "\n";
  for (const auto& v : warnings)
    out << "warning " << name(v.kind) << " at (" << v.row << "," << v.col << ") value " << v.value << "\n";
  return out.str();
}

ValidationReport validate_mixing(const MixingMatrix& w, const Topology& t) {
  const int m = t.size();
  if (w.rows() != m || w.cols() != m) throw std::invalid_argument("mixing matrix dimension does not match topology");
  ValidationReport report;
  using Kind = MixingViolation::Kind;
  for (int i = 0; i < m; ++i) {
    double row_sum = w.row(i).sum();
    if (std::abs(row_sum - 1.0) > kRowSumTolerance) report.violations.push_back({Kind::RowSum, i, -1, row_sum});
    for (int j = 0; j < m; ++j) {
      double x = w(i, j);
      if (j > i && std::abs(x - w(j, i)) > kSymmetryTolerance) report.violations.push_back({Kind::Asymmetric, i, j, x - w(j, i)});
      if (i != j && std::abs(x) > kNonzeroThreshold && !t.has_edge(i, j))
        report.violations.push_back({Kind::OffTopology, i, j, x});
      if (x < 0.0 || x > 1.0) report.warnings.push_back({Kind::OutOfUnitInterval, i, j, x});
    }
  }
  return report;
}

MixingMatrix metropolis_weights(const Topology& t, const std::vector<char>& active) {
  const int m = t.size();
  if (static_cast<int>(active.size()) != m) throw std::invalid_argument("active mask size must equal node count");
  // |V_i ∩ U| for active i; the closed neighborhood includes i itself.
  std::vector<int> local(static_cast<std::size_t>(m), 0);
  for (int i = 0; i < m; ++i) {
    if (!active[static_cast<std::size_t>(i)]) continue;
    int count = 1;
    for (int j : t.neighbors(i)) count += active[static_cast<std::size_t>(j)] ? 1 : 0;
    local[static_cast<std::size_t>(i)] = count;
  }
  MixingMatrix w = MixingMatrix::Identity(m, m);
  for (auto [i, j] : t.edges()) {
    if (!active[static_cast<std::size_t>(i)] || !active[static_cast<std::size_t>(j)]) continue;
    double weight = 1.0 / std::max(local[static_cast<std::size_t>(i)], local[static_cast<std::size_t>(j)]);
    w(i, j) = weight;
    w(j, i) = weight;
    w(i, i) -= weight;
    w(j, j) -= weight;
  }
  return w;
}

MixingMatrix metropolis_weights(const Topology& t, const std::vector<int>& active_nodes) {
  std::vector<char> mask(static_cast<std::size_t>(t.size()), 0);
  for (int i : active_nodes) {
    if (i < 0 || i >= t.size()) throw std::invalid_argument("active node out of range");
    mask[static_cast<std::size_t>(i)] = 1;
  }
  return metropolis_weights(t, mask);
}

MixingDistribution MixingDistribution::finite(std::vector<MixingMatrix> candidates, std::vector<double> probabilities) {
  if (candidates.empty()) throw std::invalid_argument("finite distribution needs at least one candidate");
  if (candidates.size() != probabilities.size()) throw std::invalid_argument("candidate/probability count mismatch");
  const auto m = candidates.front().rows();
  for (const auto& c : candidates)
    if (c.rows() != m || c.cols() != m) throw std::invalid_argument("candidates differ in dimension");
  double total = 0;
  for (double p : probabilities) {
    if (!(p >= 0.0)) throw std::invalid_argument("negative or NaN probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw std::invalid_argument("probabilities do not sum to 1");
  return MixingDistribution(Finite{std::move(candidates), std::move(probabilities)});
}

MixingDistribution MixingDistribution::point_mass(MixingMatrix w) {
  std::vector<MixingMatrix> c;
  c.push_back(std::move(w));
  return finite(std::move(c), {1.0});
}

MixingDistribution MixingDistribution::procedural(int dimension, Sampler sampler) {
  if (!sampler) throw std::invalid_argument("empty sampler");
  return MixingDistribution(Procedural{dimension, std::move(sampler)});
}

int MixingDistribution::dimension() const {
  if (const auto* f = std::get_if<Finite>(&support_)) return static_cast<int>(f->candidates.front().rows());
  return std::get<Procedural>(support_).dimension;
}

const MixingDistribution::Finite& MixingDistribution::finite_support() const {
  if (const auto* f = std::get_if<Finite>(&support_)) return *f;
  throw Unsupported("distribution has procedural support");
}

MixingMatrix MixingDistribution::sample(Rng& rng) const {
  if (const auto* f = std::get_if<Finite>(&support_)) {
    if (f->candidates.size() == 1) return f->candidates.front();
    std::discrete_distribution<std::size_t> pick(f->probabilities.begin(), f->probabilities.end());
    return f->candidates[pick(rng)];
  }
  return std::get<Procedural>(support_).sample(rng);
}

double rho_from_second_moment(const Matrix& second_moment) {
  Matrix op = (second_moment + second_moment.transpose()) / 2.0 - averaging_matrix(second_moment.rows());
  return spectral_norm(op);
}

double rho_exact(const MixingDistribution& d) {
  if (!d.is_finite()) throw Unsupported("rho_exact needs finite support; use rho_monte_carlo");
  const auto& f = d.finite_support();
  const auto m = f.candidates.front().rows();
  Matrix moment = Matrix::Zero(m, m);
  for (std::size_t h = 0; h < f.candidates.size(); ++h) {
    if (f.probabilities[h] == 0.0) continue;
    moment.noalias() += f.probabilities[h] * (f.candidates[h].transpose() * f.candidates[h]);
  }
  return rho_from_second_moment(moment);
}

RhoEstimate rho_monte_carlo(const MixingDistribution& d, std::size_t n, std::uint64_t seed) {
  if (n < 2) throw std::invalid_argument("rho_monte_carlo needs at least 2 samples");
  const auto m = d.dimension();
  const std::size_t batches = std::min<std::size_t>(10, n);
  Rng rng(seed);

  Matrix total = Matrix::Zero(m, m);
  std::vector<double> batch_rho;
  batch_rho.reserve(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t size = n / batches + (b < n % batches ? 1 : 0);
    Matrix acc = Matrix::Zero(m, m);
    for (std::size_t k = 0; k < size; ++k) {
      MixingMatrix w = d.sample(rng);
      acc.noalias() += w.transpose() * w;
    }
    total += acc;
    batch_rho.push_back(rho_from_second_moment(acc / static_cast<double>(size)));
  }

  RhoEstimate out;
  out.estimate = rho_from_second_moment(total / static_cast<double>(n));
  const double mean = std::accumulate(batch_rho.begin(), batch_rho.end(), 0.0) / static_cast<double>(batches);
  double ss = 0;
  for (double r : batch_rho) ss += (r - mean) * (r - mean);
  out.standard_error = batches > 1 ? std::sqrt(ss / static_cast<double>(batches - 1) / static_cast<double>(batches)) : 0.0;
  return out;
}

}  // namespace budgetmix

#include "budgetmix/simulator.hpp"

#include "budgetmix/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace budgetmix {

SyntheticProblem::SyntheticProblem(std::vector<Matrix> a, std::vector<Vector> b, double noise_sigma)
    : a_(std::move(a)), b_(std::move(b)), noise_(noise_sigma) {
  if (a_.empty() || a_.size() != b_.size()) throw std::invalid_argument("need one (A_i, b_i) pair per node");
  if (!(noise_ >= 0.0)) throw std::invalid_argument("noise must be >= 0");
  const Eigen::Index d = a_.front().cols();
  if (d < 1) throw std::invalid_argument("dimension must be >= 1");
  Matrix h = Matrix::Zero(d, d);
  Vector rhs = Vector::Zero(d);
  for (std::size_t i = 0; i < a_.size(); ++i) {
    if (a_[i].cols() != d || a_[i].rows() != b_[i].size()) throw std::invalid_argument("inconsistent problem shapes");
    h.noalias() += a_[i].transpose() * a_[i];
    rhs.noalias() += a_[i].transpose() * b_[i];
  }
  Eigen::LDLT<Matrix> ldlt(h);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.vectorD().minCoeff() <= 0.0)
    throw std::invalid_argument("sum of A_i^T A_i is singular");
  x_star_ = ldlt.solve(rhs);
  f_inf_ = loss(x_star_);
}

double SyntheticProblem::local_loss(int i, const Vector& x) const { return 0.5 * (a(i) * x - b(i)).squaredNorm(); }

double SyntheticProblem::loss(const Vector& x) const {
  double total = 0;
  for (int i = 0; i < nodes(); ++i) total += local_loss(i, x);
  return total / nodes();
}

Vector SyntheticProblem::exact_gradient(int i, const Vector& x) const { return a(i).transpose() * (a(i) * x - b(i)); }

Vector SyntheticProblem::full_gradient(const Vector& x) const {
  Vector g = Vector::Zero(dim());
  for (int i = 0; i < nodes(); ++i) g += exact_gradient(i, x);
  return g / nodes();
}

double SyntheticProblem::smoothness() const {
  double l = 0;
  for (const auto& ai : a_) l = std::max(l, sym_eigenvalues(Matrix(ai.transpose() * ai)).maxCoeff());
  return l;
}

SyntheticProblem make_quadratic_problem(int m, int dim, double hetero, double noise, Rng& rng) {
  if (m < 1 || dim < 1) throw std::invalid_argument("m and dim must be >= 1");
  if (!(hetero >= 0.0) || !(noise >= 0.0)) throw std::invalid_argument("hetero and noise must be >= 0");
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> spectrum(1.0, std::sqrt(10.0));
  auto gaussian_vector = [&](int n) {
    Vector v(n);
    for (int k = 0; k < n; ++k) v(k) = gauss(rng);
    return v;
  };
  const Vector x_common = gaussian_vector(dim);
  std::vector<Matrix> a;
  std::vector<Vector> b;
  for (int i = 0; i < m; ++i) {
    Matrix g(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) g(r, c) = gauss(rng);
    const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
    Vector s(dim);
    for (int k = 0; k < dim; ++k) s(k) = spectrum(rng);
    Matrix ai = q * s.asDiagonal() * q.transpose();
    ai = (ai + ai.transpose()) / 2.0;
    b.push_back(ai * x_common + hetero * gaussian_vector(dim));
    a.push_back(std::move(ai));
  }
  return SyntheticProblem(std::move(a), std::move(b), noise);
}

Vector local_gradient(const SyntheticProblem& p, int i, const Vector& x, Rng& rng) {
  if (x.size() != p.dim()) throw std::invalid_argument("parameter dimension mismatch");
  Vector g = p.exact_gradient(i, x);
  if (p.noise_sigma() > 0.0) {
    std::normal_distribution<double> gauss(0.0, p.noise_sigma());
    for (Eigen::Index k = 0; k < g.size(); ++k) g(k) += gauss(rng);
  }
  return g;
}

SimState dpsgd_step(const SimState& s, const MixingMatrix& w, double eta, const SyntheticProblem& p, Rng& rng) {
  const int m = p.nodes();
  if (s.x.rows() != m || s.x.cols() != p.dim() || w.rows() != m || w.cols() != m)
    throw std::invalid_argument("dpsgd_step dimension mismatch");
  if (!(eta >= 0.0)) throw std::invalid_argument("learning rate must be >= 0");
  Matrix y = s.x;
  for (int i = 0; i < m; ++i) y.row(i) -= eta * local_gradient(p, i, s.x.row(i).transpose(), rng).transpose();
  return {w * y, s.t + 1};
}

double consensus_distance(const Matrix& x) {
  if (x.rows() == 0) return 0.0;
  const Eigen::RowVectorXd mean = x.colwise().mean();
  return (x.rowwise() - mean).squaredNorm() / static_cast<double>(x.rows());
}

EnergyLedger energy_step(const EnergyLedger& l, const MixingMatrix& w, const CostModel& c, const Topology& t) {
  if (l.mode != cost_mode(c)) throw std::invalid_argument("ledger mode does not match the cost model");
  const int m = t.size();
  if (l.energy.size() != m || w.rows() != m || w.cols() != m) throw std::invalid_argument("energy_step dimension mismatch");
  EnergyLedger out = l;
  if (const auto* bc = std::get_if<BroadcastCost>(&c)) {
    if (bc->size() != m) throw std::invalid_argument("cost model size mismatch");
    for (int i = 0; i < m; ++i) {
      const auto& nb = t.neighbors(i);
      const bool sends = std::any_of(nb.begin(), nb.end(), [&](int j) { return std::abs(w(i, j)) > kNonzeroThreshold; });
      out.energy(i) += bc->comp(i) + (sends ? bc->tx(i) : 0.0);
    }
  } else {
    const auto& uc = std::get<UnicastCost>(c);
    if (uc.size() != m) throw std::invalid_argument("cost model size mismatch");
    for (int i = 0; i < m; ++i) {
      double links = 0;
      for (int j : t.neighbors(i))
        if (std::abs(w(i, j)) > kNonzeroThreshold) links += uc.link(i, j);
      out.energy(i) += uc.comp(i) + links;
    }
  }
  return out;
}

double max_per_node_energy(const EnergyLedger& l) { return l.energy.size() ? std::max(0.0, l.energy.maxCoeff()) : 0.0; }

std::optional<std::size_t> SimTrace::first_below(double gap, double f_inf) const {
  for (std::size_t k = 0; k < loss.size(); ++k)
    if (loss[k] - f_inf <= gap) return k;
  return std::nullopt;
}

SimTrace run_simulation(const SyntheticProblem& p, const std::vector<SimPhase>& schedule, double eta,
                        std::int64_t iterations, const CostModel& c, const Topology& t, Rng& rng,
                        const SimOptions& options) {
  if (schedule.empty()) throw std::invalid_argument("empty phase schedule");
  if (iterations < 0) throw std::invalid_argument("negative iteration count");
  if (t.size() != p.nodes()) throw std::invalid_argument("topology and problem sizes differ");
  for (const auto& ph : schedule)
    if (ph.distribution.dimension() != p.nodes()) throw std::invalid_argument("phase distribution has wrong dimension");

  SimState state{options.initial.value_or(Matrix::Zero(p.nodes(), p.dim())), 0};
  if (state.x.rows() != p.nodes() || state.x.cols() != p.dim()) throw std::invalid_argument("initial state has wrong shape");
  EnergyLedger ledger = EnergyLedger::empty(cost_mode(c), p.nodes());

  SimTrace trace;
  auto record = [&] {
    trace.iteration.push_back(state.t);
    trace.loss.push_back(p.loss(mean_parameters(state.x)));
    trace.consensus.push_back(consensus_distance(state.x));
    trace.energy.push_back(ledger.energy);
  };
  record();

  std::size_t phase = 0;
  std::int64_t phase_end = schedule.size() > 1 ? schedule[0].duration : iterations;
  for (std::int64_t it = 0; it < iterations; ++it) {
    if (options.stop_gap && trace.loss.back() - p.f_inf() <= *options.stop_gap) break;
    while (phase + 1 < schedule.size() && it >= phase_end) {
      ++phase;
      phase_end = phase + 1 < schedule.size() ? phase_end + schedule[phase].duration : iterations;
    }
    const MixingMatrix w = schedule[phase].distribution.sample(rng);
    state = dpsgd_step(state, w, eta, p, rng);
    ledger = energy_step(ledger, w, c, t);
    record();
  }
  return trace;
}

ConvergenceParams derive_convergence_params(const SyntheticProblem& p, const Matrix& x0, double epsilon, bool convex) {
  const int m = p.nodes();
  ConvergenceParams q;
  q.L = p.smoothness();
  q.sigma_hat = p.noise_sigma() * std::sqrt(static_cast<double>(p.dim()));
  q.M1 = 0.0;
  Matrix h_mean = Matrix::Zero(p.dim(), p.dim());
  std::vector<Matrix> h(static_cast<std::size_t>(m));
  double spread = 0;
  for (int i = 0; i < m; ++i) {
    h[static_cast<std::size_t>(i)] = p.a(i).transpose() * p.a(i);
    h_mean += h[static_cast<std::size_t>(i)] / m;
    spread += p.exact_gradient(i, p.x_star()).squaredNorm() / m;
  }
  double curvature_spread = 0;
  for (const auto& hi : h) curvature_spread += std::pow(spectral_norm(Matrix(hi - h_mean)), 2) / m;
  const double mu = sym_eigenvalues(h_mean).minCoeff();
  q.zeta_hat = std::sqrt(2.0 * spread);
  q.M2 = 2.0 * curvature_spread / (mu * mu);
  q.epsilon = epsilon;
  const Vector xbar = mean_parameters(x0);
  q.f0 = p.loss(xbar) - p.f_inf();
  q.r0 = (xbar - p.x_star()).squaredNorm();
  q.xi0 = consensus_distance(x0);
  q.nodes = m;
  q.convex = convex;
  return q;
}

}  // namespace budgetmix

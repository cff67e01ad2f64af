#include "budgetmix/broadcast.hpp"
#include "budgetmix/planner.hpp"
#include "budgetmix/simulator.hpp"
#include "budgetmix/spectral.hpp"

#include <doctest.h>

#include <cmath>

using namespace budgetmix;

namespace {

SyntheticProblem scalar_problem(double b0, double b1, double noise = 0.0) {
  std::vector<Matrix> a(2, Matrix::Ones(1, 1));
  std::vector<Vector> b{Vector::Constant(1, b0), Vector::Constant(1, b1)};
  return SyntheticProblem(a, b, noise);
}

Matrix rows(std::initializer_list<double> values) {
  Matrix x(static_cast<Eigen::Index>(values.size()), 1);
  Eigen::Index k = 0;
  for (double v : values) x(k++, 0) = v;
  return x;
}

}  // namespace

TEST_SUITE("simulator") {
  TEST_CASE("explicit two-node problem") {
    const auto p = scalar_problem(0.0, 2.0);
    CHECK(p.x_star()(0) == doctest::Approx(1.0));
    // F = (1/m) Σ ½(x − b_i)² = ½ at x = 1.
    CHECK(p.f_inf() == doctest::Approx(0.5));
    CHECK(p.full_gradient(p.x_star()).norm() < 1e-12);
  }

  TEST_CASE("random quadratic problems") {
    Rng rng(1);
    const auto p = make_quadratic_problem(6, 5, 1.0, 0.0, rng);
    CHECK(p.full_gradient(p.x_star()).norm() <= 1e-8);
    for (int i = 0; i < 6; ++i) {
      const auto ev = sym_eigenvalues(Matrix(p.a(i).transpose() * p.a(i)));
      CHECK(ev.maxCoeff() / ev.minCoeff() <= 10.0 + 1e-9);
    }
    Rng rng2(2);
    const auto same = make_quadratic_problem(4, 3, 0.0, 0.0, rng2);
    for (int i = 0; i < 4; ++i) CHECK(same.exact_gradient(i, same.x_star()).norm() < 1e-9);
    CHECK_THROWS_AS(make_quadratic_problem(0, 3, 0.0, 0.0, rng2), std::invalid_argument);
  }

  TEST_CASE("local gradients") {
    Rng rng(3);
    const auto p = scalar_problem(0.0, 2.0);
    CHECK(local_gradient(p, 1, Vector::Constant(1, 2.0), rng).norm() == 0.0);
    const Vector g1 = local_gradient(p, 0, Vector::Constant(1, 1.0), rng);
    const Vector g2 = local_gradient(p, 0, Vector::Constant(1, 3.0), rng);
    CHECK(g2(0) == doctest::Approx(3 * g1(0)));

    const auto noisy = scalar_problem(0.0, 2.0, 0.7);
    const int n = 100000;
    double sum = 0;
    for (int k = 0; k < n; ++k) sum += local_gradient(noisy, 0, Vector::Constant(1, 1.0), rng)(0);
    CHECK(std::abs(sum / n - 1.0) <= 3 * 0.7 / std::sqrt(double(n)));
  }

  TEST_CASE("D-PSGD step") {
    Rng rng(4);
    const auto p = scalar_problem(0.0, 0.0);
    SimState s{rows({0.0, 2.0}), 0};
    const auto same = dpsgd_step(s, Matrix::Identity(2, 2), 0.0, p, rng);
    CHECK(same.x == s.x);
    CHECK(same.t == 1);
    const auto mixed = dpsgd_step(s, averaging_matrix(2), 0.5, p, rng);
    CHECK(mixed.x(0, 0) == doctest::Approx(0.5));
    CHECK(mixed.x(1, 0) == doctest::Approx(0.5));
    // Local minimizers with zero average gradient: exact averaging.
    const auto q = scalar_problem(0.0, 2.0);
    const auto avg = dpsgd_step(SimState{rows({0.0, 2.0}), 0}, averaging_matrix(2), 0.3, q, rng);
    CHECK(avg.x(0, 0) == doctest::Approx(1.0));
    CHECK(avg.x(1, 0) == doctest::Approx(1.0));
  }

  TEST_CASE("mixing preserves the mean") {
    Rng rng(5);
    const auto p = scalar_problem(0.0, 0.0);
    const auto t = make_clique(2);
    for (int k = 0; k < 20; ++k) {
      const Matrix x = rows({-1.0 + k, 3.0});
      const auto w = sample_broadcast_matrix(t, {Vector::Constant(2, 0.6)}, rng);
      const auto next = dpsgd_step(SimState{x, 0}, w, 0.0, p, rng);
      CHECK(next.x.mean() == doctest::Approx(x.mean()).epsilon(1e-15));
    }
  }

  TEST_CASE("consensus distance") {
    CHECK(consensus_distance(Matrix::Constant(4, 3, 2.5)) == doctest::Approx(0.0));
    CHECK(consensus_distance(rows({0.0, 2.0})) == doctest::Approx(1.0));
    CHECK(consensus_distance(2.0 * rows({0.3, -1.0, 4.0})) == doctest::Approx(4.0 * consensus_distance(rows({0.3, -1.0, 4.0}))));
  }

  TEST_CASE("energy ledger") {
    const auto t = make_clique(3);
    const CostModel bc = BroadcastCost{Vector::Constant(3, 0.1), Vector::Constant(3, 0.5)};
    auto l = EnergyLedger::empty(CostMode::Broadcast, 3);
    l = energy_step(l, Matrix::Identity(3, 3), bc, t);
    CHECK(l.energy.isApprox(Vector::Constant(3, 0.1)));
    l = energy_step(EnergyLedger::empty(CostMode::Broadcast, 3), averaging_matrix(3), bc, t);
    CHECK(l.energy(0) == doctest::Approx(0.6));

    UnicastCost uc = UnicastCost::homogeneous(t, 0.1, 0.0);
    uc.link(0, 1) = uc.link(1, 0) = 0.2;
    uc.link(0, 2) = uc.link(2, 0) = 0.3;
    const auto u = energy_step(EnergyLedger::empty(CostMode::Unicast, 3), averaging_matrix(3), CostModel(uc), t);
    CHECK(u.energy(0) == doctest::Approx(0.6));
    CHECK(u.energy(1) == doctest::Approx(0.3));
    CHECK_THROWS_AS(energy_step(EnergyLedger::empty(CostMode::Unicast, 3), averaging_matrix(3), bc, t), std::invalid_argument);
  }

  TEST_CASE("max per-node energy") {
    CHECK(max_per_node_energy(EnergyLedger{CostMode::Broadcast, Vector::Constant(4, 2.0)}) == 2.0);
    Vector v = Vector::Constant(4, 1.0);
    v(2) = 3.0;
    CHECK(max_per_node_energy(EnergyLedger{CostMode::Broadcast, v}) == 3.0);
    CHECK(max_per_node_energy(EnergyLedger::empty(CostMode::Broadcast, 0)) == 0.0);
  }

  TEST_CASE("run: empty, exact averaging and isolated nodes") {
    Rng rng(6);
    const auto t = make_clique(5);
    const CostModel c = BroadcastCost::homogeneous(5, 0.1, 0.5);
    const auto p = make_quadratic_problem(5, 3, 1.0, 0.0, rng);
    Rng r0(1);
    const auto empty = run_simulation(p, {{MixingDistribution::point_mass(averaging_matrix(5)), 0}}, 0.05, 0, c, t, r0);
    CHECK(empty.size() == 1);
    CHECK(empty.energy[0].isZero());

    const auto j = run_simulation(p, {{MixingDistribution::point_mass(averaging_matrix(5)), 0}}, 0.05, 50, c, t, r0);
    CHECK(j.size() == 51);
    for (std::size_t k = 1; k < j.size(); ++k) CHECK(j.consensus[k] < 1e-20);
    for (std::size_t k = 1; k < j.size(); ++k)
      CHECK((j.energy[k] - j.energy[k - 1]).minCoeff() >= 0.1 - 1e-12);

    const auto id = run_simulation(p, {{MixingDistribution::point_mass(Matrix::Identity(5, 5)), 0}}, 0.05, 3000, c, t, r0);
    CHECK(id.loss.back() - p.f_inf() > 1e-3);
    CHECK(std::abs(id.loss.back() - id.loss[id.size() - 2]) < 1e-9);
  }

  TEST_CASE("determinism") {
    Rng pr(7);
    const auto p = make_quadratic_problem(6, 4, 1.0, 0.2, pr);
    const auto t = make_clique(6);
    const CostModel c = BroadcastCost::homogeneous(6, 0.1, 0.5);
    const std::vector<SimPhase> sched{{broadcast_distribution(t, {Vector::Constant(6, 0.3)}), 20},
                                      {broadcast_distribution(t, {Vector::Constant(6, 0.9)}), 0}};
    Rng a(99), b(99);
    const auto x = run_simulation(p, sched, 0.05, 100, c, t, a);
    const auto y = run_simulation(p, sched, 0.05, 100, c, t, b);
    CHECK(x.loss == y.loss);
    CHECK(x.consensus == y.consensus);
    for (std::size_t k = 0; k < x.size(); ++k) CHECK(x.energy[k] == y.energy[k]);
  }

  TEST_CASE("prescribed rate reaches the target within the bound") {
    Rng pr(8);
    const int m = 4;
    const auto p = make_quadratic_problem(m, 2, 0.0, 0.0, pr);
    const auto t = make_clique(m);
    const CostModel c = BroadcastCost::homogeneous(m, 0.1, 0.5);
    Matrix x0 = Matrix::Zero(m, 2);
    const auto q = derive_convergence_params(p, x0, 0.05);
    CHECK(q.zeta_hat < 1e-6);
    CHECK(q.sigma_hat == 0.0);
    const auto horizon = t2_min_iterations(PSchedule::constant(1.0), q);
    REQUIRE(horizon.has_value());
    const double eta = prescribed_learning_rate(q, *horizon, PSchedule::constant(1.0));
    Rng r(1);
    SimOptions opts;
    opts.stop_gap = q.epsilon;
    const auto trace = run_simulation(p, {{MixingDistribution::point_mass(averaging_matrix(m)), 0}}, eta, *horizon, c, t, r, opts);
    const auto hit = trace.first_below(q.epsilon, p.f_inf());
    REQUIRE(hit.has_value());
    CHECK(static_cast<std::int64_t>(*hit) <= *horizon);
  }

  TEST_CASE("mean max energy stays under the i.i.d. bound") {
    const int m = 10;
    const auto t = make_clique(m);
    const BroadcastCost bc{Vector::Constant(m, 0.1), Vector::LinSpaced(m, 0.5, 1.5)};
    const double budget = 0.6;
    const auto a = activation_probabilities(bc, budget);
    double total = 0;
    const int runs = 100, iters = 200;
    for (int r = 0; r < runs; ++r) {
      Rng rng = split_stream(3, static_cast<std::uint64_t>(r));
      auto l = EnergyLedger::empty(CostMode::Broadcast, m);
      for (int k = 0; k < iters; ++k) l = energy_step(l, sample_broadcast_matrix(t, a, rng), CostModel(bc), t);
      total += max_per_node_energy(l);
    }
    CHECK(total / runs <= q_bound(iters, budget, m) * 1.01);
  }
}

#include "budgetmix/broadcast.hpp"
#include "budgetmix/spectral.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace budgetmix;

TEST_SUITE("broadcast") {
  TEST_CASE("activation probabilities") {
    const auto tx2 = BroadcastCost::homogeneous(3, 0.086, 0.533);
    CHECK(activation_probabilities(tx2, 0.3525).omega(0) == doctest::Approx(0.5));
    CHECK(activation_probabilities(tx2, 0.086).omega(1) == 0.0);
    CHECK(activation_probabilities(tx2, 0.7).omega(2) == 1.0);
    CHECK_THROWS_AS(activation_probabilities(tx2, 0.05), BudgetInfeasible);
    BroadcastCost free{Vector::Constant(2, 0.1), Vector::Zero(2)};
    CHECK(activation_probabilities(free, 0.1).omega(0) == 1.0);
    CHECK_THROWS_AS(BroadcastCost::homogeneous(2, 0.1, -1.0), std::invalid_argument);
  }

  TEST_CASE("sampler edge cases") {
    Rng rng(1);
    const auto t = make_clique(5);
    for (int k = 0; k < 10; ++k) {
      CHECK(sample_broadcast_matrix(t, {Vector::Zero(5)}, rng) == Matrix::Identity(5, 5));
      CHECK((sample_broadcast_matrix(t, {Vector::Ones(5)}, rng) - averaging_matrix(5)).cwiseAbs().maxCoeff() < 1e-15);
    }
  }

  TEST_CASE("two-node outcomes") {
    Rng rng(2);
    const auto t = make_clique(2);
    int identity = 0, averaging = 0;
    const int n = 20000;
    for (int k = 0; k < n; ++k) {
      const auto w = sample_broadcast_matrix(t, {Vector::Constant(2, 0.5)}, rng);
      if (w == Matrix::Identity(2, 2))
        ++identity;
      else if ((w - averaging_matrix(2)).cwiseAbs().maxCoeff() < 1e-15)
        ++averaging;
    }
    CHECK(identity + averaging == n);
    CHECK(std::abs(identity / double(n) - 0.75) < 0.02);
  }

  TEST_CASE("m_perp") {
    CHECK(m_perp({Vector::Constant(2, 0.5)}) == doctest::Approx(5.0 / 6.0));
    CHECK(m_perp({Vector::Ones(7)}) == doctest::Approx(1.0 / 7.0));
    Vector one = Vector::Zero(4);
    one(2) = 1.0;
    CHECK(m_perp({one}) == doctest::Approx(1.0));
    CHECK_THROWS_AS(m_perp({Vector::Zero(3)}), UndefinedConditional);
  }

  TEST_CASE("m_perp against subset enumeration") {
    Rng rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
      const int m = 1 + trial % 8;
      Vector w(m);
      for (int i = 0; i < m; ++i) w(i) = u(rng);
      double nonempty = 0, weighted = 0;
      for (unsigned mask = 1; mask < (1u << m); ++mask) {
        double pr = 1;
        int size = 0;
        for (int i = 0; i < m; ++i) {
          const bool in = (mask >> i) & 1u;
          pr *= in ? w(i) : 1 - w(i);
          size += in;
        }
        nonempty += pr;
        weighted += pr / size;
      }
      CHECK(m_perp({w}) == doctest::Approx(weighted / nonempty).epsilon(1e-12));
    }
  }

  TEST_CASE("asymptotic clique divergence") {
    CHECK(rho_asymptotic_clique({Vector::Ones(9)}) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(std::abs(rho_asymptotic_clique({Vector::Constant(200, 0.5)}) - 0.5) <= 0.02);
    CHECK_THROWS_AS(rho_asymptotic_clique({Vector::Zero(4)}), UndefinedConditional);
  }

  TEST_CASE("homogeneous closed form") {
    CHECK(rho_homogeneous_clique(1, 2, 2) == doctest::Approx(0.5));
    CHECK(rho_homogeneous_clique(1, 2, 1) == doctest::Approx(1.0));
    CHECK(rho_homogeneous_clique(1, 2, 2.999999) == doctest::Approx(0.0).epsilon(1e-5));
    CHECK_THROWS_AS(rho_homogeneous_clique(1, 2, 3), std::invalid_argument);
    CHECK_THROWS_AS(rho_homogeneous_clique(1, 2, 0.5), std::invalid_argument);
  }

  TEST_CASE("window") {
    const auto [lo, hi] = broadcast_budget_window(BroadcastCost{Vector::Constant(2, 0.086), Vector::LinSpaced(2, 0.533, 1.333)});
    CHECK(lo == doctest::Approx(0.086));
    CHECK(hi == doctest::Approx(1.419));
  }

  TEST_CASE("sampled matrices are feasible and activation stays within omega") {
    Rng rng(4);
    const auto t = random_connected_graph(12, 25, rng);
    BroadcastCost c{Vector::Constant(12, 0.1), Vector::LinSpaced(12, 0.2, 1.0)};
    const double budget = 0.5;
    const auto a = activation_probabilities(c, budget);
    const int n = 4000;
    Vector spend = Vector::Zero(12), spend_sq = Vector::Zero(12);
    for (int k = 0; k < n; ++k) {
      const auto w = sample_broadcast_matrix(t, a, rng);
      REQUIRE(validate_mixing(w, t).valid());
      for (int i = 0; i < 12; ++i) {
        bool sends = false;
        for (int j : t.neighbors(i)) sends = sends || std::abs(w(i, j)) > kNonzeroThreshold;
        const double e = c.comp(i) + (sends ? c.tx(i) : 0.0);
        spend(i) += e;
        spend_sq(i) += e * e;
      }
    }
    for (int i = 0; i < 12; ++i) {
      const double mean = spend(i) / n;
      const double se = std::sqrt(std::max(0.0, spend_sq(i) / n - mean * mean) / n);
      CHECK(mean <= budget + 3 * se + 1e-12);
    }
  }

  TEST_CASE("Monte Carlo agrees with enumeration on small graphs") {
    Rng rng(6);
    for (const auto& t : {make_clique(3), make_path(4), make_clique(4)}) {
      Vector w(t.size());
      std::uniform_real_distribution<double> u(0.1, 0.9);
      for (int i = 0; i < t.size(); ++i) w(i) = u(rng);
      const double exact = oracle::broadcast_rho_enumerated(t, w);
      const auto est = rho_monte_carlo(broadcast_distribution(t, {w}), 20000, 8);
      CHECK(std::abs(est.estimate - exact) <= 3 * est.standard_error + 1e-12);
    }
  }

  TEST_CASE("clique Monte Carlo matches the homogeneous law") {
    for (double omega : {0.25, 0.5, 0.75}) {
      const auto est = rho_monte_carlo(broadcast_distribution(make_clique(50), {Vector::Constant(50, omega)}), 2000, 3);
      CHECK(std::abs(est.estimate - (1 - omega)) <= 0.05);
    }
  }
}

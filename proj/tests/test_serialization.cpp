#include "budgetmix/serialization.hpp"
#include "budgetmix/spectral.hpp"

#include <doctest.h>

#include <sstream>

using namespace budgetmix;

namespace {

/// Minimal RFC 4180 reader: quoted fields, doubled quotes, CRLF records.
std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> out(1);
  std::string field;
  bool quoted = false;
  for (std::size_t k = 0; k < text.size(); ++k) {
    const char ch = text[k];
    if (quoted) {
      if (ch == '"' && k + 1 < text.size() && text[k + 1] == '"') {
        field += '"';
        ++k;
      } else if (ch == '"') {
        quoted = false;
      } else {
        field += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.back().push_back(field);
      field.clear();
    } else if (ch == '\r' && k + 1 < text.size() && text[k + 1] == '\n') {
      out.back().push_back(field);
      field.clear();
      out.emplace_back();
      ++k;
    } else {
      REQUIRE_MESSAGE(ch != '\n', "bare LF in CSV");
      field += ch;
    }
  }
  REQUIRE_FALSE(quoted);
  if (out.back().empty() && field.empty()) out.pop_back();
  return out;
}

}  // namespace

TEST_SUITE("serialization") {
  TEST_CASE("matrix round trip") {
    Matrix w = averaging_matrix(3);
    w(0, 1) = 0.1 + 0.2;
    const auto j = matrix_to_json(w);
    CHECK(j.at("m") == 3);
    CHECK(matrix_from_json(Json::parse(j.dump())) == w);
    CHECK_THROWS_AS(matrix_from_json(Json{{"m", 2}, {"entries", {{1, 0}}}}), ParseError);
  }

  TEST_CASE("distribution round trip") {
    const auto d = MixingDistribution::finite({Matrix::Identity(2, 2), averaging_matrix(2)}, {0.75, 0.25});
    const auto back = distribution_from_json(Json::parse(distribution_to_json(d).dump()));
    CHECK(rho_exact(back) == doctest::Approx(0.75));
    CHECK(back.finite_support().probabilities == d.finite_support().probabilities);
  }

  TEST_CASE("plan round trip") {
    PhasePlan plan{2, {{0.3, 120, 0.25}, {1.1, 3000, 0.875}}, 3120, 4567.25};
    const auto back = plan_from_json(Json::parse(plan_to_json(plan).dump()));
    CHECK(back.K == 2);
    CHECK(back.horizon == 3120);
    CHECK(back.objective == plan.objective);
    for (std::size_t s = 0; s < 2; ++s) {
      CHECK(back.phases[s].budget == plan.phases[s].budget);
      CHECK(back.phases[s].duration == plan.phases[s].duration);
      CHECK(back.phases[s].p == plan.phases[s].p);
    }
    plan.objective = INFINITY;
    CHECK(plan_to_json(plan).at("objective").is_null());
    CHECK(std::isinf(plan_from_json(plan_to_json(plan)).objective));
  }

  TEST_CASE("profile round trip") {
    RhoProfile p{{0.1, 0.2}, {0.9, 0.4}, RhoProfile::Source::Analytic};
    const auto back = profile_from_json(profile_to_json(p));
    CHECK(back.budgets == p.budgets);
    CHECK(back.rho_upper == p.rho_upper);
    CHECK(back.source == RhoProfile::Source::Analytic);
    CHECK_THROWS_AS(profile_from_json(Json{{"budgets", {1, 2}}, {"rho_upper", {0.1, 0.5}}}), ParseError);
  }

  TEST_CASE("trace CSV") {
    SimTrace t;
    for (int k = 0; k < 3; ++k) {
      t.iteration.push_back(k);
      t.loss.push_back(1.0 / (k + 1));
      t.consensus.push_back(0.1 * k);
      t.energy.push_back(Vector::Constant(2, 0.5 * k));
    }
    std::ostringstream out;
    write_trace_csv(out, t);
    const auto rows = parse_csv(out.str());
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == std::vector<std::string>{"iteration", "loss", "consensus", "energy_node_0", "energy_node_1"});
    for (const auto& r : rows) CHECK(r.size() == 5);
    CHECK(std::stod(rows[3][1]) == t.loss[2]);
    CHECK(std::stod(rows[2][4]) == 0.5);
  }

  TEST_CASE("numbers round trip") {
    for (double x : {0.1, 1.0 / 3.0, 1e-300, 123456789.125}) CHECK(std::stod(format_number(x)) == x);
  }
}

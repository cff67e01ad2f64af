#include "budgetmix/experiment.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace budgetmix;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({"topology": {"clique": 6}, "costs": {"comp": 0.1, "tx": 0.5}})";

const char* kSmall = R"({
  "seed": 3,
  "topology": {"clique": 6},
  "costs": {"mode": "broadcast", "comp": 0.1, "tx": 0.5},
  "convergence": {"epsilon": 0.5},
  "planner": {"max_phases": 2, "budget_count": 6, "duration_count": 5},
  "simulation": {"dim": 3, "runs": 2, "eta": 0.05, "max_iterations": 400, "target_gap": 0.05, "baseline": true}
})";

std::vector<std::string> violations_of(const std::string& text) {
  try {
    parse_experiment_config(text);
  } catch (const ConfigError& e) {
    return e.violations;
  }
  return {};
}

bool mentions(const std::vector<std::string>& v, const std::string& needle) {
  for (const auto& s : v)
    if (s.find(needle) != std::string::npos) return true;
  return false;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("budgetmix_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("minimal config is valid") {
    const auto cfg = parse_experiment_config(kMinimal);
    CHECK(cfg.topology.kind == TopologySource::Kind::Clique);
    CHECK(cfg.topology.nodes == 6);
    CHECK(cfg.costs.mode == CostMode::Broadcast);
    CHECK(cfg.planner.max_phases == 2);
  }

  TEST_CASE("violations are enumerated, not fail-fast") {
    const auto v = violations_of(R"({
      "topology": {"clique": 0},
      "costs": {"comp": 0.1, "tx": -1, "colour": 2},
      "planner": {"max_phases": 5},
      "extra": true
    })");
    CHECK(v.size() >= 5);
    CHECK(mentions(v, "costs.tx: tx must be ≥ 0"));
    CHECK(mentions(v, "costs.colour: unknown field"));
    CHECK(mentions(v, "extra: unknown field"));
    CHECK(mentions(v, "topology.clique"));
    CHECK(mentions(v, "planner.max_phases"));
  }

  TEST_CASE("structural problems") {
    CHECK(mentions(violations_of("{"), "malformed JSON"));
    CHECK(mentions(violations_of(R"({"costs": {"comp": 1, "tx": 1}})"), "topology"));
    CHECK(mentions(violations_of(R"({"topology": {"file": "/no/such/file.txt"}, "costs": {"comp": 1, "tx": 1}})"),
                   "file not found"));
    CHECK(mentions(violations_of(R"({"topology": {"clique": 3}, "costs": {"comp": [1, "x"], "tx": 1}})"), "costs.comp[1]"));
  }

  TEST_CASE("cost tables must match the topology") {
    const auto cfg = parse_experiment_config(R"({"topology": {"clique": 3}, "costs": {"comp": [0.1, 0.2], "tx": 1}})");
    CHECK_THROWS_AS(build_cost_model(cfg, build_topology(cfg)), ConfigError);
    const auto uc = parse_experiment_config(
        R"({"mode": "unicast", "topology": {"clique": 3}, "costs": {"comp": 0.1, "link": 0.2}})");
    const auto c = build_cost_model(uc, build_topology(uc));
    CHECK(std::get<UnicastCost>(c).link(0, 2) == doctest::Approx(0.2));
  }

  TEST_CASE("full pipeline writes every artifact and is deterministic") {
    const auto cfg = parse_experiment_config(kSmall);
    const auto out1 = scratch("run1"), out2 = scratch("run2");
    const auto r1 = run_experiment(cfg, out1.string());
    CHECK(r1.exit_code == kExitOk);
    CHECK(r1.summary.at("error").is_null());
    for (const char* f : {"profile.json", "plan.json", "summary.json", "trace_run0.csv", "trace_run1.csv", "baseline_run0.csv"})
      CHECK_MESSAGE(fs::exists(out1 / f), f);
    const auto r2 = run_experiment(cfg, out2.string());
    CHECK(r1.summary == r2.summary);
    CHECK(slurp(out1 / "trace_run1.csv") == slurp(out2 / "trace_run1.csv"));
  }

  TEST_CASE("plan written then reloaded gives the same schedule") {
    const auto cfg = parse_experiment_config(kSmall);
    const auto out = scratch("roundtrip");
    run_experiment(cfg, out.string());
    const auto plan = plan_from_json(read_json_file((out / "plan.json").string()));
    const auto again = scratch("roundtrip_sim");
    fs::create_directories(again);
    const auto sim = simulate_plan(cfg, plan, again.string());
    CHECK(slurp(out / "trace_run0.csv") == slurp(again / "trace_run0.csv"));
    CHECK(sim.at("plan") == plan_to_json(plan));
  }

  TEST_CASE("infeasible budgets are reported at the design stage") {
    const auto cfg = parse_experiment_config(
        R"({"topology": {"clique": 4}, "costs": {"comp": 0.5, "tx": 1}, "planner": {"budgets": [0.2, 0.8]}})");
    const auto r = run_experiment(cfg, scratch("infeasible").string());
    CHECK(r.exit_code == kExitInfeasible);
    CHECK(r.summary.at("error").at("stage") == "design");
    CHECK(r.summary.at("error").at("kind") == "budget-infeasible");
  }

  TEST_CASE("topology from file") {
    const auto dir = scratch("file");
    fs::create_directories(dir);
    std::ofstream(dir / "ring.txt") << "m 4\n0 1\n1 2\n2 3\n3 0\n";
    std::ofstream(dir / "cfg.json") << R"({"topology": {"file": "ring.txt"}, "costs": {"comp": 0.1, "tx": 0.4}})";
    const auto cfg = load_experiment_config((dir / "cfg.json").string());
    CHECK(build_topology(cfg).edge_count() == 4);
  }
}

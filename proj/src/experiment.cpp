#include "budgetmix/experiment.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

namespace budgetmix {

namespace fs = std::filesystem;

ConfigError::ConfigError(std::vector<std::string> v)
    : std::runtime_error([&] {
        std::string msg = "invalid configuration:";
        for (const auto& s : v) msg += "\n  " + s;
        return msg;
      }()),
      violations(std::move(v)) {}

namespace {

/// Collects violations while reading a JSON document.
class Reader {
 public:
  std::vector<std::string> errors;

  void fail(const std::string& path, const std::string& what) { errors.push_back(path + ": " + what); }

  void allow_only(const Json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = obj.begin(); it != obj.end(); ++it)
      if (!allowed.count(it.key())) fail(join(path, it.key()), "unknown field");
  }

  static std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

  std::optional<double> number(const Json& obj, const std::string& path, const char* key, double lo, bool strict,
                               const char* name) {
    const auto it = obj.find(key);
    if (it == obj.end()) return std::nullopt;
    const auto p = join(path, key);
    if (!it->is_number()) {
      fail(p, std::string(name) + " must be a number");
      return std::nullopt;
    }
    const double x = it->get<double>();
    check_bound(x, p, lo, strict, name);
    return x;
  }

  void check_bound(double x, const std::string& p, double lo, bool strict, const char* name) {
    if (!std::isfinite(x) || (strict ? !(x > lo) : !(x >= lo)))
      fail(p, std::string(name) + (strict ? " must be > " : " must be ≥ ") + format_number(lo));
  }

  std::optional<std::int64_t> integer(const Json& obj, const std::string& path, const char* key, std::int64_t lo) {
    const auto it = obj.find(key);
    if (it == obj.end()) return std::nullopt;
    const auto p = join(path, key);
    if (!it->is_number_integer()) {
      fail(p, std::string(key) + " must be an integer");
      return std::nullopt;
    }
    const auto x = it->get<std::int64_t>();
    if (x < lo) {
      fail(p, std::string(key) + " must be ≥ " + std::to_string(lo));
      return std::nullopt;
    }
    return x;
  }

  std::optional<bool> boolean(const Json& obj, const std::string& path, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) return std::nullopt;
    if (!it->is_boolean()) {
      fail(join(path, key), std::string(key) + " must be true or false");
      return std::nullopt;
    }
    return it->get<bool>();
  }

  const Json* object(const Json& obj, const std::string& path, const char* key, bool required) {
    const auto it = obj.find(key);
    if (it == obj.end()) {
      if (required) fail(join(path, key), "missing required object");
      return nullptr;
    }
    if (!it->is_object()) {
      fail(join(path, key), "must be an object");
      return nullptr;
    }
    return &*it;
  }

  /// Scalar or per-node array of non-negative numbers.
  std::variant<double, std::vector<double>> table(const Json& obj, const std::string& path, const char* key) {
    const auto it = obj.find(key);
    const auto p = join(path, key);
    if (it == obj.end()) {
      fail(p, "missing required field");
      return 0.0;
    }
    if (it->is_number()) {
      check_bound(it->get<double>(), p, 0.0, false, key);
      return it->get<double>();
    }
    if (it->is_array()) {
      std::vector<double> out;
      for (std::size_t k = 0; k < it->size(); ++k) {
        const auto& e = (*it)[k];
        const auto pk = p + "[" + std::to_string(k) + "]";
        if (!e.is_number()) {
          fail(pk, std::string(key) + " must be a number");
          continue;
        }
        check_bound(e.get<double>(), pk, 0.0, false, key);
        out.push_back(e.get<double>());
      }
      return out;
    }
    fail(p, std::string(key) + " must be a number or an array of numbers");
    return 0.0;
  }
};

void parse_topology(Reader& r, const Json& j, const std::string& base_dir, TopologySource& out) {
  const std::string path = "topology";
  r.allow_only(j, path, {"clique", "file", "roofnet_surrogate"});
  const int given = static_cast<int>(j.contains("clique")) + static_cast<int>(j.contains("file")) +
                    static_cast<int>(j.contains("roofnet_surrogate"));
  if (given != 1) {
    r.fail(path, "exactly one of clique, file, roofnet_surrogate is required");
    return;
  }
  if (auto m = r.integer(j, path, "clique", 1)) {
    out.kind = TopologySource::Kind::Clique;
    out.nodes = static_cast<int>(*m);
  } else if (j.contains("file")) {
    out.kind = TopologySource::Kind::File;
    if (!j.at("file").is_string()) {
      r.fail(path + ".file", "file must be a string");
      return;
    }
    fs::path p = j.at("file").get<std::string>();
    if (p.is_relative()) p = fs::path(base_dir) / p;
    out.path = p.string();
    if (!fs::exists(p)) r.fail(path + ".file", "file not found: " + out.path);
  } else if (auto s = r.integer(j, path, "roofnet_surrogate", 0)) {
    out.kind = TopologySource::Kind::Roofnet;
    out.seed = static_cast<std::uint64_t>(*s);
  }
}

void parse_costs(Reader& r, const Json& j, CostSpec& out) {
  const std::string path = "costs";
  if (j.contains("mode")) {
    const auto& m = j.at("mode");
    if (m == "broadcast")
      out.mode = CostMode::Broadcast;
    else if (m == "unicast")
      out.mode = CostMode::Unicast;
    else
      r.fail(path + ".mode", "mode must be \"broadcast\" or \"unicast\"");
  }
  if (j.contains("preset")) {
    r.allow_only(j, path, {"mode", "preset"});
    if (j.at("preset") != "testbed") r.fail(path + ".preset", "unknown preset (expected \"testbed\")");
    if (out.mode != CostMode::Broadcast) r.fail(path + ".preset", "the testbed preset is broadcast only");
    out.testbed = true;
    return;
  }
  out.comp = r.table(j, path, "comp");
  if (out.mode == CostMode::Broadcast) {
    r.allow_only(j, path, {"mode", "comp", "tx"});
    out.tx = r.table(j, path, "tx");
    return;
  }
  r.allow_only(j, path, {"mode", "comp", "link"});
  const auto it = j.find("link");
  if (it == j.end()) {
    r.fail(path + ".link", "missing required field");
  } else if (it->is_number()) {
    r.check_bound(it->get<double>(), path + ".link", 0.0, false, "link");
    out.link = it->get<double>();
  } else if (it->is_array()) {
    std::vector<std::vector<double>> rows;
    bool ok = true;
    for (std::size_t a = 0; a < it->size() && ok; ++a) {
      const auto& row = (*it)[a];
      if (!row.is_array()) {
        r.fail(path + ".link[" + std::to_string(a) + "]", "link rows must be arrays");
        ok = false;
        break;
      }
      rows.emplace_back();
      for (std::size_t b = 0; b < row.size(); ++b) {
        const auto pk = path + ".link[" + std::to_string(a) + "][" + std::to_string(b) + "]";
        if (!row[b].is_number()) {
          r.fail(pk, "link must be a number");
          ok = false;
          continue;
        }
        r.check_bound(row[b].get<double>(), pk, 0.0, false, "link");
        rows.back().push_back(row[b].get<double>());
      }
    }
    out.link = std::move(rows);
  } else {
    r.fail(path + ".link", "link must be a number or a matrix");
  }
}

void parse_convergence(Reader& r, const Json& j, ConvergenceSpec& out) {
  const std::string path = "convergence";
  r.allow_only(j, path, {"L", "M1", "M2", "sigma_hat", "zeta_hat", "f0", "xi0", "r0", "epsilon", "convex"});
  out.L = r.number(j, path, "L", 0.0, true, "L");
  out.M1 = r.number(j, path, "M1", 0.0, false, "M1");
  out.M2 = r.number(j, path, "M2", 0.0, false, "M2");
  out.sigma_hat = r.number(j, path, "sigma_hat", 0.0, false, "sigma_hat");
  out.zeta_hat = r.number(j, path, "zeta_hat", 0.0, false, "zeta_hat");
  out.f0 = r.number(j, path, "f0", 0.0, false, "f0");
  out.xi0 = r.number(j, path, "xi0", 0.0, false, "xi0");
  out.r0 = r.number(j, path, "r0", 0.0, false, "r0");
  if (auto e = r.number(j, path, "epsilon", 0.0, true, "epsilon")) out.epsilon = *e;
  if (auto c = r.boolean(j, path, "convex")) out.convex = *c;
}

void parse_planner(Reader& r, const Json& j, PlannerSpec& out) {
  const std::string path = "planner";
  r.allow_only(j, path, {"max_phases", "budgets", "budget_count", "durations", "duration_count", "samples", "delta"});
  if (auto k = r.integer(j, path, "max_phases", 1)) {
    if (*k > 2)
      r.fail(path + ".max_phases", "max_phases must be 1 or 2");
    else
      out.max_phases = static_cast<int>(*k);
  }
  if (j.contains("budgets")) {
    const auto& b = j.at("budgets");
    if (!b.is_array() || b.empty()) {
      r.fail(path + ".budgets", "budgets must be a non-empty array of numbers");
    } else {
      for (std::size_t k = 0; k < b.size(); ++k) {
        if (!b[k].is_number())
          r.fail(path + ".budgets[" + std::to_string(k) + "]", "budget must be a number");
        else
          out.budgets.push_back(b[k].get<double>());
      }
    }
  }
  if (auto n = r.integer(j, path, "budget_count", 1)) out.budget_count = static_cast<int>(*n);
  if (j.contains("durations")) {
    const auto& d = j.at("durations");
    if (!d.is_array() || d.empty()) {
      r.fail(path + ".durations", "durations must be a non-empty array of integers");
    } else {
      for (std::size_t k = 0; k < d.size(); ++k) {
        if (!d[k].is_number_integer() || d[k].get<std::int64_t>() < 1)
          r.fail(path + ".durations[" + std::to_string(k) + "]", "duration must be an integer ≥ 1");
        else
          out.durations.push_back(d[k].get<std::int64_t>());
      }
    }
  }
  if (auto n = r.integer(j, path, "duration_count", 1)) out.duration_count = static_cast<int>(*n);
  if (auto n = r.integer(j, path, "samples", 2)) out.samples = static_cast<std::size_t>(*n);
  if (auto d = r.number(j, path, "delta", 0.0, true, "delta")) out.delta = *d;
}

void parse_simulation(Reader& r, const Json& j, SimulationSpec& out) {
  const std::string path = "simulation";
  r.allow_only(j, path,
               {"dim", "hetero", "noise", "runs", "eta", "max_iterations", "target_gap", "stop_at_target", "normalize",
                "baseline"});
  if (auto d = r.integer(j, path, "dim", 1)) out.dim = static_cast<int>(*d);
  if (auto h = r.number(j, path, "hetero", 0.0, false, "hetero")) out.hetero = *h;
  if (auto n = r.number(j, path, "noise", 0.0, false, "noise")) out.noise = *n;
  if (auto n = r.integer(j, path, "runs", 1)) out.runs = static_cast<int>(*n);
  if (j.contains("eta") && !(j.at("eta").is_string() && j.at("eta") == "prescribed"))
    out.eta = r.number(j, path, "eta", 0.0, true, "eta");
  if (auto n = r.integer(j, path, "max_iterations", 0)) out.max_iterations = *n;
  out.target_gap = r.number(j, path, "target_gap", 0.0, true, "target_gap");
  if (auto b = r.boolean(j, path, "stop_at_target")) out.stop_at_target = *b;
  if (auto b = r.boolean(j, path, "normalize")) out.normalize = *b;
  if (auto b = r.boolean(j, path, "baseline")) out.baseline = *b;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view text, const std::string& base_dir) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError({std::string("(document): malformed JSON: ") + e.what()});
  }
  Reader r;
  ExperimentConfig cfg;
  if (!j.is_object()) throw ConfigError({"(document): top level must be an object"});
  r.allow_only(j, "", {"seed", "mode", "topology", "costs", "convergence", "planner", "simulation"});
  if (auto s = r.integer(j, "", "seed", 0)) cfg.seed = static_cast<std::uint64_t>(*s);
  if (j.contains("mode")) {
    if (j.at("mode") == "broadcast")
      cfg.costs.mode = CostMode::Broadcast;
    else if (j.at("mode") == "unicast")
      cfg.costs.mode = CostMode::Unicast;
    else
      r.fail("mode", "mode must be \"broadcast\" or \"unicast\"");
  }
  if (const Json* t = r.object(j, "", "topology", true)) parse_topology(r, *t, base_dir, cfg.topology);
  if (const Json* c = r.object(j, "", "costs", true)) parse_costs(r, *c, cfg.costs);
  if (const Json* c = r.object(j, "", "convergence", false)) parse_convergence(r, *c, cfg.convergence);
  if (const Json* p = r.object(j, "", "planner", false)) parse_planner(r, *p, cfg.planner);
  if (const Json* s = r.object(j, "", "simulation", false)) parse_simulation(r, *s, cfg.simulation);
  if (!r.errors.empty()) throw ConfigError(std::move(r.errors));
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({path + ": cannot read config"});
  std::stringstream buf;
  buf << in.rdbuf();
  const auto dir = fs::path(path).parent_path();
  return parse_experiment_config(buf.str(), dir.empty() ? "." : dir.string());
}

Topology build_topology(const ExperimentConfig& cfg) {
  switch (cfg.topology.kind) {
    case TopologySource::Kind::Clique: return make_clique(cfg.topology.nodes);
    case TopologySource::Kind::File: return load_topology_file(cfg.topology.path);
    case TopologySource::Kind::Roofnet: return roofnet_surrogate(cfg.topology.seed);
  }
  throw std::logic_error("unhandled topology source");
}

namespace {

Vector expand(const std::variant<double, std::vector<double>>& v, int m, const char* name,
              std::vector<std::string>& errors) {
  if (const auto* s = std::get_if<double>(&v)) return Vector::Constant(m, *s);
  const auto& a = std::get<std::vector<double>>(v);
  if (static_cast<int>(a.size()) != m) {
    errors.push_back(std::string("costs.") + name + ": expected " + std::to_string(m) + " entries, got " +
                     std::to_string(a.size()));
    return Vector::Zero(m);
  }
  return Eigen::Map<const Vector>(a.data(), m);
}

}  // namespace

CostModel build_cost_model(const ExperimentConfig& cfg, const Topology& t) {
  const int m = t.size();
  const auto& spec = cfg.costs;
  if (spec.testbed) return testbed_broadcast_cost(m);
  std::vector<std::string> errors;
  const Vector comp = expand(spec.comp, m, "comp", errors);
  if (spec.mode == CostMode::Broadcast) {
    const Vector tx = expand(spec.tx, m, "tx", errors);
    if (!errors.empty()) throw ConfigError(errors);
    return BroadcastCost{comp, tx};
  }
  UnicastCost c;
  if (const auto* s = std::get_if<double>(&spec.link)) {
    c = UnicastCost::homogeneous(t, 0.0, *s);
  } else {
    const auto& rows = std::get<std::vector<std::vector<double>>>(spec.link);
    c.link = Matrix::Zero(m, m);
    if (static_cast<int>(rows.size()) != m) errors.push_back("costs.link: expected " + std::to_string(m) + " rows");
    for (std::size_t a = 0; a < rows.size() && static_cast<int>(a) < m; ++a) {
      if (static_cast<int>(rows[a].size()) != m) {
        errors.push_back("costs.link[" + std::to_string(a) + "]: expected " + std::to_string(m) + " entries");
        continue;
      }
      for (int b = 0; b < m; ++b) c.link(static_cast<Eigen::Index>(a), b) = rows[a][static_cast<std::size_t>(b)];
    }
  }
  c.comp = comp;
  if (!errors.empty()) throw ConfigError(errors);
  try {
    c.check(t);
  } catch (const std::invalid_argument& e) {
    throw ConfigError({std::string("costs.link: ") + e.what()});
  }
  return c;
}

SyntheticProblem build_problem(const ExperimentConfig& cfg, int nodes) {
  Rng rng = split_stream(cfg.seed, 0);
  return make_quadratic_problem(nodes, cfg.simulation.dim, cfg.simulation.hetero, cfg.simulation.noise, rng);
}

ConvergenceParams build_convergence_params(const ExperimentConfig& cfg, const SyntheticProblem& p) {
  const auto& s = cfg.convergence;
  ConvergenceParams q = derive_convergence_params(p, Matrix::Zero(p.nodes(), p.dim()), s.epsilon, s.convex);
  q.L = s.L.value_or(q.L);
  q.M1 = s.M1.value_or(q.M1);
  q.M2 = s.M2.value_or(q.M2);
  q.sigma_hat = s.sigma_hat.value_or(q.sigma_hat);
  q.zeta_hat = s.zeta_hat.value_or(q.zeta_hat);
  q.f0 = s.f0.value_or(q.f0);
  q.xi0 = s.xi0.value_or(q.xi0);
  q.r0 = s.r0.value_or(q.r0);
  q.check();
  return q;
}

std::vector<double> build_budget_grid(const ExperimentConfig& cfg, const CostModel& c) {
  const auto [lo, hi] = budget_window(c);
  std::vector<double> grid = cfg.planner.budgets.empty() ? default_budget_grid(lo, hi, cfg.planner.budget_count)
                                                         : cfg.planner.budgets;
  for (double d : grid)
    if (d < lo)
      throw BudgetInfeasible("budget " + format_number(d) + " below the smallest feasible budget " + format_number(lo));
  return grid;
}

MixingDistribution design_distribution(const Topology& t, const CostModel& c, double budget, double delta, Rng& rng) {
  if (const auto* bc = std::get_if<BroadcastCost>(&c)) return broadcast_distribution(t, activation_probabilities(*bc, budget));
  const auto design = design_unicast(t, std::get<UnicastCost>(c), budget, delta, rng);
  if (design.failed) throw DesignFailure("unicast design stayed at rho = 1 for budget " + format_number(budget));
  return design.distribution();
}

std::vector<SimPhase> simulation_phases(const PhasePlan& plan, const Topology& t, const CostModel& c, double delta,
                                        Rng& rng) {
  std::vector<SimPhase> out;
  for (const auto& ph : plan.phases) out.push_back({design_distribution(t, c, ph.budget, delta, rng), ph.duration});
  return out;
}

namespace {

struct RunRecord {
  std::int64_t iterations = 0;
  double final_gap = 0;
  double max_energy = 0;
  bool reached = false;
};

RunRecord summarize(const SimTrace& trace, const SyntheticProblem& p, double target) {
  RunRecord r;
  const std::size_t last = trace.size() - 1;
  r.iterations = trace.iteration[last];
  r.final_gap = trace.loss[last] - p.f_inf();
  r.max_energy = trace.energy[last].maxCoeff();
  r.reached = r.final_gap <= target;
  return r;
}

Json runs_to_json(const std::vector<RunRecord>& runs) {
  Json arr = Json::array();
  double mean = 0;
  for (std::size_t k = 0; k < runs.size(); ++k) {
    const auto& r = runs[k];
    arr.push_back({{"run", k},
                   {"iterations", r.iterations},
                   {"final_gap", r.final_gap},
                   {"max_energy", r.max_energy},
                   {"reached_target", r.reached}});
    mean += r.max_energy / static_cast<double>(runs.size());
  }
  return {{"runs", std::move(arr)}, {"mean_max_energy", mean}};
}

void write_csv(const std::string& path, const SimTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_trace_csv(out, trace);
}

}  // namespace

Json simulate_plan(const ExperimentConfig& cfg, const PhasePlan& original, const std::string& out_dir) {
  const Topology t = build_topology(cfg);
  const CostModel c = build_cost_model(cfg, t);
  const SyntheticProblem problem = build_problem(cfg, t.size());
  const ConvergenceParams params = build_convergence_params(cfg, problem);
  const auto& sim = cfg.simulation;
  const double target = sim.target_gap.value_or(cfg.convergence.epsilon);
  SimOptions opts;
  if (sim.stop_at_target) opts.stop_gap = target;

  PhasePlan plan = original;
  Rng design_rng = split_stream(cfg.seed, 1);
  auto phases = simulation_phases(plan, t, c, cfg.planner.delta, design_rng);
  const double eta = sim.eta.value_or(prescribed_learning_rate(params, std::max<std::int64_t>(plan.horizon, 1), plan.schedule()));

  Json out;
  out["eta"] = eta;
  out["target_gap"] = target;
  if (sim.normalize && plan.phases.size() > 1) {
    // Pilot run on the final phase alone measures how loose the bound horizon is.
    Rng pilot_rng = split_stream(cfg.seed, 2);
    SimOptions pilot_opts;
    pilot_opts.stop_gap = target;
    const auto pilot = run_simulation(problem, {phases.back()}, eta, sim.max_iterations, c, t, pilot_rng, pilot_opts);
    const auto bound = t2_min_iterations(PSchedule::constant(plan.phases.back().p), params);
    if (const auto hit = pilot.first_below(target, problem.f_inf()); hit && bound && *hit >= 1) {
      const auto actual = std::min<std::int64_t>(static_cast<std::int64_t>(*hit), *bound);
      plan = normalize_phase_lengths(plan, actual, *bound);
      for (std::size_t s = 0; s < phases.size(); ++s) phases[s].duration = plan.phases[s].duration;
      out["normalization"] = {{"t_actual", actual}, {"t_bound", *bound}};
    }
  }
  out["plan"] = plan_to_json(plan);

  std::vector<RunRecord> runs;
  for (int k = 0; k < sim.runs; ++k) {
    Rng rng = split_stream(cfg.seed, 100 + static_cast<std::uint64_t>(k));
    const auto trace = run_simulation(problem, phases, eta, sim.max_iterations, c, t, rng, opts);
    write_csv((fs::path(out_dir) / ("trace_run" + std::to_string(k) + ".csv")).string(), trace);
    runs.push_back(summarize(trace, problem, target));
  }
  out["planned"] = runs_to_json(runs);
  out["final_loss"] = runs.empty() ? Json(nullptr) : Json(runs.back().final_gap + problem.f_inf());

  if (sim.baseline) {
    const double top = budget_window(c).second;
    const std::vector<SimPhase> full{{design_distribution(t, c, top, cfg.planner.delta, design_rng), 0}};
    std::vector<RunRecord> base;
    for (int k = 0; k < sim.runs; ++k) {
      Rng rng = split_stream(cfg.seed, 100 + static_cast<std::uint64_t>(k));
      const auto trace = run_simulation(problem, full, eta, sim.max_iterations, c, t, rng, opts);
      write_csv((fs::path(out_dir) / ("baseline_run" + std::to_string(k) + ".csv")).string(), trace);
      base.push_back(summarize(trace, problem, target));
    }
    out["baseline"] = runs_to_json(base);
    out["baseline"]["budget"] = top;
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const std::string& out_dir) {
  fs::create_directories(out_dir);
  ExperimentResult result;
  Json& summary = result.summary;
  summary["mode"] = std::string(to_string(cfg.costs.testbed ? CostMode::Broadcast : cfg.costs.mode));
  summary["seed"] = cfg.seed;
  summary["error"] = nullptr;

  std::string stage = "design";
  auto record_error = [&](const std::string& kind, const std::string& message, int code) {
    summary["error"] = {{"stage", stage}, {"kind", kind}, {"message", message}};
    result.exit_code = code;
  };
  try {
    const Topology t = build_topology(cfg);
    const CostModel c = build_cost_model(cfg, t);
    summary["nodes"] = t.size();
    const auto [lo, hi] = budget_window(c);
    summary["budget_window"] = {lo, hi};
    const auto grid = build_budget_grid(cfg, c);

    stage = "calibrate";
    CalibrationOptions copts;
    copts.samples = cfg.planner.samples;
    copts.delta = cfg.planner.delta;
    copts.seed = cfg.seed;
    const RhoProfile profile = calibrate_rho_profile(t, c, grid, copts);
    write_json_file((fs::path(out_dir) / "profile.json").string(), profile_to_json(profile));

    stage = "plan";
    const SyntheticProblem problem = build_problem(cfg, t.size());
    const ConvergenceParams params = build_convergence_params(cfg, problem);
    PlannerGrids grids{grid, cfg.planner.durations};
    if (grids.durations.empty() && cfg.planner.max_phases == 2)
      grids.durations = default_duration_grid(plan_phase_count(1, profile, params, grids).horizon,
                                              cfg.planner.duration_count);
    const PhasePlan plan = plan_multi_phase(cfg.planner.max_phases, profile, params, grids);
    write_json_file((fs::path(out_dir) / "plan.json").string(), plan_to_json(plan));
    summary["plan"] = plan_to_json(plan);

    stage = "simulate";
    summary["simulation"] = simulate_plan(cfg, plan, out_dir);
    const auto& planned = summary["simulation"]["planned"];
    summary["max_per_node_energy"] = planned["mean_max_energy"];
    summary["final_loss"] = summary["simulation"]["final_loss"];
    summary["iterations"] = planned["runs"].back()["iterations"];
  } catch (const ConfigError& e) {
    record_error("config", e.what(), kExitConfig);
  } catch (const ParseError& e) {
    record_error("parse-error", e.what(), kExitConfig);
  } catch (const BudgetInfeasible& e) {
    record_error("budget-infeasible", e.what(), kExitInfeasible);
  } catch (const NoPlan& e) {
    record_error("no-plan", e.what(), kExitInfeasible);
  } catch (const DesignFailure& e) {
    record_error("design-failure", e.what(), kExitDesign);
  } catch (const std::exception& e) {
    record_error("error", e.what(), 1);
  }
  summary["status"] = result.exit_code == kExitOk ? "ok" : "error";
  write_json_file((fs::path(out_dir) / "summary.json").string(), summary);
  return result;
}

}  // namespace budgetmix

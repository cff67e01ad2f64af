#include "budgetmix/serialization.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace budgetmix {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ParseError(what);
}

}  // namespace

Json matrix_to_json(const Matrix& w) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < w.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < w.cols(); ++c) row.push_back(w(r, c));
    rows.push_back(std::move(row));
  }
  return {{"m", w.rows()}, {"entries", std::move(rows)}};
}

Matrix matrix_from_json(const Json& j) {
  require(j.is_object() && j.contains("m") && j.contains("entries"), "matrix needs \"m\" and \"entries\"");
  const int m = j.at("m").get<int>();
  const Json& rows = j.at("entries");
  require(m >= 0 && rows.is_array() && static_cast<int>(rows.size()) == m, "matrix row count differs from m");
  Matrix w(m, m);
  for (int r = 0; r < m; ++r) {
    const Json& row = rows[static_cast<std::size_t>(r)];
    require(row.is_array() && static_cast<int>(row.size()) == m, "matrix row " + std::to_string(r) + " has wrong length");
    for (int c = 0; c < m; ++c) w(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return w;
}

Json distribution_to_json(const MixingDistribution& d) {
  const auto& f = d.finite_support();
  Json cands = Json::array();
  for (const auto& w : f.candidates) cands.push_back(matrix_to_json(w));
  return {{"m", d.dimension()}, {"probabilities", f.probabilities}, {"candidates", std::move(cands)}};
}

MixingDistribution distribution_from_json(const Json& j) {
  require(j.is_object() && j.contains("probabilities") && j.contains("candidates"),
          "distribution needs \"probabilities\" and \"candidates\"");
  std::vector<MixingMatrix> cands;
  for (const auto& c : j.at("candidates")) cands.push_back(matrix_from_json(c));
  auto probs = j.at("probabilities").get<std::vector<double>>();
  try {
    return MixingDistribution::finite(std::move(cands), std::move(probs));
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
}

Json plan_to_json(const PhasePlan& plan) {
  Json phases = Json::array();
  for (const auto& ph : plan.phases) phases.push_back({{"budget", ph.budget}, {"duration", ph.duration}, {"p", ph.p}});
  Json j = {{"K", plan.K}, {"phases", std::move(phases)}, {"horizon", plan.horizon}};
  j["objective"] = std::isfinite(plan.objective) ? Json(plan.objective) : Json(nullptr);
  return j;
}

PhasePlan plan_from_json(const Json& j) {
  require(j.is_object() && j.contains("K") && j.contains("phases"), "plan needs \"K\" and \"phases\"");
  PhasePlan plan;
  plan.K = j.at("K").get<int>();
  for (const auto& ph : j.at("phases"))
    plan.phases.push_back({ph.at("budget").get<double>(), ph.at("duration").get<std::int64_t>(), ph.at("p").get<double>()});
  require(static_cast<int>(plan.phases.size()) == plan.K, "plan K differs from its phase count");
  plan.horizon = j.value("horizon", std::int64_t{0});
  const auto obj = j.find("objective");
  plan.objective = obj == j.end() || obj->is_null() ? std::numeric_limits<double>::infinity() : obj->get<double>();
  return plan;
}

Json profile_to_json(const RhoProfile& profile) {
  return {{"budgets", profile.budgets},
          {"rho_upper", profile.rho_upper},
          {"source", profile.source == RhoProfile::Source::Analytic ? "analytic" : "empirical"}};
}

RhoProfile profile_from_json(const Json& j) {
  require(j.is_object() && j.contains("budgets") && j.contains("rho_upper"), "profile needs \"budgets\" and \"rho_upper\"");
  RhoProfile p;
  p.budgets = j.at("budgets").get<std::vector<double>>();
  p.rho_upper = j.at("rho_upper").get<std::vector<double>>();
  p.source = j.value("source", std::string("empirical")) == "analytic" ? RhoProfile::Source::Analytic
                                                                      : RhoProfile::Source::Empirical;
  try {
    p.check();
  } catch (const std::invalid_argument& e) {
    throw ParseError(e.what());
  }
  return p;
}

std::string format_number(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

void write_trace_csv(std::ostream& out, const SimTrace& trace) {
  const Eigen::Index m = trace.energy.empty() ? 0 : trace.energy.front().size();
  out << "iteration,loss,consensus";
  for (Eigen::Index i = 0; i < m; ++i) out << ",energy_node_" << i;
  out << "\r\n";
  for (std::size_t k = 0; k < trace.size(); ++k) {
    out << trace.iteration[k] << ',' << format_number(trace.loss[k]) << ',' << format_number(trace.consensus[k]);
    for (Eigen::Index i = 0; i < m; ++i) out << ',' << format_number(trace.energy[k](i));
    out << "\r\n";
  }
}

void write_json_file(const std::string& path, const Json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << j.dump(2) << '\n';
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

}  // namespace budgetmix

#include "budgetmix/unicast.hpp"

#include "budgetmix/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace budgetmix {

UnicastCost UnicastCost::homogeneous(const Topology& t, double comp, double link_cost) {
  const int m = t.size();
  UnicastCost c{Vector::Constant(m, comp), Matrix::Zero(m, m)};
  for (auto [u, v] : t.edges()) {
    c.link(u, v) = link_cost;
    c.link(v, u) = link_cost;
  }
  c.check(t);
  return c;
}

void UnicastCost::check(const Topology& t) const {
  const int m = t.size();
  if (comp.size() != m || link.rows() != m || link.cols() != m)
    throw std::invalid_argument("unicast cost dimensions do not match topology");
  if (m == 0) return;
  if (comp.minCoeff() < 0.0 || link.minCoeff() < 0.0) throw std::invalid_argument("unicast costs must be non-negative");
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (link(i, j) != link(j, i)) throw std::invalid_argument("link costs must be symmetric");
      if (link(i, j) != 0.0 && !t.has_edge(i, j))
        throw std::invalid_argument("link cost on non-edge (" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
}

double UnicastCost::max_link(int i) const { return link.row(i).maxCoeff(); }

std::pair<double, double> unicast_budget_window(const UnicastCost& c) {
  return {c.comp.maxCoeff(), (c.comp + c.link.rowwise().sum()).maxCoeff()};
}

CandidateSet CandidateSet::identity_only(int m) {
  CandidateSet s;
  s.matrices.push_back(MixingMatrix::Identity(m, m));
  s.subgraphs.emplace_back(m, std::vector<Edge>{});
  return s;
}

void CandidateSet::add(const Topology& subgraph) {
  matrices.push_back(candidate_matrix(subgraph));
  subgraphs.push_back(subgraph);
}

int regular_degree(const UnicastCost& c, double budget) {
  const int m = c.size();
  const double worst = c.comp.maxCoeff();
  if (budget < worst)
    throw BudgetInfeasible("budget " + std::to_string(budget) + " below max computation cost " + std::to_string(worst));
  double d = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m; ++i) {
    const double link = c.max_link(i);
    if (link > 0.0) d = std::min(d, (budget - c.comp(i)) / link);
  }
  if (!std::isfinite(d)) return std::max(m - 1, 0);
  // Guard against ratios like 4.9999999999999991 that are 5 in exact arithmetic.
  const double floored = std::floor(d + 1e-9);
  return static_cast<int>(std::clamp(floored, 0.0, static_cast<double>(std::max(m - 1, 0))));
}

namespace {

constexpr int kPairingAttempts = 100;

// One pairing-model attempt. Returns true when a full d-regular simple graph was built.
bool pairing_attempt(int m, int degree, Rng& rng, std::vector<Edge>& edges) {
  std::vector<int> points;
  points.reserve(static_cast<std::size_t>(m) * static_cast<std::size_t>(degree));
  for (int v = 0; v < m; ++v)
    for (int k = 0; k < degree; ++k) points.push_back(v);
  std::vector<std::vector<char>> adjacent(static_cast<std::size_t>(m), std::vector<char>(static_cast<std::size_t>(m), 0));
  edges.clear();

  auto suitable = [&](int u, int v) { return u != v && !adjacent[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)]; };

  auto join = [&](std::size_t a, std::size_t b) {
    const int u = points[a], v = points[b];
    edges.emplace_back(std::min(u, v), std::max(u, v));
    adjacent[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] = 1;
    adjacent[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)] = 1;
    if (a < b) std::swap(a, b);
    points[a] = points.back();
    points.pop_back();
    points[b] = points.back();
    points.pop_back();
  };

  while (!points.empty()) {
    const std::size_t n = points.size();
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    bool paired = false;
    for (std::size_t tries = 0; tries < 50 * n && !paired; ++tries) {
      const std::size_t a = pick(rng), b = pick(rng);
      if (a == b || !suitable(points[a], points[b])) continue;
      join(a, b);
      paired = true;
    }
    if (paired) continue;
    // Many rejections in a row: enumerate what is left.
    std::vector<std::pair<std::size_t, std::size_t>> options;
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b)
        if (suitable(points[a], points[b])) options.emplace_back(a, b);
    if (options.empty()) return false;
    auto [a, b] = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
    join(a, b);
  }
  return true;
}

}  // namespace

Topology sample_regular_graph(int m, int degree, Rng& rng) {
  if (m < 1) throw std::invalid_argument("need at least one node");
  if (degree < 0 || degree >= std::max(m, 1)) {
    if (degree < 0) throw std::invalid_argument("negative degree");
    degree = m - 1;
  }
  if ((static_cast<long>(degree) * m) % 2 != 0) --degree;
  if (degree <= 0) return Topology(m, {});
  if (degree == m - 1) return make_clique(m);

  std::vector<Edge> edges;
  for (int attempt = 0; attempt < kPairingAttempts; ++attempt)
    if (pairing_attempt(m, degree, rng, edges)) break;
  return Topology(m, edges);
}

Topology sample_regular_subgraph(const Topology& t, int degree, Rng& rng) {
  Topology h = sample_regular_graph(t.size(), degree, rng);
  std::vector<Edge> kept;
  for (auto [u, v] : h.edges())
    if (t.has_edge(u, v)) kept.emplace_back(u, v);
  return Topology(t.size(), kept);
}

MixingMatrix candidate_matrix(const Topology& subgraph) {
  const int m = subgraph.size();
  MixingMatrix w = MixingMatrix::Identity(m, m);
  for (auto [u, v] : subgraph.edges()) {
    const double a = 1.0 / std::max(subgraph.degree(u), subgraph.degree(v));
    w(u, v) += a;
    w(v, u) += a;
    w(u, u) -= a;
    w(v, v) -= a;
  }
  return w;
}

Matrix candidate_link_costs(const CandidateSet& cands, const UnicastCost& c) {
  const int m = c.size();
  Matrix a = Matrix::Zero(m, static_cast<Eigen::Index>(cands.size()));
  for (std::size_t h = 0; h < cands.size(); ++h)
    for (auto [u, v] : cands.subgraphs[h].edges()) {
      a(u, static_cast<Eigen::Index>(h)) += c.link(u, v);
      a(v, static_cast<Eigen::Index>(h)) += c.link(u, v);
    }
  return a;
}

std::vector<double> project_simplex(const std::vector<double>& v) {
  std::vector<double> sorted(v);
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0, theta = 0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    const double t = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - t > 0) theta = t;
  }
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < v.size(); ++k) out[k] = std::max(v[k] - theta, 0.0);
  return out;
}

namespace {

struct BudgetRows {
  std::vector<Vector> normals;  // a_i restricted to binding-capable rows
  std::vector<double> bounds;   // D − c_i^a
};

double dot(const Vector& a, const std::vector<double>& p) {
  double s = 0;
  for (std::size_t h = 0; h < p.size(); ++h) s += a(static_cast<Eigen::Index>(h)) * p[h];
  return s;
}

// Dykstra's alternating projection onto simplex ∩ half-spaces, followed by a
// convex combination with e₀ (always feasible) to remove residual violation.
std::vector<double> project_feasible(std::vector<double> x, const BudgetRows& rows) {
  const std::size_t n = x.size();
  x = project_simplex(x);
  auto feasible = [&](const std::vector<double>& p) {
    for (std::size_t i = 0; i < rows.normals.size(); ++i)
      if (dot(rows.normals[i], p) > rows.bounds[i]) return false;
    return true;
  };
  if (!feasible(x)) {
    std::vector<double> inc_simplex(n, 0.0);
    std::vector<std::vector<double>> inc(rows.normals.size(), std::vector<double>(n, 0.0));
    for (int cycle = 0; cycle < 500; ++cycle) {
      double moved = 0;
      std::vector<double> z(n);
      for (std::size_t k = 0; k < n; ++k) z[k] = x[k] + inc_simplex[k];
      std::vector<double> next = project_simplex(z);
      for (std::size_t k = 0; k < n; ++k) {
        inc_simplex[k] = z[k] - next[k];
        moved += std::abs(next[k] - x[k]);
      }
      x = std::move(next);
      for (std::size_t i = 0; i < rows.normals.size(); ++i) {
        const Vector& a = rows.normals[i];
        for (std::size_t k = 0; k < n; ++k) z[k] = x[k] + inc[i][k];
        const double excess = dot(a, z) - rows.bounds[i];
        const double norm2 = a.squaredNorm();
        for (std::size_t k = 0; k < n; ++k) {
          const double proj = excess > 0 && norm2 > 0 ? z[k] - excess / norm2 * a(static_cast<Eigen::Index>(k)) : z[k];
          inc[i][k] = z[k] - proj;
          moved += std::abs(proj - x[k]);
          x[k] = proj;
        }
      }
      if (moved < 1e-13) break;
    }
    x = project_simplex(x);
  }
  double theta = 0;
  for (std::size_t i = 0; i < rows.normals.size(); ++i) {
    const double load = dot(rows.normals[i], x);
    if (load > rows.bounds[i]) theta = std::max(theta, 1.0 - rows.bounds[i] / load);
  }
  if (theta > 0) {
    for (double& p : x) p *= 1.0 - theta;
    x[0] += theta;
  }
  return x;
}

}  // namespace

DistributionSolution optimize_distribution(const CandidateSet& cands, const UnicastCost& c, double budget,
                                           const DistributionOptions& options) {
  if (cands.size() == 0) throw std::invalid_argument("empty candidate set");
  const int m = c.size();
  const std::size_t k = cands.size();
  if (cands.matrices.front().rows() != m || !cands.matrices.front().isIdentity(0.0))
    throw std::invalid_argument("first candidate must be the identity");

  const Matrix loads = candidate_link_costs(cands, c);
  BudgetRows rows;
  for (int i = 0; i < m; ++i) {
    const double bound = budget - c.comp(i);
    if (bound < 0) throw BudgetInfeasible("budget below computation cost of node " + std::to_string(i));
    // Rows that no point of the simplex can violate are dropped.
    if (loads.row(i).maxCoeff() > bound) {
      rows.normals.push_back(loads.row(i).transpose());
      rows.bounds.push_back(bound);
    }
  }

  std::vector<Matrix> grams;
  grams.reserve(k);
  for (const auto& w : cands.matrices) grams.push_back(w.transpose() * w);
  const Matrix avg = averaging_matrix(m);

  auto evaluate = [&](const std::vector<double>& p) {
    Matrix op = -avg;
    for (std::size_t h = 0; h < k; ++h)
      if (p[h] != 0.0) op.noalias() += p[h] * grams[h];
    return spectral_norm_witness(op, 1e-9);
  };

  std::vector<double> p(k, 0.0);
  if (!options.warm_start.empty()) {
    if (options.warm_start.size() != k) throw std::invalid_argument("warm start has wrong length");
    p = project_feasible(options.warm_start, rows);
  } else {
    p[0] = 1.0;
  }

  DistributionSolution best{p, evaluate(p).norm, 0};
  if (k == 1) return best;

  int since_improvement = 0;
  std::vector<double> g(k);
  for (int it = 0; it < options.max_iterations; ++it) {
    const auto witness = evaluate(p);
    if (witness.norm < best.rho - 1e-12) {
      best.rho = witness.norm;
      best.probabilities = p;
      since_improvement = 0;
    } else if (++since_improvement > options.patience) {
      best.iterations = it;
      break;
    }
    double mean = 0;
    for (std::size_t h = 0; h < k; ++h) {
      g[h] = witness.sign * (cands.matrices[h] * witness.vector).squaredNorm();
      mean += g[h];
    }
    mean /= static_cast<double>(k);
    double norm = 0;
    for (double& x : g) {
      x -= mean;
      norm += x * x;
    }
    norm = std::sqrt(norm);
    if (norm < 1e-15) {
      best.iterations = it;
      break;
    }
    const double step = options.initial_step / std::sqrt(static_cast<double>(it) + 1.0);
    for (std::size_t h = 0; h < k; ++h) p[h] -= step * g[h] / norm;
    p = project_feasible(std::move(p), rows);
    best.iterations = it + 1;
  }
  const auto last = evaluate(p);
  if (last.norm < best.rho) {
    best.rho = last.norm;
    best.probabilities = p;
  }
  return best;
}

MixingDistribution UnicastDesign::distribution() const {
  return MixingDistribution::finite(candidates.matrices, probabilities);
}

UnicastDesign design_unicast(const Topology& t, const UnicastCost& c, double budget, double delta, Rng& rng) {
  c.check(t);
  const int m = t.size();
  const int degree = regular_degree(c, budget);

  UnicastDesign design;
  design.candidates = CandidateSet::identity_only(m);
  design.probabilities = {1.0};
  design.rho = 1.0;
  double previous = 1.0;
  const int cap = 20 * m;
  for (int k = 1; k <= cap; ++k) {
    design.candidates.add(sample_regular_subgraph(t, degree, rng));
    DistributionOptions options;
    options.warm_start = design.probabilities;
    options.warm_start.push_back(0.0);
    auto solution = optimize_distribution(design.candidates, c, budget, options);
    // The warm start is feasible, so the optimum cannot get worse; keep the
    // previous solution if numerical noise says otherwise.
    if (solution.rho <= design.rho) {
      design.probabilities = std::move(solution.probabilities);
      design.rho = solution.rho;
    } else {
      design.probabilities.push_back(0.0);
    }
    design.rho_history.push_back(design.rho);
    const bool mixing = design.rho < 1.0 - kRhoOneTolerance;
    if (mixing && std::abs(design.rho - previous) < delta) break;
    previous = design.rho;
  }
  design.failed = !(design.rho < 1.0 - kRhoOneTolerance);
  // Probabilities come out of a projection; renormalize away rounding drift.
  double total = std::accumulate(design.probabilities.begin(), design.probabilities.end(), 0.0);
  for (double& p : design.probabilities) p /= total;
  return design;
}

double ramanujan_rho_bound(const UnicastCost& c, double budget) {
  double bound = 0;
  for (int i = 0; i < c.size(); ++i) {
    const double slack = budget - c.comp(i);
    const double link = c.max_link(i);
    if (slack < 0) throw BudgetInfeasible("budget below computation cost of node " + std::to_string(i));
    if (slack == 0) {
      if (link > 0) return std::numeric_limits<double>::infinity();
      continue;
    }
    bound = std::max(bound, 4.0 * link / slack);
  }
  return bound;
}

}  // namespace budgetmix

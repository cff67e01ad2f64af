#include "budgetmix/topology.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <string>

namespace budgetmix {

Topology::Topology(int nodes, const std::vector<Edge>& edges) : nodes_(nodes) {
  if (nodes < 0) throw std::invalid_argument("node count must be non-negative");
  adjacency_.resize(static_cast<std::size_t>(nodes));
  edges_.reserve(edges.size());
  for (auto [u, v] : edges) {
    if (u < 0 || v < 0 || u >= nodes || v >= nodes)
      throw std::invalid_argument("edge (" + std::to_string(u) + "," + std::to_string(v) +
                                  ") out of range for " + std::to_string(nodes) + " nodes");
    if (u == v) throw std::invalid_argument("self-loop at node " + std::to_string(u));
    edges_.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());
  for (auto [u, v] : edges_) {
    adjacency_[static_cast<std::size_t>(u)].push_back(v);
    adjacency_[static_cast<std::size_t>(v)].push_back(u);
  }
  for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());
}

bool Topology::has_edge(int u, int v) const {
  if (u < 0 || v < 0 || u >= nodes_ || v >= nodes_ || u == v) return false;
  const auto& adj = adjacency_[static_cast<std::size_t>(u)];
  return std::binary_search(adj.begin(), adj.end(), v);
}

Topology make_clique(int m) {
  if (m < 1) throw std::invalid_argument("clique needs at least one node");
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(m) * static_cast<std::size_t>(m - 1) / 2);
  for (int u = 0; u < m; ++u)
    for (int v = u + 1; v < m; ++v) edges.emplace_back(u, v);
  return Topology(m, edges);
}

Topology make_path(int m) {
  if (m < 1) throw std::invalid_argument("path needs at least one node");
  std::vector<Edge> edges;
  for (int u = 0; u + 1 < m; ++u) edges.emplace_back(u, u + 1);
  return Topology(m, edges);
}

Topology load_topology(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  int declared = -1;
  int max_index = -1;
  std::vector<Edge> edges;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    std::istringstream fields(line);
    std::string head;
    fields >> head;
    auto fail = [&](const std::string& why) {
      throw ParseError("line " + std::to_string(lineno) + ": " + why);
    };
    if (head == "m") {
      long count = -1;
      if (!(fields >> count) || count < 1) fail("bad node-count header");
      if (!edges.empty() || declared >= 0) fail("node-count header must come first and once");
      declared = static_cast<int>(count);
      continue;
    }
    long u = 0, v = 0;
    try {
      std::size_t pos = 0;
      u = std::stol(head, &pos);
      if (pos != head.size()) fail("expected integer node index, got '" + head + "'");
    } catch (const std::logic_error&) {
      fail("expected integer node index, got '" + head + "'");
    }
    if (!(fields >> v)) fail("expected two node indices");
    std::string extra;
    if (fields >> extra) fail("trailing token '" + extra + "'");
    if (u < 0 || v < 0) fail("negative node index");
    if (u == v) fail("self-loop at node " + std::to_string(u));
    if (declared >= 0 && (u >= declared || v >= declared))
      fail("node index exceeds declared count " + std::to_string(declared));
    edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
    max_index = std::max<int>(max_index, static_cast<int>(std::max(u, v)));
  }
  int nodes = declared >= 0 ? declared : max_index + 1;
  if (nodes < 1) throw ParseError("empty topology");
  return Topology(nodes, edges);
}

Topology load_topology_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open topology file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return load_topology(buf.str());
}

std::string format_topology(const Topology& t) {
  std::ostringstream out;
  out << "m " << t.size() << "\n";
  for (auto [u, v] : t.edges()) out << u << " " << v << "\n";
  return out.str();
}

std::vector<int> neighborhood(const Topology& t, int i) {
  if (i < 0 || i >= t.size()) throw std::invalid_argument("node index out of range");
  std::vector<int> out = t.neighbors(i);
  out.insert(std::lower_bound(out.begin(), out.end(), i), i);
  return out;
}

bool is_connected(const Topology& t) {
  const int m = t.size();
  if (m <= 1) return true;
  std::vector<char> seen(static_cast<std::size_t>(m), 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  int reached = 1;
  while (!stack.empty()) {
    int u = stack.back();
    stack.pop_back();
    for (int v : t.neighbors(u)) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = 1;
        ++reached;
        stack.push_back(v);
      }
    }
  }
  return reached == m;
}

Topology random_connected_graph(int m, std::size_t edges, Rng& rng) {
  if (m < 1) throw std::invalid_argument("graph needs at least one node");
  const std::size_t max_edges = static_cast<std::size_t>(m) * static_cast<std::size_t>(m - 1) / 2;
  if (edges + 1 < static_cast<std::size_t>(m) || edges > max_edges)
    throw std::invalid_argument("edge count outside [m-1, m(m-1)/2]");

  std::vector<int> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<Edge> chosen;
  std::vector<std::vector<char>> present(static_cast<std::size_t>(m),
                                         std::vector<char>(static_cast<std::size_t>(m), 0));
  auto add = [&](int u, int v) {
    chosen.emplace_back(u, v);
    present[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)] = 1;
    present[static_cast<std::size_t>(v)][static_cast<std::size_t>(u)] = 1;
  };
  for (int k = 1; k < m; ++k) {
    std::uniform_int_distribution<int> pick(0, k - 1);
    add(order[static_cast<std::size_t>(k)], order[static_cast<std::size_t>(pick(rng))]);
  }

  std::vector<Edge> rest;
  for (int u = 0; u < m; ++u)
    for (int v = u + 1; v < m; ++v)
      if (!present[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)]) rest.emplace_back(u, v);
  std::shuffle(rest.begin(), rest.end(), rng);
  for (std::size_t k = 0; chosen.size() < edges; ++k) chosen.push_back(rest[k]);
  return Topology(m, chosen);
}

Topology roofnet_surrogate(std::uint64_t seed) {
  Rng rng(seed);
  return random_connected_graph(kRoofnetNodes, kRoofnetEdges, rng);
}

}  // namespace budgetmix

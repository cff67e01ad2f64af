#pragma once

#include "budgetmix/core.hpp"

#include <cstddef>
#include <string_view>
#include <utility>
#include <vector>

namespace budgetmix {

using Edge = std::pair<int, int>;

/// Undirected base graph on nodes 0..m-1. Immutable once built.
///
/// Edges are stored once as (u, v) with u < v, sorted; adjacency lists are
/// sorted and never contain the node itself.
class Topology {
 public:
  Topology() = default;
  /// Throws std::invalid_argument on self-loops or out-of-range endpoints.
  /// Duplicate and reversed pairs collapse to one edge.
  Topology(int nodes, const std::vector<Edge>& edges);

  int size() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  std::size_t edge_count() const { return edges_.size(); }
  const std::vector<int>& neighbors(int i) const { return adjacency_.at(static_cast<std::size_t>(i)); }
  int degree(int i) const { return static_cast<int>(neighbors(i).size()); }
  bool has_edge(int u, int v) const;

 private:
  int nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adjacency_;
};

Topology make_clique(int m);
Topology make_path(int m);

/// Parses the edge-list text format: "u v" lines, optional "m <count>" header,
/// '#' comments. Without a header the node count is max index + 1.
Topology load_topology(std::string_view text);
Topology load_topology_file(const std::string& path);
std::string format_topology(const Topology& t);

/// Closed one-hop neighborhood {i} ∪ N(i), sorted.
std::vector<int> neighborhood(const Topology& t, int i);

bool is_connected(const Topology& t);

/// Uniform random spanning tree by random attachment, then uniformly random
/// extra edges up to `edges`. Requires m-1 <= edges <= m(m-1)/2.
Topology random_connected_graph(int m, std::size_t edges, Rng& rng);

/// Seeded 33-node / 187-edge connected stand-in for the Roofnet mesh, whose
/// real adjacency is not published. Load the real edge list with
/// load_topology when it is available.
Topology roofnet_surrogate(std::uint64_t seed);

inline constexpr int kRoofnetNodes = 33;
inline constexpr std::size_t kRoofnetEdges = 187;

}  // namespace budgetmix

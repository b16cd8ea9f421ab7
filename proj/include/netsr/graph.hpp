#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace netsr {

struct Edge {
  int u = 0;
  int v = 0;
  double weight = 1.0;
};

// Undirected weighted graph with a per-node neighbor index.
// Node ids are 0..n_nodes-1, no self loops, no duplicate edges.
class Graph {
public:
  Graph() = default;
  Graph(int n_nodes, std::vector<Edge> edges);

  int n_nodes() const { return n_nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }

  // neighbors(v) lists (u, weight) pairs; symmetric with neighbors(u).
  const std::vector<std::pair<int, double>>& neighbors(int v) const {
    return neighbor_index_[v];
  }

  int degree(int v) const { return static_cast<int>(neighbor_index_[v].size()); }

  bool operator==(const Graph& other) const {
    return n_nodes_ == other.n_nodes_ && edge_triples() == other.edge_triples();
  }

  std::vector<std::tuple<int, int, double>> edge_triples() const;

private:
  int n_nodes_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::pair<int, double>>> neighbor_index_;
};

// Erdos-Renyi G(n, p): each unordered pair present independently with
// probability p. Throws std::invalid_argument for p outside [0, 1] or n < 1.
Graph gen_er(int n, double p, std::uint64_t seed);

// Barabasi-Albert preferential attachment: m isolated seed nodes, each
// later node attaches m distinct edges with targets drawn from the
// repeated-endpoint list. Throws std::invalid_argument unless 1 <= m < n.
Graph gen_ba(int n, int m, std::uint64_t seed);

// Flattened directed view of an undirected graph: one lane per ordered
// neighbor pair, ordered by (dst, src). Hot evaluation loops accumulate
// edge terms G(x_dst, x_src) into dst.
struct DirectedEdges {
  std::vector<int> dst;
  std::vector<int> src;
  std::vector<double> weight;

  DirectedEdges() = default;
  explicit DirectedEdges(const Graph& g);
  int size() const { return static_cast<int>(dst.size()); }
};

// Edge-list text format: header line "#nodes=<n>", then one "u v weight"
// triple per line. write/read round-trip exactly.
std::string write_edge_list(const Graph& g);
Graph read_edge_list(const std::string& text);

void save_edge_list(const Graph& g, const std::string& path);
Graph load_edge_list(const std::string& path);

} // namespace netsr

#include "netsr/graph.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "netsr/rng.hpp"

namespace netsr {

Graph::Graph(int n_nodes, std::vector<Edge> edges)
    : n_nodes_(n_nodes), edges_(std::move(edges)) {
  if (n_nodes_ < 0) throw std::invalid_argument("Graph: negative node count");
  neighbor_index_.assign(n_nodes_, {});
  for (const Edge& e : edges_) {
    if (e.u < 0 || e.u >= n_nodes_ || e.v < 0 || e.v >= n_nodes_)
      throw std::invalid_argument("Graph: edge endpoint out of range");
    if (e.u == e.v) throw std::invalid_argument("Graph: self loop");
    neighbor_index_[e.u].emplace_back(e.v, e.weight);
    neighbor_index_[e.v].emplace_back(e.u, e.weight);
  }
  for (auto& nbrs : neighbor_index_) {
    std::sort(nbrs.begin(), nbrs.end());
    for (std::size_t i = 1; i < nbrs.size(); ++i)
      if (nbrs[i].first == nbrs[i - 1].first)
        throw std::invalid_argument("Graph: duplicate edge");
  }
}

std::vector<std::tuple<int, int, double>> Graph::edge_triples() const {
  std::vector<std::tuple<int, int, double>> out;
  out.reserve(edges_.size());
  for (const Edge& e : edges_) {
    int a = std::min(e.u, e.v), b = std::max(e.u, e.v);
    out.emplace_back(a, b, e.weight);
  }
  std::sort(out.begin(), out.end());
  return out;
}

Graph gen_er(int n, double p, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("gen_er: n must be >= 1");
  if (!(p >= 0.0 && p <= 1.0))
    throw std::invalid_argument("gen_er: p must lie in [0, 1]");
  auto rng = make_rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<Edge> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v)
      if (unif(rng) < p) edges.push_back({u, v, 1.0});
  return Graph(n, std::move(edges));
}

Graph gen_ba(int n, int m, std::uint64_t seed) {
  if (m < 1 || m >= n) throw std::invalid_argument("gen_ba: need 1 <= m < n");
  auto rng = make_rng(seed);

  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n - m) * m);
  // Endpoint list; sampling from it is degree-proportional.
  std::vector<int> repeated;
  repeated.reserve(2 * edges.capacity());

  // First attaching node connects to all m seed nodes.
  std::vector<int> targets(m);
  for (int i = 0; i < m; ++i) targets[i] = i;

  for (int source = m; source < n; ++source) {
    for (int t : targets) {
      edges.push_back({source, t, 1.0});
      repeated.push_back(source);
      repeated.push_back(t);
    }
    // Draw m distinct targets for the next node from the endpoint list.
    std::vector<int> next;
    std::uniform_int_distribution<std::size_t> pick(0, repeated.size() - 1);
    while (static_cast<int>(next.size()) < m) {
      int cand = repeated[pick(rng)];
      if (std::find(next.begin(), next.end(), cand) == next.end())
        next.push_back(cand);
    }
    targets = std::move(next);
  }
  return Graph(n, std::move(edges));
}

std::string write_edge_list(const Graph& g) {
  std::ostringstream out;
  out << "#nodes=" << g.n_nodes() << "\n";
  char buf[32];
  for (const Edge& e : g.edges()) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), e.weight);
    out << e.u << " " << e.v << " " << std::string_view(buf, ptr - buf) << "\n";
  }
  return out.str();
}

Graph read_edge_list(const std::string& text) {
  std::istringstream in(text);
  std::string header;
  if (!std::getline(in, header) || header.rfind("#nodes=", 0) != 0)
    throw std::runtime_error("edge list: missing #nodes= header");
  int n = std::stoi(header.substr(7));
  std::vector<Edge> edges;
  int u, v;
  double w;
  while (in >> u >> v >> w) edges.push_back({u, v, w});
  return Graph(n, std::move(edges));
}

DirectedEdges::DirectedEdges(const Graph& g) {
  for (int v = 0; v < g.n_nodes(); ++v) {
    for (const auto& [u, w] : g.neighbors(v)) {
      dst.push_back(v);
      src.push_back(u);
      weight.push_back(w);
    }
  }
}

void save_edge_list(const Graph& g, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << write_edge_list(g);
}

Graph load_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return read_edge_list(ss.str());
}

} // namespace netsr

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "netsr/graph.hpp"

using namespace netsr;

namespace {

// Every edge well-formed and indexed symmetrically.
void check_well_formed(const Graph& g) {
  std::set<std::pair<int, int>> seen;
  for (const Edge& e : g.edges()) {
    CHECK(e.u >= 0);
    CHECK(e.v >= 0);
    CHECK(e.u < g.n_nodes());
    CHECK(e.v < g.n_nodes());
    CHECK(e.u != e.v);  // no self loops
    auto key = std::minmax(e.u, e.v);
    CHECK(seen.insert(key).second);  // no duplicates
  }
  int degree_sum = 0;
  for (int v = 0; v < g.n_nodes(); ++v) {
    degree_sum += g.degree(v);
    for (auto [u, w] : g.neighbors(v)) {
      bool mirrored = false;
      for (auto [back, wb] : g.neighbors(u))
        if (back == v && wb == w) mirrored = true;
      CHECK(mirrored);
    }
  }
  CHECK(degree_sum == 2 * static_cast<int>(g.edges().size()));
}

} // namespace

TEST_CASE("erdos-renyi edge counts at the probability extremes") {
  CHECK(gen_er(4, 1.0, 7).edges().size() == 6);
  CHECK(gen_er(4, 0.0, 7).edges().size() == 0);
  CHECK(gen_er(1, 0.5, 7).edges().size() == 0);
}

TEST_CASE("erdos-renyi mean edge count matches n-choose-2 times p") {
  const int n = 200;
  const double p = 0.02;
  const int trials = 100;
  double total = 0.0;
  for (int s = 0; s < trials; ++s)
    total += static_cast<double>(gen_er(n, p, 1000 + s).edges().size());
  double mean = total / trials;
  double pairs = n * (n - 1) / 2.0;          // 19900
  double expect = pairs * p;                 // 398
  double stderr_edges = std::sqrt(pairs * p * (1 - p) / trials);
  CHECK(std::abs(mean - expect) <= 3.0 * stderr_edges);
}

TEST_CASE("erdos-renyi rejects invalid probability") {
  CHECK_THROWS_AS(gen_er(10, -0.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_er(10, 1.1, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_er(0, 0.5, 1), std::invalid_argument);
}

TEST_CASE("barabasi-albert edge count is (n - m) * m exactly") {
  CHECK(gen_ba(200, 3, 5).edges().size() == 591);
  CHECK(gen_ba(4, 3, 5).edges().size() == 3);
  CHECK(gen_ba(50, 3, 5).edges().size() == 141);
}

TEST_CASE("barabasi-albert attached nodes have degree >= m") {
  Graph g = gen_ba(50, 3, 11);
  for (int v = 3; v < 50; ++v) CHECK(g.degree(v) >= 3);
}

TEST_CASE("barabasi-albert rejects m outside [1, n)") {
  CHECK_THROWS_AS(gen_ba(5, 5, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_ba(5, 0, 1), std::invalid_argument);
  CHECK_THROWS_AS(gen_ba(3, 7, 1), std::invalid_argument);
}

TEST_CASE("generators are deterministic per seed") {
  CHECK(write_edge_list(gen_ba(50, 3, 9)) == write_edge_list(gen_ba(50, 3, 9)));
  CHECK(write_edge_list(gen_er(50, 0.1, 9)) ==
        write_edge_list(gen_er(50, 0.1, 9)));
  CHECK(write_edge_list(gen_ba(50, 3, 9)) != write_edge_list(gen_ba(50, 3, 10)));
  CHECK(write_edge_list(gen_er(50, 0.1, 9)) !=
        write_edge_list(gen_er(50, 0.1, 10)));
}

TEST_CASE("generated graphs are structurally sound") {
  check_well_formed(gen_er(60, 0.15, 21));
  check_well_formed(gen_ba(60, 4, 22));
}

TEST_CASE("edge list text round-trips with the node-count header") {
  Graph g = gen_ba(30, 2, 3);
  std::string text = write_edge_list(g);
  CHECK(text.rfind("#nodes=30", 0) == 0);
  Graph back = read_edge_list(text);
  CHECK(back == g);
  CHECK(write_edge_list(back) == text);
}

TEST_CASE("edge list file save and load round-trips") {
  Graph g = gen_er(25, 0.2, 13);
  const char* path = "test_graph_roundtrip.edges";
  save_edge_list(g, path);
  Graph back = load_edge_list(path);
  CHECK(back == g);
  std::remove(path);
}

TEST_CASE("directed view has one lane per edge endpoint") {
  Graph g = gen_ba(20, 3, 4);
  DirectedEdges de(g);
  CHECK(de.size() == 2 * static_cast<int>(g.edges().size()));
  // Lanes into each node match its neighbor list.
  std::vector<int> in_count(20, 0);
  for (int e = 0; e < de.size(); ++e) ++in_count[de.dst[e]];
  for (int v = 0; v < 20; ++v) CHECK(in_count[v] == g.degree(v));
}

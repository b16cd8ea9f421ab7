#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <string>
#include <vector>

#include "netsr/canonical.hpp"
#include "netsr/dynamics.hpp"
#include "netsr/gp.hpp"
#include "netsr/graph.hpp"
#include "netsr/trajectory.hpp"

using namespace netsr;

namespace {

GpConfig small_cfg() {
  GpConfig cfg;
  cfg.population = 24;
  cfg.max_generations = 4;
  cfg.big_k = 5;
  cfg.tournament = 4;
  cfg.fitness_substeps = 1;
  cfg.fitness_stride = 1;
  cfg.distance_samples = 64;
  return cfg;
}

Trajectory sis_truth(const Graph& g, int samples, std::uint64_t seed) {
  DynamicsSpec spec = DynamicsSpec::sis();
  return simulate(spec, g, sample_x0(spec, g.n_nodes(), seed),
                  sample_timestamps(samples, 1.0), 20);
}

} // namespace

TEST_CASE("initial populations respect size, role, and constant range") {
  GpConfig cfg = small_cfg();
  cfg.population = 200;
  Population nodes = init_population(Role::kNodeDynamics, cfg, 1);
  Population edges = init_population(Role::kEdgeDynamics, cfg, 2);
  CHECK(nodes.members.size() == 200);
  CHECK(edges.members.size() == 200);
  CHECK(nodes.role == Role::kNodeDynamics);

  bool edge_uses_xj = false;
  for (const Expr& e : nodes.members) {
    CHECK(!e.uses(Op::kVarXj));
    CHECK(!e.uses(Op::kVarT));  // time terminal is off by default
    for (double c : e.constants()) {
      CHECK(c >= -1.0);
      CHECK(c <= 1.0);
    }
    CHECK(e.depth() <= cfg.init_depth_hi + 1);
  }
  for (const Expr& e : edges.members) edge_uses_xj |= e.uses(Op::kVarXj);
  CHECK(edge_uses_xj);

  Population again = init_population(Role::kNodeDynamics, cfg, 1);
  for (std::size_t i = 0; i < nodes.members.size(); ++i)
    CHECK(again.members[i].identical(nodes.members[i]));
  Population other = init_population(Role::kNodeDynamics, cfg, 9);
  bool any_diff = false;
  for (std::size_t i = 0; i < nodes.members.size(); ++i)
    any_diff |= !other.members[i].identical(nodes.members[i]);
  CHECK(any_diff);
}

TEST_CASE("population distance oracle values") {
  DistanceSamples s = draw_distance_samples(Role::kNodeDynamics, 0.0, 1.0,
                                            256, 3);
  REQUIRE(s.xi.size() == 256);
  CHECK(s.xj.empty());
  for (double x : s.xi) {
    CHECK(x >= 0.0);
    CHECK(x <= 1.0);
  }

  Population exact;
  exact.role = Role::kNodeDynamics;
  exact.members = {Expr::parse("x_i"), Expr::parse("x_i")};
  auto identity = [](const std::vector<double>& xi,
                     const std::vector<double>&) { return xi; };
  CHECK(population_distance(exact, identity, s) == 0.0);

  Population constant;
  constant.role = Role::kNodeDynamics;
  constant.members = {Expr::parse("0.3")};
  auto ref08 = [](const std::vector<double>& xi, const std::vector<double>&) {
    return std::vector<double>(xi.size(), 0.8);
  };
  CHECK(population_distance(constant, ref08, s) ==
        doctest::Approx(0.5).epsilon(1e-12));

  Population linear;
  linear.role = Role::kNodeDynamics;
  linear.members = {Expr::parse("x_i")};
  auto twice = [](const std::vector<double>& xi, const std::vector<double>&) {
    std::vector<double> out(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i) out[i] = 2.0 * xi[i];
    return out;
  };
  // E|x - 2x| = E|x| = 0.5 on U[0,1], up to Monte-Carlo error.
  CHECK(population_distance(linear, twice, s) ==
        doctest::Approx(0.5).epsilon(0.2));

  Population broken;
  broken.role = Role::kNodeDynamics;
  broken.members = {Expr::parse("x_j")};  // unbound in node samples
  CHECK(population_distance(broken, identity, s) == kPairPenalty);

  DistanceSamples es = draw_distance_samples(Role::kEdgeDynamics, 0.0, 1.0,
                                             128, 4);
  CHECK(es.xj.size() == 128);
}

TEST_CASE("pair scores reward the truth and penalize divergence") {
  Graph g = gen_ba(20, 3, 5);
  Trajectory truth = sis_truth(g, 50, 6);
  Expr f = Expr::parse("-0.5*x_i");
  Expr ge = Expr::parse("(1 - x_i)*x_j");
  double best = pair_fitness(f, ge, g, truth, 2, 1);
  CHECK(best >= -1e-6);
  CHECK(best <= 0.0);

  double zero_g = pair_fitness(f, Expr::parse("0"), g, truth, 2, 1);
  CHECK(zero_g < best);

  CHECK(pair_fitness(Expr::parse("1000000*x_i"), Expr::parse("0"), g, truth,
                     2, 1) == -kPairPenalty);
}

TEST_CASE("pair scores are semantic: canonical variants agree") {
  Graph g = gen_ba(12, 2, 7);
  Trajectory truth = sis_truth(g, 30, 8);
  Expr f = Expr::parse("x_i*(0 - 0.5)");
  Expr ge = Expr::parse("x_j*(1 - x_i)");
  double a = pair_fitness(f, ge, g, truth, 1, 1);
  double b = pair_fitness(canonicalize(f), canonicalize(ge), g, truth, 1, 1);
  CHECK(a == doctest::Approx(b).epsilon(1e-9));
}

TEST_CASE("the pair evaluator caches by canonical form") {
  Graph g = gen_ba(12, 2, 9);
  Trajectory truth = sis_truth(g, 30, 10);
  PairEvaluator eval(g, truth, 1, 1);

  Expr f1 = Expr::parse("-0.5*x_i");
  Expr f2 = Expr::parse("x_i*(0 - 0.5)");  // same canonical form
  Expr ge = Expr::parse("(1 - x_i)*x_j");
  double a = eval.pair_error(f1, ge);
  double b = eval.pair_error(f2, ge);
  CHECK(a == b);
  CHECK(eval.logical_requests() == 2);
  CHECK(eval.simulations() == 1);

  std::vector<Expr> fs = {f1, Expr::parse("0.25")};
  std::vector<Expr> gs = {ge, Expr::parse("x_j")};
  std::vector<double> m = eval.error_matrix(fs, gs);
  REQUIRE(m.size() == 4);
  CHECK(m[0] == a);
  CHECK(eval.logical_requests() == 6);
  CHECK(eval.simulations() == 4);  // three new pairs plus the cached one
}

TEST_CASE("top-k mean keeps only the best scores") {
  CHECK(bigk_mean({1.0, 2.0, 3.0, 4.0}, 2) == 3.5);
  CHECK(bigk_mean({1.0, 2.0, 3.0, 4.0}, 1) == 4.0);
  CHECK(bigk_mean({1.0, 2.0, 3.0, 4.0}, 99) == 2.5);
  // Appending a score below the current top k changes nothing.
  CHECK(bigk_mean({4.0, 3.0, 1.0}, 2) == bigk_mean({4.0, 3.0, 1.0, 0.5}, 2));
}

TEST_CASE("evolution preserves size, keeps the elite, and is seeded") {
  GpConfig cfg = small_cfg();
  Population pop = init_population(Role::kNodeDynamics, cfg, 11);
  std::vector<double> fit(pop.members.size(), 0.0);
  fit[7] = 10.0;  // raw-fitness champion

  Population next = evolve_step(pop, fit, cfg, 12);
  CHECK(next.members.size() == pop.members.size());
  bool kept = false;
  for (const Expr& e : next.members) kept |= e.identical(pop.members[7]);
  CHECK(kept);

  Population redo = evolve_step(pop, fit, cfg, 12);
  for (std::size_t i = 0; i < next.members.size(); ++i)
    CHECK(redo.members[i].identical(next.members[i]));
}

TEST_CASE("without variation operators evolution only copies members") {
  GpConfig cfg = small_cfg();
  cfg.p_crossover = 0.0;
  cfg.p_subtree = 0.0;
  cfg.p_hoist = 0.0;
  cfg.p_point = 0.0;
  Population pop = init_population(Role::kEdgeDynamics, cfg, 13);
  std::vector<double> fit(pop.members.size());
  for (std::size_t i = 0; i < fit.size(); ++i)
    fit[i] = static_cast<double>(i % 5);
  Population next = evolve_step(pop, fit, cfg, 14);
  for (const Expr& e : next.members) {
    bool from_parent = false;
    for (const Expr& p : pop.members) from_parent |= e.identical(p);
    CHECK(from_parent);
  }
}

TEST_CASE("history csv header names the gating columns") {
  GenRecord rec;
  rec.generation = 1;
  rec.evolved = "F";
  rec.best_f = "x_i";
  rec.best_g = "x_j";
  std::string csv = history_to_csv({rec});
  CHECK(csv.rfind("generation,evolved_population,d_F,d_G,best_error,best_F,"
                  "best_G",
                  0) == 0);
}

TEST_CASE("search alternates by reference distance, one side per step") {
  Graph g = gen_ba(10, 2, 15);
  Trajectory truth = sis_truth(g, 25, 16);
  GpConfig cfg = small_cfg();
  cfg.population = 12;
  cfg.max_generations = 4;
  cfg.stop_eps = -1.0;  // never met: run out the full budget
  cfg.seed = 17;

  auto f_ref = [](const std::vector<double>& xi, const std::vector<double>&) {
    std::vector<double> out(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i) out[i] = -0.5 * xi[i];
    return out;
  };
  auto g_ref = [](const std::vector<double>& xi,
                  const std::vector<double>& xj) {
    std::vector<double> out(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i)
      out[i] = (1.0 - xi[i]) * xj[i];
    return out;
  };

  SearchResult res = coordinated_search(f_ref, g_ref, truth, g, cfg, false);
  CHECK(!res.converged);
  CHECK(res.generations == 4);
  REQUIRE(res.history.size() == 4);
  for (const GenRecord& rec : res.history) {
    bool f_side = rec.evolved == "F";
    bool g_side = rec.evolved == "G";
    CHECK((f_side || g_side));
    CHECK(rec.evolved == (rec.d_f > rec.d_g ? "F" : "G"));
  }

  const std::int64_t p2 = 12 * 12;
  CHECK(res.logical_pairs == 5 * p2);  // 4 generations + final selection

  SearchResult redo = coordinated_search(f_ref, g_ref, truth, g, cfg, false);
  CHECK(redo.best_f.str() == res.best_f.str());
  CHECK(redo.best_g.str() == res.best_g.str());
  CHECK(redo.best_error == res.best_error);

  SearchResult joint = coordinated_search(f_ref, g_ref, truth, g, cfg, true);
  REQUIRE(joint.history.size() == 4);
  for (const GenRecord& rec : joint.history) CHECK(rec.evolved == "FG");
  CHECK(joint.logical_pairs == 9 * p2);
  // Coordinated work is at most 60% of joint at equal generations.
  CHECK(static_cast<double>(res.logical_pairs) <=
        0.6 * static_cast<double>(joint.logical_pairs));
}

TEST_CASE("an injected ground-truth pair stops the search immediately") {
  Graph g = gen_ba(10, 3, 18);
  DynamicsSpec spec = DynamicsSpec::kur();
  Trajectory truth = simulate(spec, g, sample_x0(spec, 10, 19),
                              sample_timestamps(40, 1.0), 20);

  GpConfig cfg = small_cfg();
  cfg.population = 16;
  cfg.max_generations = 5;
  cfg.stop_eps = 1e-5;
  cfg.fitness_substeps = 2;
  cfg.seed = 20;
  cfg.inject_f = {spec.formula_node()};
  cfg.inject_g = {spec.formula_edge()};

  // Truth stand-ins for the neural references.
  auto f_ref = [](const std::vector<double>& xi, const std::vector<double>&) {
    return std::vector<double>(xi.size(), 0.75);
  };
  auto g_ref = [](const std::vector<double>& xi,
                  const std::vector<double>& xj) {
    std::vector<double> out(xi.size());
    for (std::size_t i = 0; i < xi.size(); ++i)
      out[i] = std::sin(xi[i] - xj[i]);
    return out;
  };

  SearchResult res = coordinated_search(f_ref, g_ref, truth, g, cfg, false);
  CHECK(res.converged);
  CHECK(res.generations == 1);
  REQUIRE(res.history.size() == 1);
  CHECK(res.best_error <= 1e-5);
  CHECK(res.history[0].best_error == res.best_error);
}

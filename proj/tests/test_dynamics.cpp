#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "netsr/dynamics.hpp"
#include "netsr/graph.hpp"
#include "netsr/rng.hpp"
#include "netsr/trajectory.hpp"

using namespace netsr;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

double rms(const std::vector<double>& v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc / v.size());
}

} // namespace

TEST_CASE("isolated-node rates match the closed forms") {
  Graph lone(1, {});
  CHECK(eval_rhs(DynamicsSpec::sis(), lone, {0.4})[0] ==
        doctest::Approx(-0.2).epsilon(1e-12));
  // Growth at the carrying point is exactly zero.
  CHECK(eval_rhs(DynamicsSpec::lv(), lone, {1.5})[0] == 0.0);
  CHECK(eval_rhs(DynamicsSpec::kur(), lone, {1.234})[0] == 0.75);
}

TEST_CASE("equal phases exchange no coupling") {
  Graph pair(2, {{0, 1, 1.0}});
  std::vector<double> rates = eval_rhs(DynamicsSpec::kur(), pair, {0.9, 0.9});
  CHECK(rates[0] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(rates[1] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("all-susceptible epidemic state is absorbing") {
  Graph g = gen_ba(20, 3, 2);
  std::vector<double> rates =
      eval_rhs(DynamicsSpec::sis(), g, std::vector<double>(20, 0.0));
  for (double r : rates) CHECK(r == 0.0);
}

TEST_CASE("constant-rate phase system integrates linearly") {
  Graph lone(1, {});
  Trajectory traj =
      simulate(DynamicsSpec::kur(), lone, {0.0}, {0.0, 0.5, 1.0}, 20);
  CHECK(traj.at(0, 0) == 0.0);
  CHECK(traj.at(1, 0) == doctest::Approx(0.375).epsilon(1e-12));
  CHECK(traj.at(2, 0) == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("population at the stable point stays put") {
  Graph lone(1, {});
  Trajectory traj =
      simulate(DynamicsSpec::lv(), lone, {1.5}, sample_timestamps(10, 2.0), 20);
  for (int k = 0; k < traj.n_times(); ++k)
    CHECK(traj.at(k, 0) == doctest::Approx(1.5).epsilon(1e-9));
}

TEST_CASE("halving the solver step cuts the error sixteenfold") {
  // Step counts sit in the asymptotic regime; coarser pairs wander well
  // outside 16 +- 25% on stiffer seeds.
  Graph g = gen_ba(20, 3, 4);
  DynamicsSpec spec = DynamicsSpec::kur();
  std::vector<double> x0 = sample_x0(spec, 20, 6);
  std::vector<double> ts = {0.0, 0.5, 1.0};
  Trajectory ref = simulate(spec, g, x0, ts, 256);
  double err8 = max_abs_diff(simulate(spec, g, x0, ts, 8).data, ref.data);
  double err16 = max_abs_diff(simulate(spec, g, x0, ts, 16).data, ref.data);
  REQUIRE(err16 > 0.0);
  double ratio = err8 / err16;
  CHECK(ratio > 12.0);
  CHECK(ratio < 20.0);
}

TEST_CASE("runaway states raise an integration error") {
  DynamicsSpec bad = DynamicsSpec::symbolic(Expr::parse("1000000*x_i"),
                                            Expr::parse("0"));
  Graph lone(1, {});
  CHECK_THROWS_AS(simulate(bad, lone, {1.0}, {0.0, 0.5, 1.0}, 20),
                  IntegrationError);
}

TEST_CASE("built-in rates equal their formula trees") {
  std::vector<DynamicsSpec> specs = {
      DynamicsSpec::sis(), DynamicsSpec::lv(), DynamicsSpec::kur(),
      DynamicsSpec::wc(), DynamicsSpec::wc(0.75, 0.5, true)};
  std::mt19937_64 rng = make_rng(31);
  for (const DynamicsSpec& spec : specs) {
    DynamicsSpec sym =
        DynamicsSpec::symbolic(spec.formula_node(), spec.formula_edge());
    Graph g = gen_er(15, 0.3, rng());
    std::uniform_real_distribution<double> u(spec.x0_lo(), spec.x0_hi());
    std::vector<double> x(15);
    for (double& v : x) v = u(rng);
    std::vector<double> a = eval_rhs(spec, g, x);
    std::vector<double> b = eval_rhs(sym, g, x);
    CHECK(max_abs_diff(a, b) < 1e-12);
  }
}

TEST_CASE("relabeling nodes permutes rates and trajectories") {
  Graph g = gen_ba(12, 2, 5);
  DynamicsSpec spec = DynamicsSpec::sis();
  std::vector<double> x = sample_x0(spec, 12, 7);

  std::vector<int> perm(12);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng = make_rng(8);
  std::shuffle(perm.begin(), perm.end(), rng);

  std::vector<Edge> pedges;
  for (const Edge& e : g.edges())
    pedges.push_back({perm[e.u], perm[e.v], e.weight});
  Graph pg(12, pedges);
  std::vector<double> px(12);
  for (int v = 0; v < 12; ++v) px[perm[v]] = x[v];

  std::vector<double> r = eval_rhs(spec, g, x);
  std::vector<double> pr = eval_rhs(spec, pg, px);
  for (int v = 0; v < 12; ++v)
    CHECK(pr[perm[v]] == doctest::Approx(r[v]).epsilon(1e-12));

  std::vector<double> ts = sample_timestamps(5, 1.0);
  Trajectory a = simulate(spec, g, x, ts, 10);
  Trajectory b = simulate(spec, pg, px, ts, 10);
  for (int k = 0; k < a.n_times(); ++k)
    for (int v = 0; v < 12; ++v)
      CHECK(b.at(k, perm[v]) == doctest::Approx(a.at(k, v)).epsilon(1e-10));
}

TEST_CASE("epidemic states stay inside the unit interval") {
  Graph g = gen_ba(30, 3, 9);
  DynamicsSpec spec = DynamicsSpec::sis();
  std::vector<double> x0 = sample_x0(spec, 30, 10);
  Trajectory traj = simulate(spec, g, x0, sample_timestamps(50, 2.0), 20);
  for (double v : traj.data) {
    CHECK(v >= -1e-9);
    CHECK(v <= 1.0 + 1e-9);
  }
}

TEST_CASE("timestamp grids are regular with exact endpoints") {
  std::vector<double> ts = sample_timestamps(100, 1.0);
  REQUIRE(ts.size() == 100);
  CHECK(ts.front() == 0.0);
  CHECK(ts.back() == 1.0);
  for (std::size_t k = 0; k + 1 < ts.size(); ++k)
    CHECK(ts[k + 1] - ts[k] == doctest::Approx(1.0 / 99.0).epsilon(1e-12));

  CHECK(sample_timestamps(2, 1.0) == std::vector<double>{0.0, 1.0});
  CHECK(sample_timestamps(5, 2.0) ==
        std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0});
}

TEST_CASE("noise injection hits the requested signal-to-noise ratio") {
  // 100 nodes x 1000 frames = 1e5 samples keeps the RMS estimate tight.
  Trajectory traj;
  traj.timestamps = sample_timestamps(1000, 1.0);
  traj.n_nodes = 100;
  traj.data.resize(1000 * 100);
  for (int k = 0; k < 1000; ++k)
    for (int v = 0; v < 100; ++v)
      traj.at(k, v) = std::sin(0.01 * k + 0.3 * v) + 0.2;

  Trajectory noisy = add_noise(traj, 20.0, 99);
  CHECK(noisy.meta == TrajMeta::kNoisy);
  CHECK(noisy.snr_db == 20.0);
  std::vector<double> noise(traj.data.size());
  for (std::size_t i = 0; i < noise.size(); ++i)
    noise[i] = noisy.data[i] - traj.data[i];
  double achieved = rms(noise) / rms(traj.data);
  CHECK(achieved == doctest::Approx(0.1).epsilon(0.02));

  Trajectory again = add_noise(traj, 20.0, 99);
  CHECK(again.data == noisy.data);
  Trajectory other = add_noise(traj, 20.0, 100);
  CHECK(other.data != noisy.data);

  Trajectory clean =
      add_noise(traj, std::numeric_limits<double>::infinity(), 99);
  CHECK(clean.data == traj.data);
  CHECK(clean.meta == traj.meta);
}

TEST_CASE("trajectory CSV round-trips bit-exactly") {
  Graph g = gen_ba(8, 2, 12);
  DynamicsSpec spec = DynamicsSpec::lv();
  Trajectory traj =
      simulate(spec, g, sample_x0(spec, 8, 13), sample_timestamps(9, 1.0), 10);
  std::string text = write_trajectory_csv(traj);
  CHECK(text.rfind("t,node,dim,value", 0) == 0);
  Trajectory back = read_trajectory_csv(text);
  CHECK(back.timestamps == traj.timestamps);
  CHECK(back.n_nodes == traj.n_nodes);
  CHECK(back.dim == traj.dim);
  CHECK(back.data == traj.data);
}

TEST_CASE("trajectory CSV reader rejects non-increasing timestamps") {
  std::string text =
      "t,node,dim,value\n"
      "0,0,0,1.0\n"
      "0.5,0,0,1.1\n"
      "0.5,0,0,1.2\n";
  CHECK_THROWS(read_trajectory_csv(text));
}

TEST_CASE("initial-state draws cover the state range deterministically") {
  DynamicsSpec sis = DynamicsSpec::sis();
  DynamicsSpec kur = DynamicsSpec::kur();
  std::vector<double> a = sample_x0(sis, 100, 17);
  std::vector<double> b = sample_x0(kur, 100, 17);
  for (double v : a) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  double kmax = 0.0;
  for (double v : b) {
    CHECK(v >= 0.0);
    CHECK(v <= 2.0 * M_PI);
    kmax = std::max(kmax, v);
  }
  CHECK(kmax > 1.0);  // phases really use the wider range
  CHECK(sample_x0(sis, 100, 17) == a);
  CHECK(sample_x0(sis, 100, 18) != a);
}

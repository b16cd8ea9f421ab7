#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "netsr/bench.hpp"
#include "netsr/dynamics.hpp"
#include "netsr/graph.hpp"
#include "netsr/sindy.hpp"
#include "netsr/trajectory.hpp"

using namespace netsr;

namespace {

// Single-signal trajectory: every node carries f(t).
Trajectory scalar_traj(const std::function<double(double)>& f, int frames,
                       double h, int n_nodes = 1) {
  Trajectory tr;
  tr.n_nodes = n_nodes;
  tr.dim = 1;
  for (int i = 0; i < frames; ++i) {
    double t = i * h;
    tr.timestamps.push_back(t);
    for (int v = 0; v < n_nodes; ++v) tr.data.push_back(f(t));
  }
  return tr;
}

double max_deriv_error(const std::function<double(double)>& f,
                       const std::function<double(double)>& df, int frames,
                       double h) {
  Trajectory tr = scalar_traj(f, frames, h);
  std::vector<double> d = five_point_derivative(tr);
  double worst = 0.0;
  for (int i = 0; i < frames; ++i)
    worst = std::max(worst, std::abs(d[i] - df(i * h)));
  return worst;
}

} // namespace

TEST_CASE("five-point stencil is exact on low-degree polynomials") {
  // Linear: exact to machine precision at every frame, ends included.
  CHECK(max_deriv_error([](double t) { return t; },
                        [](double) { return 1.0; }, 20, 0.05) < 1e-13);
  // Cubic and quartic are inside the stencil's exactness degree.
  CHECK(max_deriv_error([](double t) { return t * t * t; },
                        [](double t) { return 3.0 * t * t; }, 25,
                        0.08) < 1e-10);
  CHECK(max_deriv_error([](double t) { return t * t * t * t; },
                        [](double t) { return 4.0 * t * t * t; }, 25,
                        0.08) < 1e-9);
}

TEST_CASE("five-point stencil converges at fourth order") {
  auto f = [](double t) { return std::sin(t); };
  auto df = [](double t) { return std::cos(t); };
  double coarse = max_deriv_error(f, df, 41, 0.05);
  double fine = max_deriv_error(f, df, 81, 0.025);
  double ratio = coarse / fine;
  CHECK(ratio > 12.0);
  CHECK(ratio < 20.0);
}

TEST_CASE("five-point stencil rejects unusable input") {
  Trajectory tr = scalar_traj([](double t) { return t; }, 10, 0.1);
  tr.timestamps[4] += 0.03;  // break the regular spacing
  CHECK_THROWS_AS(five_point_derivative(tr), std::invalid_argument);

  Trajectory few = scalar_traj([](double t) { return t; }, 4, 0.1);
  CHECK_THROWS_AS(five_point_derivative(few), std::invalid_argument);

  Trajectory wide = scalar_traj([](double t) { return t; }, 10, 0.1);
  wide.dim = 2;
  wide.data.resize(wide.data.size() * 2, 0.0);
  CHECK_THROWS_AS(five_point_derivative(wide), std::invalid_argument);
}

TEST_CASE("design matrix columns match their formulas") {
  FunctionLibrary lib = FunctionLibrary::polynomial();
  REQUIRE(lib.cols() == 12);
  REQUIRE(lib.column_names()[0] == "node:1");
  REQUIRE(lib.column_names()[10] == "edge:x_i*x_j");

  Graph g = gen_ba(8, 2, 21);
  DynamicsSpec spec = DynamicsSpec::sis();
  Trajectory tr = simulate(spec, g, sample_x0(spec, 8, 22),
                           sample_timestamps(12, 1.0), 10);
  Eigen::MatrixXd design = build_design(tr, g, lib);
  REQUIRE(design.rows() == 12 * 8);
  REQUIRE(design.cols() == 12);

  // Constant node column is all ones.
  for (long r = 0; r < design.rows(); ++r) CHECK(design(r, 0) == 1.0);

  // Edge column x_i*x_j against a brute-force neighbor sum.
  for (int i = 0; i < tr.n_times(); ++i) {
    for (int v = 0; v < 8; ++v) {
      double acc = 0.0;
      for (const auto& [u, w] : g.neighbors(v))
        acc += w * tr.at(i, v) * tr.at(i, u);
      CHECK(design(static_cast<long>(i) * 8 + v, 10) ==
            doctest::Approx(acc).epsilon(1e-12));
    }
  }

  // Without edges every edge column vanishes.
  Graph lone(5, {});
  Trajectory tr2 = simulate(spec, lone, sample_x0(spec, 5, 23),
                            sample_timestamps(8, 1.0), 10);
  Eigen::MatrixXd d2 = build_design(tr2, lone, lib);
  CHECK(d2.rightCols(8).isZero(0.0));
}

TEST_CASE("thresholded least squares recovers a planted sparse model") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Eigen::MatrixXd design(60, 10);
  for (long r = 0; r < design.rows(); ++r)
    for (long c = 0; c < design.cols(); ++c) design(r, c) = gauss(rng);
  Eigen::VectorXd y = 2.0 * design.col(1) + 0.5 * design.col(7);

  SparseModel model = stlsq(design, y, 0.1);
  CHECK(model.support(1e-8) == std::vector<int>{1, 7});
  CHECK(model.coef(1) == doctest::Approx(2.0).epsilon(1e-8));
  CHECK(model.coef(7) == doctest::Approx(0.5).epsilon(1e-8));
  CHECK(!model.rank_warning);
  CHECK(model.iterations >= 1);

  SparseModel dense = stlsq(design, y, 0.0);
  CHECK(dense.support(0.0).size() == 10);  // nothing is thresholded away

  SparseModel empty = stlsq(design, y, 100.0);
  CHECK(empty.support(0.0).empty());
  CHECK(empty.coef.isZero(0.0));

  Eigen::MatrixXd dup = design;
  dup.col(3) = dup.col(2);
  SparseModel warned = stlsq(dup, y, 0.1);
  CHECK(warned.rank_warning);
}

TEST_CASE("single-phase regression recovers clean contagion dynamics") {
  Graph g = gen_ba(30, 3, 41);
  DynamicsSpec spec = DynamicsSpec::sis();
  Trajectory tr = simulate(spec, g, sample_x0(spec, 30, 42),
                           sample_timestamps(100, 1.0), 20);
  SparseFitResult res =
      sindy_fit(tr, g, FunctionLibrary::polynomial(), 0.05);
  REQUIRE(res.ok);
  CHECK(!res.rank_warning);
  CHECK(check_recovery(res.node_expr, res.edge_expr, spec, 0.0, 1.0));
}

TEST_CASE("two-phase cutoff removes weak survivors of the first pass") {
  Graph g = gen_ba(30, 3, 43);
  DynamicsSpec spec = DynamicsSpec::symbolic(
      Expr::parse("0.09*x_i*x_i - 0.5*x_i"), Expr::parse("(1 - x_i)*x_j"));
  Trajectory tr = simulate(spec, g, sample_x0(spec, 30, 44),
                           sample_timestamps(100, 1.0), 20);
  FunctionLibrary lib = FunctionLibrary::polynomial();

  SparseFitResult single = sindy_fit(tr, g, lib, 0.05);
  REQUIRE(single.ok);
  auto has = [](const SparseFitResult& r, const std::string& name) {
    return std::find(r.active_columns.begin(), r.active_columns.end(),
                     name) != r.active_columns.end();
  };
  CHECK(has(single, "node:x_i*x_i"));  // 0.09 survives lambda = 0.05

  SparseFitResult two = tp_sindy(tr, g, lib, 0.05, 0.05, 0.1);
  REQUIRE(two.ok);
  CHECK(!has(two, "node:x_i*x_i"));  // 0.09 falls to the 0.1 cutoff
  CHECK(has(two, "node:x_i"));
  CHECK(has(two, "edge:x_j"));
}

TEST_CASE("an equilibrium trajectory yields an explicit empty model") {
  Graph g = gen_er(10, 0.3, 45);
  Trajectory tr = scalar_traj([](double) { return 0.37; }, 10, 0.1, 10);
  SparseFitResult res = tp_sindy(tr, g, FunctionLibrary::polynomial(), 0.05,
                                 0.05, 0.1);
  CHECK(!res.ok);
  CHECK(res.active_columns.empty());
  CHECK(res.node_expr.str() == "0");
  CHECK(res.edge_expr.str() == "0");
}

TEST_CASE("two-phase regression mirrors the published failure pattern") {
  FunctionLibrary lib = FunctionLibrary::extended();

  // Clean oscillator data: recovered.
  Graph g = gen_ba(50, 3, 46);
  DynamicsSpec kur = DynamicsSpec::kur();
  Trajectory clean = simulate(kur, g, sample_x0(kur, 50, 47),
                              sample_timestamps(100, 1.0), 20);
  SparseFitResult rec = tp_sindy(clean, g, lib, 0.05, 0.05, 0.1);
  REQUIRE(rec.ok);
  CHECK(check_recovery(rec.node_expr, rec.edge_expr, kur, 0.0,
                       2.0 * 3.14159265358979323846));

  // Saturating coupling outside the library: not recovered.
  DynamicsSpec wc = DynamicsSpec::wc();
  Trajectory wcdata = simulate(wc, g, sample_x0(wc, 50, 48),
                               sample_timestamps(100, 1.0), 20);
  SparseFitResult miss = tp_sindy(wcdata, g, lib, 0.05, 0.05, 0.1);
  CHECK(!check_recovery(miss.node_expr, miss.edge_expr, wc, 0.0, 1.0));

  // Moderate measurement noise wrecks the stencil derivatives.
  Trajectory noisy = add_noise(clean, 30.0, 49);
  SparseFitResult under_noise = tp_sindy(noisy, g, lib, 0.05, 0.05, 0.1);
  CHECK(!check_recovery(under_noise.node_expr, under_noise.edge_expr, kur,
                        0.0, 2.0 * 3.14159265358979323846));
}

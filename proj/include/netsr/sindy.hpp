#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "netsr/expr.hpp"
#include "netsr/graph.hpp"
#include "netsr/trajectory.hpp"

namespace netsr {

// Fourth-order derivative estimate on a regular grid: the classic centered
// five-point stencil inside, one-sided five-point stencils at both ends.
// Result has the trajectory's [time, node] shape (dim must be 1).
// Throws std::invalid_argument on irregular spacing or fewer than 5 frames.
std::vector<double> five_point_derivative(const Trajectory& traj);

// Basis entries are formula templates over x_i (node) or x_i, x_j (edge).
// Edge entries enter the regression as neighbor sums, matching the coupled
// dynamics' aggregation.
struct LibEntry {
  std::string name;
  Expr expr;
};

struct FunctionLibrary {
  std::vector<LibEntry> node;
  std::vector<LibEntry> edge;

  // Plain polynomial library (degree <= 3 with cross terms).
  static FunctionLibrary polynomial();
  // Polynomial entries plus sin/cos/exp/sigmoid terms.
  static FunctionLibrary extended();

  int cols() const {
    return static_cast<int>(node.size() + edge.size());
  }
  std::vector<std::string> column_names() const;
};

// Rows ordered (time-major, node within time); node columns first.
Eigen::MatrixXd build_design(const Trajectory& traj, const Graph& graph,
                             const FunctionLibrary& lib);

struct SparseModel {
  Eigen::VectorXd coef;
  bool rank_warning = false;
  int iterations = 0;

  std::vector<int> support(double tol = 0.0) const;
};

// Sequential thresholded least squares: fit, zero |coef| < threshold,
// refit on the surviving support until it stops changing.
SparseModel stlsq(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                  double threshold, int max_iters = 20);

struct SparseFitResult {
  bool ok = false;  // false when no column survived
  Expr node_expr;   // zero constant when the node part is empty
  Expr edge_expr;
  std::vector<std::string> active_columns;
  Eigen::VectorXd coef;  // full-length, zeros off support
  bool rank_warning = false;
};

// Single-phase sparse regression on five-point derivatives.
SparseFitResult sindy_fit(const Trajectory& traj, const Graph& graph,
                          const FunctionLibrary& lib, double threshold);

// Two-phase variant: stlsq with lambda1, drop surviving terms with
// |coef| < cutoff, then refit the remainder with lambda2.
SparseFitResult tp_sindy(const Trajectory& traj, const Graph& graph,
                         const FunctionLibrary& lib, double lambda1,
                         double lambda2, double cutoff);

} // namespace netsr

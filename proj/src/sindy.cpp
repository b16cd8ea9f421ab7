#include "netsr/sindy.hpp"

#include <cmath>
#include <stdexcept>

namespace netsr {

std::vector<double> five_point_derivative(const Trajectory& traj) {
  if (traj.dim != 1)
    throw std::invalid_argument("five-point stencil expects dim 1");
  const int k = traj.n_times();
  if (k < 5) throw std::invalid_argument("need at least 5 timestamps");
  const double h = traj.timestamps[1] - traj.timestamps[0];
  for (int i = 1; i < k; ++i) {
    double gap = traj.timestamps[i] - traj.timestamps[i - 1];
    if (std::abs(gap - h) > 1e-9 * std::max(1.0, std::abs(h)))
      throw std::invalid_argument("five-point stencil needs regular spacing");
  }

  const int n = traj.n_nodes;
  std::vector<double> deriv(static_cast<std::size_t>(k) * n);
  auto f = [&](int i, int v) { return traj.at(i, v); };
  for (int v = 0; v < n; ++v) {
    deriv[static_cast<std::size_t>(0) * n + v] =
        (-25.0 * f(0, v) + 48.0 * f(1, v) - 36.0 * f(2, v) + 16.0 * f(3, v) -
         3.0 * f(4, v)) /
        (12.0 * h);
    deriv[static_cast<std::size_t>(1) * n + v] =
        (-3.0 * f(0, v) - 10.0 * f(1, v) + 18.0 * f(2, v) - 6.0 * f(3, v) +
         f(4, v)) /
        (12.0 * h);
    for (int i = 2; i < k - 2; ++i) {
      deriv[static_cast<std::size_t>(i) * n + v] =
          (-f(i + 2, v) + 8.0 * f(i + 1, v) - 8.0 * f(i - 1, v) +
           f(i - 2, v)) /
          (12.0 * h);
    }
    deriv[static_cast<std::size_t>(k - 2) * n + v] =
        (3.0 * f(k - 1, v) + 10.0 * f(k - 2, v) - 18.0 * f(k - 3, v) +
         6.0 * f(k - 4, v) - f(k - 5, v)) /
        (12.0 * h);
    deriv[static_cast<std::size_t>(k - 1) * n + v] =
        (25.0 * f(k - 1, v) - 48.0 * f(k - 2, v) + 36.0 * f(k - 3, v) -
         16.0 * f(k - 4, v) + 3.0 * f(k - 5, v)) /
        (12.0 * h);
  }
  return deriv;
}

namespace {

LibEntry entry(const std::string& text) { return {text, Expr::parse(text)}; }

} // namespace

FunctionLibrary FunctionLibrary::polynomial() {
  FunctionLibrary lib;
  lib.node = {entry("1"), entry("x_i"), entry("x_i*x_i"),
              entry("x_i*x_i*x_i")};
  lib.edge = {entry("x_i"),         entry("x_i*x_i"),
              entry("x_i*x_i*x_i"), entry("x_j"),
              entry("x_j*x_j"),     entry("x_j*x_j*x_j"),
              entry("x_i*x_j"),     entry("x_i*x_j*x_j")};
  return lib;
}

FunctionLibrary FunctionLibrary::extended() {
  FunctionLibrary lib = polynomial();
  lib.node.push_back(entry("sin(x_i)"));
  lib.node.push_back(entry("cos(x_i)"));
  lib.node.push_back(entry("exp(x_i)"));
  lib.edge.push_back(entry("sin(x_i)"));
  lib.edge.push_back(entry("cos(x_i)"));
  lib.edge.push_back(entry("sin(x_j)"));
  lib.edge.push_back(entry("cos(x_j)"));
  lib.edge.push_back(entry("sin(x_i - x_j)"));
  lib.edge.push_back(entry("cos(x_i - x_j)"));
  lib.edge.push_back(entry("sigmoid(x_j)"));
  lib.edge.push_back(entry("sigmoid(x_j - x_i)"));
  lib.edge.push_back(entry("exp(x_i)"));
  return lib;
}

std::vector<std::string> FunctionLibrary::column_names() const {
  std::vector<std::string> names;
  for (const auto& e : node) names.push_back("node:" + e.name);
  for (const auto& e : edge) names.push_back("edge:" + e.name);
  return names;
}

Eigen::MatrixXd build_design(const Trajectory& traj, const Graph& graph,
                             const FunctionLibrary& lib) {
  if (traj.dim != 1)
    throw std::invalid_argument("design matrix expects dim 1");
  if (traj.n_nodes != graph.n_nodes())
    throw std::invalid_argument("trajectory/graph node count mismatch");
  const int k = traj.n_times();
  const int n = traj.n_nodes;
  const long rows = static_cast<long>(k) * n;
  Eigen::MatrixXd design(rows, lib.cols());

  for (std::size_t c = 0; c < lib.node.size(); ++c) {
    const Expr& e = lib.node[c].expr;
    for (int i = 0; i < k; ++i) {
      for (int v = 0; v < n; ++v) {
        auto val = e.try_eval(traj.at(i, v));
        design(static_cast<long>(i) * n + v, static_cast<long>(c)) =
            val ? *val : 0.0;
      }
    }
  }
  for (std::size_t c = 0; c < lib.edge.size(); ++c) {
    const Expr& e = lib.edge[c].expr;
    long col = static_cast<long>(lib.node.size() + c);
    for (int i = 0; i < k; ++i) {
      for (int v = 0; v < n; ++v) {
        double acc = 0.0;
        for (const auto& [u, w] : graph.neighbors(v)) {
          auto val = e.try_eval(traj.at(i, v), traj.at(i, u), 0.0);
          acc += w * (val ? *val : 0.0);
        }
        design(static_cast<long>(i) * n + v, col) = acc;
      }
    }
  }
  return design;
}

std::vector<int> SparseModel::support(double tol) const {
  std::vector<int> s;
  for (int c = 0; c < coef.size(); ++c)
    if (std::abs(coef(c)) > tol) s.push_back(c);
  return s;
}

SparseModel stlsq(const Eigen::MatrixXd& design, const Eigen::VectorXd& y,
                  double threshold, int max_iters) {
  if (design.rows() != y.size())
    throw std::invalid_argument("design/target row mismatch");
  if (threshold < 0) throw std::invalid_argument("threshold must be >= 0");
  const int cols = static_cast<int>(design.cols());
  std::vector<char> active(cols, 1);
  SparseModel model;
  model.coef = Eigen::VectorXd::Zero(cols);

  for (int iter = 0; iter < max_iters; ++iter) {
    ++model.iterations;
    std::vector<int> idx;
    for (int c = 0; c < cols; ++c)
      if (active[c]) idx.push_back(c);
    model.coef.setZero();
    if (idx.empty()) break;

    Eigen::MatrixXd sub(design.rows(), idx.size());
    for (std::size_t c = 0; c < idx.size(); ++c) sub.col(c) = design.col(idx[c]);
    // Minimum-norm least squares; rank deficiency is tolerated but flagged.
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(sub);
    if (cod.rank() < static_cast<long>(idx.size())) model.rank_warning = true;
    Eigen::VectorXd beta = cod.solve(y);
    for (std::size_t c = 0; c < idx.size(); ++c) model.coef(idx[c]) = beta(c);

    bool changed = false;
    for (int c = 0; c < cols; ++c) {
      if (active[c] && std::abs(model.coef(c)) < threshold) {
        active[c] = 0;
        model.coef(c) = 0.0;
        changed = true;
      }
    }
    if (!changed) break;
  }
  return model;
}

namespace {

// Linear combination of surviving library entries as an expression tree.
Expr combine(const std::vector<LibEntry>& entries,
             const std::vector<double>& coefs) {
  ExprPtr acc;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (coefs[i] == 0.0) continue;
    ExprPtr term =
        make_binary(Op::kMul, make_const(coefs[i]), entries[i].expr.root());
    acc = acc ? make_binary(Op::kAdd, acc, term) : term;
  }
  return acc ? Expr(acc) : Expr(make_const(0.0));
}

SparseFitResult assemble(const FunctionLibrary& lib, const SparseModel& model) {
  SparseFitResult res;
  res.coef = model.coef;
  res.rank_warning = model.rank_warning;
  std::vector<double> node_coefs, edge_coefs;
  for (std::size_t c = 0; c < lib.node.size(); ++c)
    node_coefs.push_back(model.coef(static_cast<long>(c)));
  for (std::size_t c = 0; c < lib.edge.size(); ++c)
    edge_coefs.push_back(model.coef(static_cast<long>(lib.node.size() + c)));
  res.node_expr = combine(lib.node, node_coefs);
  res.edge_expr = combine(lib.edge, edge_coefs);
  auto names = lib.column_names();
  for (int c : model.support()) res.active_columns.push_back(names[c]);
  res.ok = !res.active_columns.empty();
  return res;
}

Eigen::VectorXd derivative_targets(const Trajectory& traj) {
  std::vector<double> d = five_point_derivative(traj);
  return Eigen::Map<Eigen::VectorXd>(d.data(), static_cast<long>(d.size()));
}

} // namespace

SparseFitResult sindy_fit(const Trajectory& traj, const Graph& graph,
                          const FunctionLibrary& lib, double threshold) {
  Eigen::MatrixXd design = build_design(traj, graph, lib);
  Eigen::VectorXd y = derivative_targets(traj);
  return assemble(lib, stlsq(design, y, threshold));
}

SparseFitResult tp_sindy(const Trajectory& traj, const Graph& graph,
                         const FunctionLibrary& lib, double lambda1,
                         double lambda2, double cutoff) {
  Eigen::MatrixXd design = build_design(traj, graph, lib);
  Eigen::VectorXd y = derivative_targets(traj);

  SparseModel phase1 = stlsq(design, y, lambda1);
  std::vector<int> keep = phase1.support(cutoff);
  if (keep.empty()) {
    SparseFitResult res;
    res.coef = Eigen::VectorXd::Zero(design.cols());
    res.rank_warning = phase1.rank_warning;
    res.node_expr = Expr(make_const(0.0));
    res.edge_expr = Expr(make_const(0.0));
    res.ok = false;
    return res;
  }

  Eigen::MatrixXd sub(design.rows(), keep.size());
  for (std::size_t c = 0; c < keep.size(); ++c) sub.col(c) = design.col(keep[c]);
  SparseModel phase2 = stlsq(sub, y, lambda2);

  SparseModel full;
  full.coef = Eigen::VectorXd::Zero(design.cols());
  full.rank_warning = phase1.rank_warning || phase2.rank_warning;
  full.iterations = phase1.iterations + phase2.iterations;
  for (std::size_t c = 0; c < keep.size(); ++c)
    full.coef(keep[c]) = phase2.coef(static_cast<long>(c));
  return assemble(lib, full);
}

} // namespace netsr

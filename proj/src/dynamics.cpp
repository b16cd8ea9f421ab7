#include "netsr/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "netsr/rng.hpp"

namespace netsr {

DynamicsSpec DynamicsSpec::sis(double delta) {
  DynamicsSpec s;
  s.kind = DynKind::kSis;
  s.delta = delta;
  return s;
}

DynamicsSpec DynamicsSpec::lv(double alpha, double theta) {
  DynamicsSpec s;
  s.kind = DynKind::kLv;
  s.alpha = alpha;
  s.theta = theta;
  return s;
}

DynamicsSpec DynamicsSpec::kur(double omega) {
  DynamicsSpec s;
  s.kind = DynKind::kKur;
  s.omega = omega;
  return s;
}

DynamicsSpec DynamicsSpec::wc(double tau, double mu, bool flipped_sign) {
  DynamicsSpec s;
  s.kind = DynKind::kWc;
  s.tau = tau;
  s.mu = mu;
  s.wc_flipped_sign = flipped_sign;
  return s;
}

DynamicsSpec DynamicsSpec::symbolic(Expr node, Expr edge) {
  DynamicsSpec s;
  s.kind = DynKind::kSymbolic;
  s.node_expr = std::move(node);
  s.edge_expr = std::move(edge);
  if (s.node_expr.uses(Op::kVarXj))
    throw std::invalid_argument("node formula must not reference x_j");
  return s;
}

DynamicsSpec DynamicsSpec::by_name(const std::string& name) {
  if (name == "sis") return sis();
  if (name == "lv") return lv();
  if (name == "kur") return kur();
  if (name == "wc") return wc();
  throw std::invalid_argument("unknown dynamics '" + name + "'");
}

const char* DynamicsSpec::name() const {
  switch (kind) {
    case DynKind::kSis: return "sis";
    case DynKind::kLv: return "lv";
    case DynKind::kKur: return "kur";
    case DynKind::kWc: return "wc";
    case DynKind::kSymbolic: return "symbolic";
  }
  return "?";
}

Expr DynamicsSpec::formula_node() const {
  ExprPtr xi = make_var(Op::kVarXi);
  switch (kind) {
    case DynKind::kSis:
      return Expr(make_binary(Op::kMul, make_const(-delta), xi));
    case DynKind::kLv:
      return Expr(make_binary(
          Op::kMul, xi,
          make_binary(Op::kSub, make_const(alpha),
                      make_binary(Op::kMul, make_const(theta), xi))));
    case DynKind::kKur:
      return Expr(make_const(omega));
    case DynKind::kWc:
      return Expr(make_neg(xi));
    case DynKind::kSymbolic:
      return node_expr;
  }
  return Expr();
}

Expr DynamicsSpec::formula_edge() const {
  ExprPtr xi = make_var(Op::kVarXi);
  ExprPtr xj = make_var(Op::kVarXj);
  switch (kind) {
    case DynKind::kSis:
      return Expr(make_binary(
          Op::kMul, make_binary(Op::kSub, make_const(1.0), xi), xj));
    case DynKind::kLv:
      return Expr(make_neg(make_binary(Op::kMul, xi, xj)));
    case DynKind::kKur:
      return Expr(make_unary(Op::kSin, make_binary(Op::kSub, xi, xj)));
    case DynKind::kWc: {
      double a = wc_flipped_sign ? -tau : tau;
      return Expr(make_unary(
          Op::kSigmoid,
          make_binary(Op::kMul, make_const(a),
                      make_binary(Op::kSub, xj, make_const(mu)))));
    }
    case DynKind::kSymbolic:
      return edge_expr;
  }
  return Expr();
}

double DynamicsSpec::x0_hi() const {
  return kind == DynKind::kKur ? 2.0 * M_PI : 1.0;
}

namespace {

// Reusable right-hand-side evaluator; symbolic formulas are compiled once
// and evaluated across node/edge lanes.
class RhsEngine {
public:
  RhsEngine(const DynamicsSpec& spec, const Graph& graph)
      : spec_(spec), graph_(graph), de_(graph) {
    if (spec.kind == DynKind::kSymbolic) {
      node_prog_ = CompiledExpr(spec.node_expr);
      edge_prog_ = CompiledExpr(spec.edge_expr);
      xi_lane_.resize(de_.size());
      xj_lane_.resize(de_.size());
      edge_out_.resize(de_.size());
    }
  }

  void compute(const std::vector<double>& x, double t,
               std::vector<double>& dxdt) {
    const int n = graph_.n_nodes();
    dxdt.resize(n);
    switch (spec_.kind) {
      case DynKind::kSis:
        for (int v = 0; v < n; ++v) dxdt[v] = -spec_.delta * x[v];
        for (int e = 0; e < de_.size(); ++e) {
          double xv = x[de_.dst[e]], xu = x[de_.src[e]];
          dxdt[de_.dst[e]] += de_.weight[e] * (1.0 - xv) * xu;
        }
        break;
      case DynKind::kLv:
        for (int v = 0; v < n; ++v)
          dxdt[v] = x[v] * (spec_.alpha - spec_.theta * x[v]);
        for (int e = 0; e < de_.size(); ++e)
          dxdt[de_.dst[e]] -= de_.weight[e] * x[de_.dst[e]] * x[de_.src[e]];
        break;
      case DynKind::kKur:
        for (int v = 0; v < n; ++v) dxdt[v] = spec_.omega;
        for (int e = 0; e < de_.size(); ++e)
          dxdt[de_.dst[e]] +=
              de_.weight[e] * std::sin(x[de_.dst[e]] - x[de_.src[e]]);
        break;
      case DynKind::kWc: {
        double a = spec_.wc_flipped_sign ? -spec_.tau : spec_.tau;
        for (int v = 0; v < n; ++v) dxdt[v] = -x[v];
        for (int e = 0; e < de_.size(); ++e)
          dxdt[de_.dst[e]] +=
              de_.weight[e] * sigmoid(a * (x[de_.src[e]] - spec_.mu));
        break;
      }
      case DynKind::kSymbolic: {
        bool ok = node_prog_.eval_lanes(x.data(), nullptr, t, dxdt.data(), n,
                                        scratch_);
        if (!ok) {
          for (int v = 0; v < n; ++v)
            if (!std::isfinite(dxdt[v]))
              throw IntegrationError("node formula domain error", t, v);
        }
        for (int e = 0; e < de_.size(); ++e) {
          xi_lane_[e] = x[de_.dst[e]];
          xj_lane_[e] = x[de_.src[e]];
        }
        ok = edge_prog_.eval_lanes(xi_lane_.data(), xj_lane_.data(), t,
                                   edge_out_.data(), de_.size(), scratch_);
        if (!ok) {
          for (int e = 0; e < de_.size(); ++e)
            if (!std::isfinite(edge_out_[e]))
              throw IntegrationError("edge formula domain error", t,
                                     de_.dst[e]);
        }
        for (int e = 0; e < de_.size(); ++e)
          dxdt[de_.dst[e]] += de_.weight[e] * edge_out_[e];
        break;
      }
    }
  }

private:
  const DynamicsSpec& spec_;
  const Graph& graph_;
  DirectedEdges de_;
  CompiledExpr node_prog_, edge_prog_;
  std::vector<double> xi_lane_, xj_lane_, edge_out_, scratch_;
};

} // namespace

void eval_rhs(const DynamicsSpec& spec, const Graph& graph,
              const std::vector<double>& state, double t,
              std::vector<double>& dxdt) {
  if (static_cast<int>(state.size()) != graph.n_nodes())
    throw std::invalid_argument("state size must equal node count");
  RhsEngine engine(spec, graph);
  engine.compute(state, t, dxdt);
}

std::vector<double> eval_rhs(const DynamicsSpec& spec, const Graph& graph,
                             const std::vector<double>& state, double t) {
  std::vector<double> dxdt;
  eval_rhs(spec, graph, state, t, dxdt);
  return dxdt;
}

Trajectory simulate(const DynamicsSpec& spec, const Graph& graph,
                    const std::vector<double>& x0,
                    const std::vector<double>& timestamps, int substeps) {
  if (static_cast<int>(x0.size()) != graph.n_nodes())
    throw std::invalid_argument("x0 size must equal node count");
  if (timestamps.empty()) throw std::invalid_argument("no timestamps");
  if (substeps < 1) throw std::invalid_argument("substeps must be >= 1");
  for (std::size_t k = 1; k < timestamps.size(); ++k)
    if (!(timestamps[k] > timestamps[k - 1]))
      throw std::invalid_argument("timestamps must be increasing");

  RhsEngine engine(spec, graph);
  const int n = graph.n_nodes();

  Trajectory traj;
  traj.timestamps = timestamps;
  traj.n_nodes = n;
  traj.dim = 1;
  traj.data.reserve(timestamps.size() * n);
  traj.data.insert(traj.data.end(), x0.begin(), x0.end());

  std::vector<double> x = x0;
  std::vector<double> k1, k2, k3, k4, tmp(n);

  auto check_bounds = [&](double t) {
    for (int v = 0; v < n; ++v) {
      // The negated comparison also traps NaN.
      if (!(std::abs(x[v]) <= kDivergeBound))
        throw IntegrationError("state diverged", t, v);
    }
  };

  for (std::size_t seg = 0; seg + 1 < timestamps.size(); ++seg) {
    double t = timestamps[seg];
    double h = (timestamps[seg + 1] - timestamps[seg]) / substeps;
    for (int s = 0; s < substeps; ++s) {
      engine.compute(x, t, k1);
      for (int v = 0; v < n; ++v) tmp[v] = x[v] + 0.5 * h * k1[v];
      engine.compute(tmp, t + 0.5 * h, k2);
      for (int v = 0; v < n; ++v) tmp[v] = x[v] + 0.5 * h * k2[v];
      engine.compute(tmp, t + 0.5 * h, k3);
      for (int v = 0; v < n; ++v) tmp[v] = x[v] + h * k3[v];
      engine.compute(tmp, t + h, k4);
      for (int v = 0; v < n; ++v)
        x[v] += h / 6.0 * (k1[v] + 2.0 * k2[v] + 2.0 * k3[v] + k4[v]);
      t += h;
      check_bounds(t);
    }
    traj.data.insert(traj.data.end(), x.begin(), x.end());
  }
  return traj;
}

std::vector<double> sample_x0(const DynamicsSpec& spec, int n_nodes,
                              std::uint64_t seed) {
  std::mt19937_64 rng = make_rng(seed, 0xd0ULL);
  std::uniform_real_distribution<double> u(spec.x0_lo(), spec.x0_hi());
  std::vector<double> x0(n_nodes);
  for (double& v : x0) v = u(rng);
  return x0;
}

} // namespace netsr

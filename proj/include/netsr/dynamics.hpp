#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "netsr/expr.hpp"
#include "netsr/graph.hpp"
#include "netsr/trajectory.hpp"

namespace netsr {

// Coupled node dynamics: dx_v/dt = F(x_v) + sum_{u in N(v)} a_vu G(x_v, x_u).
enum class DynKind { kSis, kLv, kKur, kWc, kSymbolic };

struct DynamicsSpec {
  DynKind kind = DynKind::kSis;
  double delta = 0.5;   // SIS recovery rate
  double alpha = 0.75;  // LV intrinsic growth
  double theta = 0.5;   // LV self-limitation
  double omega = 0.75;  // KUR natural frequency
  double tau = 0.75;    // WC response steepness
  double mu = 0.5;      // WC response threshold
  // WC coupling as published differs in sign between sources; the flipped
  // variant uses sigmoid(-tau*(x_j - mu)) instead of sigmoid(tau*(x_j - mu)).
  bool wc_flipped_sign = false;
  Expr node_expr;  // kSymbolic only; over {x_i, t}
  Expr edge_expr;  // kSymbolic only; over {x_i, x_j, t}

  static DynamicsSpec sis(double delta = 0.5);
  static DynamicsSpec lv(double alpha = 0.75, double theta = 0.5);
  static DynamicsSpec kur(double omega = 0.75);
  static DynamicsSpec wc(double tau = 0.75, double mu = 0.5,
                         bool flipped_sign = false);
  static DynamicsSpec symbolic(Expr node, Expr edge);
  static DynamicsSpec by_name(const std::string& name);  // "sis" etc.

  const char* name() const;
  bool is_builtin() const { return kind != DynKind::kSymbolic; }

  // The governing formulas as expression trees (for built-ins, constructed
  // from the parameter values).
  Expr formula_node() const;
  Expr formula_edge() const;

  // Initial-state sampling range (phases for KUR, activities otherwise).
  double x0_lo() const { return 0.0; }
  double x0_hi() const;
};

class IntegrationError : public std::runtime_error {
public:
  IntegrationError(const std::string& msg, double t, int node)
      : std::runtime_error(msg), time(t), node(node) {}
  double time;
  int node;  // -1 when not attributable to one node
};

inline constexpr double kDivergeBound = 1e6;

// Right-hand side of the coupled system; dxdt has state's shape.
void eval_rhs(const DynamicsSpec& spec, const Graph& graph,
              const std::vector<double>& state, double t,
              std::vector<double>& dxdt);
std::vector<double> eval_rhs(const DynamicsSpec& spec, const Graph& graph,
                             const std::vector<double>& state, double t = 0.0);

// Fixed-step RK4 between consecutive requested timestamps; every timestamp
// is hit exactly. Throws IntegrationError on divergence
// (|state| > kDivergeBound) or a symbolic domain error.
Trajectory simulate(const DynamicsSpec& spec, const Graph& graph,
                    const std::vector<double>& x0,
                    const std::vector<double>& timestamps,
                    int substeps = 20);

// Uniform initial state draw in [x0_lo, x0_hi], one value per node.
std::vector<double> sample_x0(const DynamicsSpec& spec, int n_nodes,
                              std::uint64_t seed);

} // namespace netsr

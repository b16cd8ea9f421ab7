#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "netsr/expr.hpp"
#include "netsr/graph.hpp"
#include "netsr/trajectory.hpp"

namespace netsr {

// Which slot of the coupled system a population searches for.
enum class Role { kNodeDynamics, kEdgeDynamics };

struct GpConfig {
  int population = 200;
  int max_generations = 50;
  double stop_eps = 1e-5;   // stop once some pair reaches this error
  int big_k = 20;           // pairings averaged into a member's fitness
  double p_crossover = 0.6;
  double p_subtree = 0.1;
  double p_hoist = 0.05;
  double p_point = 0.1;
  double parsimony = 0.01;  // size penalty applied at selection only
  int tournament = 20;
  double const_lo = -1.0;
  double const_hi = 1.0;
  int init_depth_lo = 2;
  int init_depth_hi = 5;
  bool use_sigmoid = true;  // sigmoid in the function set
  bool use_time = false;    // t as a terminal
  int max_size = 72;        // offspring above this fall back to the parent
  // Candidate integration runs on every fitness_stride-th interpolated
  // timestamp with fitness_substeps RK4 steps per interval.
  int fitness_substeps = 1;
  int fitness_stride = 4;
  int distance_samples = 256;
  std::uint64_t seed = 0;
  // Expressions planted into the initial populations (position 0 onward),
  // replacing random members; programmatic hook, not a config-file key.
  std::vector<Expr> inject_f;
  std::vector<Expr> inject_g;
};

struct Population {
  Role role = Role::kNodeDynamics;
  std::vector<Expr> members;
};

// Ramped half-and-half trees, depth init_depth_lo..hi, constants uniform in
// [const_lo, const_hi]. Node-dynamics members never reference x_j.
Population init_population(Role role, const GpConfig& cfg, std::uint64_t seed);

// Reference evaluated on a batch of sample points; xj is empty for node
// references.
using BatchRef = std::function<std::vector<double>(
    const std::vector<double>& xi, const std::vector<double>& xj)>;

struct DistanceSamples {
  std::vector<double> xi;
  std::vector<double> xj;  // empty for node-role samples
};

DistanceSamples draw_distance_samples(Role role, double lo, double hi, int n,
                                      std::uint64_t seed);

// Mean over members of mean |member - ref| on the samples; a member that
// fails to evaluate contributes 1e6.
double population_distance(const Population& pop, const BatchRef& ref,
                           const DistanceSamples& samples);

inline constexpr double kPairPenalty = 1e6;

// Candidate-pair score: integrate dx_v/dt = F(x_v) + sum_u a_vu G(x_v, x_u)
// from the trajectory's initial frame across its grid (thinned by stride)
// and return -(mean squared error to the trajectory). Divergence or a
// domain error returns -kPairPenalty.
double pair_fitness(const Expr& f, const Expr& g, const Graph& graph,
                    const Trajectory& interp, int substeps = 1,
                    int stride = 1);

// Caching pair evaluator. Results are keyed by canonical form, so
// syntactic variants of a pair share one simulation. logical_requests
// counts every lookup, simulations counts cache misses.
class PairEvaluator {
public:
  PairEvaluator(const Graph& graph, const Trajectory& interp, int substeps,
                int stride);

  double pair_error(const Expr& f, const Expr& g);

  // Row-major error matrix, rows fs, cols gs. Canonicalizes each member
  // once; every cell counts as one logical request.
  std::vector<double> error_matrix(const std::vector<Expr>& fs,
                                   const std::vector<Expr>& gs);

  std::int64_t logical_requests() const { return logical_; }
  std::int64_t simulations() const { return simulations_; }

private:
  double evaluate(const Expr& f, const Expr& g);
  double lookup(const std::string& key, const Expr& f, const Expr& g);

  const Graph& graph_;
  const Trajectory& interp_;
  int substeps_;
  std::vector<int> grid_;  // indices into interp timestamps
  DirectedEdges de_;
  std::unordered_map<std::string, double> cache_;
  std::int64_t logical_ = 0;
  std::int64_t simulations_ = 0;
  // scratch reused across simulations
  std::vector<double> state_, k1_, k2_, k3_, k4_, tmp_, xi_, xj_, edge_out_,
      scratch_;
};

// Mean of the k largest scores (all of them when k >= size).
double bigk_mean(std::vector<double> scores, int k);

// Tournament selection on parsimony-adjusted fitness, subtree crossover,
// subtree/hoist/point mutation, reproduction; elitism keeps the raw-fitness
// best member.
Population evolve_step(const Population& pop,
                       const std::vector<double>& fitness,
                       const GpConfig& cfg, std::uint64_t seed);

struct GenRecord {
  int generation = 0;
  std::string evolved;  // "F", "G", or "FG" in joint mode
  double d_f = 0.0;
  double d_g = 0.0;
  double best_error = 0.0;  // best pair error in this generation's matrix
  std::string best_f;
  std::string best_g;
};

// Header `generation,evolved_population,d_F,d_G,best_error,best_F,best_G`.
std::string history_to_csv(const std::vector<GenRecord>& history);

struct SearchResult {
  Expr best_f;
  Expr best_g;
  double best_error = kPairPenalty;
  bool converged = false;
  int generations = 0;
  std::int64_t logical_pairs = 0;
  std::int64_t simulated_pairs = 0;
  double wall_seconds = 0.0;
  std::vector<GenRecord> history;
};

// Reference-gated alternating search. Per generation: compute population
// distances to the references, evolve only the population with the larger
// distance (both when joint_mode), stop early once some pair's error is
// at or below cfg.stop_eps. The returned pair is the error argmin over the
// final populations (or an earlier generation's best if that was lower).
SearchResult coordinated_search(const BatchRef& f_ref, const BatchRef& g_ref,
                                const Trajectory& interp, const Graph& graph,
                                const GpConfig& cfg, bool joint_mode = false);

} // namespace netsr

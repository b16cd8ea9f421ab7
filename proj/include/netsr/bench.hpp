#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "netsr/config.hpp"
#include "netsr/dynamics.hpp"
#include "netsr/expr.hpp"
#include "netsr/graph.hpp"
#include "netsr/trajectory.hpp"

namespace netsr {

// True iff both recovered parts are skeleton-equivalent to the truth on
// the dynamics' state domain ([0, 2pi] for phase systems, [0, 1]
// otherwise).
bool check_recovery(const Expr& found_node, const Expr& found_edge,
                    const DynamicsSpec& truth, double lo, double hi,
                    std::uint64_t seed = 0);

// Simulate the recovered pair from the clean observations' initial frame
// on their timestamps; mean squared error over all nodes and times.
// nullopt when the simulation diverges.
std::optional<double> trajectory_mse(const Expr& node_expr,
                                     const Expr& edge_expr,
                                     const Graph& graph,
                                     const Trajectory& clean_obs,
                                     int substeps = 20);

// Interpolation-window vs extrapolation-window MSE: truth is integrated
// over [0, 2*horizon]; the candidate's MSE is split at the horizon.
struct OverfitCheck {
  double interp_mse = 0.0;
  double extrap_mse = 0.0;
  bool diverged = false;
  double ratio() const;  // extrap / interp
};

OverfitCheck overfit_check(const Expr& node_expr, const Expr& edge_expr,
                           const DynamicsSpec& truth, const Graph& graph,
                           const std::vector<double>& x0, double horizon,
                           int samples, int substeps = 20);

struct TrialResult {
  std::string method;
  std::string dynamics;
  std::string graph;
  int seed = 0;
  double snr_db = std::numeric_limits<double>::infinity();
  double dt = 0.0;  // observation spacing actually used
  bool recovered = false;
  bool diverged = false;  // recovered pair failed trajectory simulation
  std::string node_expr;
  std::string edge_expr;
  // Raw units; Table-style display is mse * 100. Present only when
  // recovered and not diverged.
  std::optional<double> traj_mse;
  double wall_time = 0.0;
  // Method-specific extras (search convergence, pair counters, chosen lr).
  std::map<std::string, double> details;

  std::string key() const;  // unique, filesystem-safe
};

std::string trial_to_json(const TrialResult& t);
TrialResult trial_from_json(const std::string& text);

struct Ci {
  double lo = 0.0;
  double hi = 0.0;
};

// Percentile bootstrap for the mean; degenerate inputs collapse to the
// sample mean.
Ci bootstrap_ci(const std::vector<double>& values, int resamples,
                std::uint64_t seed);

struct Aggregate {
  std::string method;
  std::string dynamics;
  std::string graph;
  std::string level_name;  // "", "snr_db", or "dt"
  double level = 0.0;
  int n_trials = 0;
  double rec_prob = 0.0;
  Ci rec_ci;
  int n_mse = 0;  // recovered and simulable
  double mse_mean = 0.0;
  double mse_std = 0.0;
  Ci mse_ci;
  int n_diverged = 0;
};

struct BenchmarkReport {
  std::string config_snapshot;
  std::string environment;
  std::string level_name;  // matches the aggregates
  std::vector<TrialResult> trials;
  std::vector<Aggregate> aggregates;
};

std::vector<Aggregate> aggregate_trials(const std::vector<TrialResult>& trials,
                                        const std::string& level_name,
                                        int resamples);

// Aggregate table; mse columns report both raw and x100 display units.
std::string report_to_csv(const BenchmarkReport& report);
std::string report_to_json(const BenchmarkReport& report);

// Everything one data condition shares across methods: the graph, the
// governing system, the clean truth and the observed (possibly noisy)
// trajectory. `stream` seeds all per-trial randomness.
struct TrialData {
  Graph graph;
  DynamicsSpec spec;
  std::vector<double> x0;
  std::vector<double> times;
  Trajectory truth;
  Trajectory obs;
  std::uint64_t stream = 0;
  std::string data_key;
};

TrialData make_trial_data(const Config& cfg, const std::string& dyn_name,
                          const std::string& graph_kind, int seed_index,
                          double snr_db, double dt);

// One full (method, dynamics, graph, seed, condition) run. snr_db inf
// means clean; dt 0 means the configured observation grid. Artifacts
// (trained surrogate, interpolated trajectory) are cached under
// out_dir/artifacts and shared across methods.
TrialResult run_trial(const Config& cfg, const std::string& method,
                      const std::string& dyn_name,
                      const std::string& graph_kind, int seed_index,
                      double snr_db, double dt, const std::string& out_dir);

// Sweep drivers. All are resumable: a trial whose out_dir/trials/<key>.json
// exists is loaded, not rerun. Per-trial failures are recorded as
// unrecovered trials, never abort the sweep.
BenchmarkReport run_benchmark(const Config& cfg, const std::string& out_dir);
BenchmarkReport sweep_noise(const Config& cfg,
                            const std::vector<double>& snr_list,
                            const std::string& out_dir);
BenchmarkReport sweep_dt(const Config& cfg, const std::vector<double>& dt_list,
                         const std::string& out_dir);
// variant: "no-interp" (raw observations feed the pair fitness) or
// "no-coord" (joint evolution); runs the full method alongside.
BenchmarkReport ablate(const Config& cfg, const std::string& variant,
                       const std::string& out_dir);

// Rebuild the report purely from stored trial files.
BenchmarkReport recompute_report(const Config& cfg,
                                 const std::string& out_dir);

void write_report(const BenchmarkReport& report, const std::string& out_dir);

std::string environment_info();

} // namespace netsr

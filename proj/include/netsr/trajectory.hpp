#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace netsr {

enum class TrajMeta { kClean, kNoisy, kInterpolated };

// Dense node-state time series: states indexed [time, node, dim].
// Benchmarks use dim = 1 but the layout supports vector states.
struct Trajectory {
  std::vector<double> timestamps;  // strictly increasing
  int n_nodes = 0;
  int dim = 1;
  std::vector<double> data;  // size timestamps.size() * n_nodes * dim
  TrajMeta meta = TrajMeta::kClean;
  double snr_db = 0.0;  // set when meta == kNoisy

  int n_times() const { return static_cast<int>(timestamps.size()); }

  double& at(int k, int v, int d = 0) {
    return data[(static_cast<std::size_t>(k) * n_nodes + v) * dim + d];
  }
  double at(int k, int v, int d = 0) const {
    return data[(static_cast<std::size_t>(k) * n_nodes + v) * dim + d];
  }

  // Pointer to the state block at time index k (n_nodes * dim values).
  const double* frame(int k) const {
    return data.data() + static_cast<std::size_t>(k) * n_nodes * dim;
  }
  double* frame(int k) {
    return data.data() + static_cast<std::size_t>(k) * n_nodes * dim;
  }

  void validate() const;  // throws on shape/ordering/finite violations
};

// K equally spaced times covering [0, T], first element exactly 0, last
// exactly T.
std::vector<double> sample_timestamps(int count, double horizon);

// Additive i.i.d. Gaussian noise with sigma = global signal RMS *
// 10^(-snr_db/20). An infinite snr_db returns the input untouched.
Trajectory add_noise(const Trajectory& traj, double snr_db,
                     std::uint64_t seed);

// CSV with header `t,node,dim,value`, 17 significant digits (bit-exact
// round trip). Reader rejects non-increasing timestamps.
std::string write_trajectory_csv(const Trajectory& traj);
Trajectory read_trajectory_csv(const std::string& text);
void save_trajectory(const Trajectory& traj, const std::string& path);
Trajectory load_trajectory(const std::string& path);

} // namespace netsr

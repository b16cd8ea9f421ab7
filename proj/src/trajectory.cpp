#include "netsr/trajectory.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "netsr/rng.hpp"

namespace netsr {

void Trajectory::validate() const {
  if (n_nodes <= 0 || dim <= 0)
    throw std::runtime_error("trajectory: empty shape");
  if (data.size() != timestamps.size() * static_cast<std::size_t>(n_nodes) * dim)
    throw std::runtime_error("trajectory: data size mismatch");
  for (std::size_t k = 1; k < timestamps.size(); ++k)
    if (!(timestamps[k] > timestamps[k - 1]))
      throw std::runtime_error("trajectory: timestamps not increasing");
  for (double v : data)
    if (!std::isfinite(v))
      throw std::runtime_error("trajectory: non-finite state");
}

std::vector<double> sample_timestamps(int count, double horizon) {
  if (count < 2) throw std::invalid_argument("need at least 2 timestamps");
  if (!(horizon > 0)) throw std::invalid_argument("horizon must be positive");
  std::vector<double> ts(count);
  for (int k = 0; k < count; ++k)
    ts[k] = horizon * k / (count - 1);
  return ts;
}

Trajectory add_noise(const Trajectory& traj, double snr_db,
                     std::uint64_t seed) {
  if (!std::isfinite(snr_db)) return traj;  // infinite SNR: no noise
  double power = 0.0;
  for (double v : traj.data) power += v * v;
  double rms = std::sqrt(power / traj.data.size());
  double sigma = rms * std::pow(10.0, -snr_db / 20.0);
  Trajectory out = traj;
  std::mt19937_64 rng = make_rng(seed, 0x4015eULL);
  std::normal_distribution<double> noise(0.0, sigma);
  for (double& v : out.data) v += noise(rng);
  out.meta = TrajMeta::kNoisy;
  out.snr_db = snr_db;
  return out;
}

namespace {

void append_value(std::string& out, double v) {
  char buf[40];
  auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  (void)ec;
  out.append(buf, ptr);
}

} // namespace

std::string write_trajectory_csv(const Trajectory& traj) {
  std::string out = "t,node,dim,value\n";
  for (int k = 0; k < traj.n_times(); ++k) {
    for (int v = 0; v < traj.n_nodes; ++v) {
      for (int d = 0; d < traj.dim; ++d) {
        append_value(out, traj.timestamps[k]);
        out += ',';
        out += std::to_string(v);
        out += ',';
        out += std::to_string(d);
        out += ',';
        append_value(out, traj.at(k, v, d));
        out += '\n';
      }
    }
  }
  return out;
}

Trajectory read_trajectory_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != "t,node,dim,value")
    throw std::runtime_error("trajectory csv: bad header");

  struct Row {
    double t;
    int node;
    int dim;
    double value;
  };
  std::vector<Row> rows;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    Row r{};
    const char* p = line.data();
    const char* end = p + line.size();
    auto eat_comma = [&](const char* at) {
      if (at >= end || *at != ',')
        throw std::runtime_error("trajectory csv: malformed line " +
                                 std::to_string(line_no));
      return at + 1;
    };
    auto [p1, e1] = std::from_chars(p, end, r.t);
    if (e1 != std::errc()) throw std::runtime_error("trajectory csv: bad t");
    p = eat_comma(p1);
    auto [p2, e2] = std::from_chars(p, end, r.node);
    if (e2 != std::errc()) throw std::runtime_error("trajectory csv: bad node");
    p = eat_comma(p2);
    auto [p3, e3] = std::from_chars(p, end, r.dim);
    if (e3 != std::errc()) throw std::runtime_error("trajectory csv: bad dim");
    p = eat_comma(p3);
    auto [p4, e4] = std::from_chars(p, end, r.value);
    if (e4 != std::errc())
      throw std::runtime_error("trajectory csv: bad value");
    rows.push_back(r);
  }
  if (rows.empty()) throw std::runtime_error("trajectory csv: no data");

  Trajectory traj;
  int n_nodes = 0, dim = 0;
  for (const Row& r : rows) {
    n_nodes = std::max(n_nodes, r.node + 1);
    dim = std::max(dim, r.dim + 1);
  }
  traj.n_nodes = n_nodes;
  traj.dim = dim;
  std::size_t block = static_cast<std::size_t>(n_nodes) * dim;
  if (rows.size() % block != 0)
    throw std::runtime_error("trajectory csv: ragged blocks");
  std::size_t n_times = rows.size() / block;
  traj.timestamps.reserve(n_times);
  traj.data.resize(rows.size());
  for (std::size_t k = 0; k < n_times; ++k) {
    double t = rows[k * block].t;
    if (!traj.timestamps.empty() && !(t > traj.timestamps.back()))
      throw std::runtime_error("trajectory csv: timestamps not increasing");
    traj.timestamps.push_back(t);
    for (std::size_t i = 0; i < block; ++i) {
      const Row& r = rows[k * block + i];
      if (r.t != t)
        throw std::runtime_error("trajectory csv: inconsistent block time");
      traj.data[(k * n_nodes + r.node) * dim + r.dim] = r.value;
    }
  }
  return traj;
}

void save_trajectory(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << write_trajectory_csv(traj);
}

Trajectory load_trajectory(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return read_trajectory_csv(ss.str());
}

} // namespace netsr

#include "netsr/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <stdexcept>

namespace netsr {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

double parse_double(const std::string& key, const std::string& value) {
  std::string v = trim(value);
  double out = 0.0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw std::invalid_argument("bad number for " + key + ": '" + value + "'");
  return out;
}

int parse_int(const std::string& key, const std::string& value) {
  std::string v = trim(value);
  int out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw std::invalid_argument("bad integer for " + key + ": '" + value +
                                "'");
  return out;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  std::string v = trim(value);
  std::uint64_t out = 0;
  auto res = std::from_chars(v.data(), v.data() + v.size(), out);
  if (res.ec != std::errc() || res.ptr != v.data() + v.size())
    throw std::invalid_argument("bad seed for " + key + ": '" + value + "'");
  return out;
}

bool parse_bool(const std::string& key, const std::string& value) {
  std::string v = trim(value);
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("bad bool for " + key + ": '" + value + "'");
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(value);
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> split_doubles(const std::string& key,
                                  const std::string& value) {
  std::vector<double> out;
  for (const std::string& item : split_list(value))
    out.push_back(parse_double(key, item));
  return out;
}

std::string fmt(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string join(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += items[i];
  }
  return out;
}

std::string join(const std::vector<double>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += fmt(items[i]);
  }
  return out;
}

} // namespace

std::map<std::string, std::string> parse_ini(const std::string& text) {
  std::map<std::string, std::string> out;
  std::string section;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']')
        throw std::invalid_argument("unterminated section header on line " +
                                    std::to_string(lineno));
      section = trim(t.substr(1, t.size() - 2));
      if (section.empty())
        throw std::invalid_argument("empty section name on line " +
                                    std::to_string(lineno));
      continue;
    }
    std::size_t eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("expected key = value on line " +
                                  std::to_string(lineno));
    std::string key = trim(t.substr(0, eq));
    if (key.empty())
      throw std::invalid_argument("empty key on line " +
                                  std::to_string(lineno));
    if (section.empty())
      throw std::invalid_argument("key outside any section on line " +
                                  std::to_string(lineno));
    out[section + "." + key] = trim(t.substr(eq + 1));
  }
  return out;
}

Graph make_graph(const GraphCfg& cfg, std::uint64_t seed) {
  if (cfg.kind == "ba") return gen_ba(cfg.nodes, cfg.ba_m, seed);
  if (cfg.kind == "er") return gen_er(cfg.nodes, cfg.er_p, seed);
  throw std::invalid_argument("unknown graph kind: " + cfg.kind);
}

DynamicsSpec make_spec(const DynCfg& cfg) {
  DynamicsSpec spec = DynamicsSpec::by_name(cfg.name);
  spec.delta = cfg.delta;
  spec.alpha = cfg.alpha;
  spec.theta = cfg.theta;
  spec.omega = cfg.omega;
  spec.tau = cfg.tau;
  spec.mu = cfg.mu;
  spec.wc_flipped_sign = cfg.wc_flipped_sign;
  return spec;
}

std::vector<double> observation_grid(const DynCfg& cfg) {
  return sample_timestamps(cfg.samples, cfg.horizon);
}

Config Config::desk_defaults() {
  // Search sizes stay at the published values: population 100 stalls on the
  // oscillator coupling (diversity collapses under tournament 20 long before
  // sin(x_i - x_j) shows up). The run budget is met by the smaller graph and
  // the strided fitness comparison instead.
  return Config{};
}

void Config::apply_paper_scale() {
  graph.nodes = 200;
  gp.population = 200;
  gp.max_generations = 50;
  bench.seeds = 100;
  bench.graphs = {"ba", "er"};
  bench.dt_horizon = 100.0;
}

Config Config::from_ini(const std::string& text) {
  Config cfg = desk_defaults();
  auto kv = parse_ini(text);
  using Setter = std::function<void(const std::string&, const std::string&)>;
  std::map<std::string, Setter> set;

  set["graph.kind"] = [&](const std::string&, const std::string& v) {
    cfg.graph.kind = trim(v);
  };
  set["graph.nodes"] = [&](const std::string& k, const std::string& v) {
    cfg.graph.nodes = parse_int(k, v);
  };
  set["graph.ba_m"] = [&](const std::string& k, const std::string& v) {
    cfg.graph.ba_m = parse_int(k, v);
  };
  set["graph.er_p"] = [&](const std::string& k, const std::string& v) {
    cfg.graph.er_p = parse_double(k, v);
  };

  set["dynamics.name"] = [&](const std::string&, const std::string& v) {
    cfg.dynamics.name = trim(v);
  };
  set["dynamics.horizon"] = [&](const std::string& k, const std::string& v) {
    cfg.dynamics.horizon = parse_double(k, v);
  };
  set["dynamics.samples"] = [&](const std::string& k, const std::string& v) {
    cfg.dynamics.samples = parse_int(k, v);
  };
  set["dynamics.truth_substeps"] = [&](const std::string& k,
                                       const std::string& v) {
    cfg.dynamics.truth_substeps = parse_int(k, v);
  };
  set["dynamics.snr_db"] = [&](const std::string& k, const std::string& v) {
    cfg.dynamics.snr_db = parse_double(k, v);
  };
  set["dynamics.delta"] = [&](const std::string& k, const std::string& v) {
    cfg.dynamics.delta = parse_double(k, v);
  };
  set["dynamics.alpha"] = [&](const std::string& k, const std::string& v) {
    cfg.dynamics.alpha = parse_double(k, v);
  };
  set["dynamics.theta"] = [&](const std::string& k, const std::string& v) {
    cfg.dynamics.theta = parse_double(k, v);
  };
  set["dynamics.omega"] = [&](const std::string& k, const std::string& v) {
    cfg.dynamics.omega = parse_double(k, v);
  };
  set["dynamics.tau"] = [&](const std::string& k, const std::string& v) {
    cfg.dynamics.tau = parse_double(k, v);
  };
  set["dynamics.mu"] = [&](const std::string& k, const std::string& v) {
    cfg.dynamics.mu = parse_double(k, v);
  };
  set["dynamics.wc_flipped_sign"] = [&](const std::string& k,
                                        const std::string& v) {
    cfg.dynamics.wc_flipped_sign = parse_bool(k, v);
  };

  set["pind.latent_dim"] = [&](const std::string& k, const std::string& v) {
    cfg.pind.latent_dim = parse_int(k, v);
  };
  set["pind.nonlinear_dec"] = [&](const std::string& k,
                                  const std::string& v) {
    cfg.pind.nonlinear_dec = parse_bool(k, v);
  };
  set["pind.epochs"] = [&](const std::string& k, const std::string& v) {
    cfg.pind.epochs = parse_int(k, v);
  };
  set["pind.pilot_epochs"] = [&](const std::string& k, const std::string& v) {
    cfg.pind.pilot_epochs = parse_int(k, v);
  };
  set["pind.lr_grid"] = [&](const std::string& k, const std::string& v) {
    cfg.pind.lr_grid = split_doubles(k, v);
  };
  set["pind.weight_decay"] = [&](const std::string& k, const std::string& v) {
    cfg.pind.weight_decay = parse_double(k, v);
  };
  set["pind.train_frac"] = [&](const std::string& k, const std::string& v) {
    cfg.pind.train_frac = parse_double(k, v);
  };
  set["pind.val_frac"] = [&](const std::string& k, const std::string& v) {
    cfg.pind.val_frac = parse_double(k, v);
  };
  set["pind.substeps"] = [&](const std::string& k, const std::string& v) {
    cfg.pind.substeps = parse_int(k, v);
  };
  set["pind.interp_factor"] = [&](const std::string& k,
                                  const std::string& v) {
    cfg.pind.interp_factor = parse_int(k, v);
  };
  set["pind.interp_substeps"] = [&](const std::string& k,
                                    const std::string& v) {
    cfg.pind.interp_substeps = parse_int(k, v);
  };

  set["gp.population"] = [&](const std::string& k, const std::string& v) {
    cfg.gp.population = parse_int(k, v);
  };
  set["gp.max_generations"] = [&](const std::string& k,
                                  const std::string& v) {
    cfg.gp.max_generations = parse_int(k, v);
  };
  set["gp.stop_eps"] = [&](const std::string& k, const std::string& v) {
    cfg.gp.stop_eps = parse_double(k, v);
  };
  set["gp.big_k"] = [&](const std::string& k, const std::string& v) {
    cfg.gp.big_k = parse_int(k, v);
  };
  set["gp.p_crossover"] = [&](const std::string& k, const std::string& v) {
    cfg.gp.p_crossover = parse_double(k, v);
  };
  set["gp.p_subtree"] = [&](const std::string& k, const std::string& v) {
    cfg.gp.p_subtree = parse_double(k, v);
  };
  set["gp.p_hoist"] = [&](const std::string& k, const std::string& v) {
    cfg.gp.p_hoist = parse_double(k, v);
  };
  set["gp.p_point"] = [&](const std::string& k, const std::string& v) {
    cfg.gp.p_point = parse_double(k, v);
  };
  set["gp.parsimony"] = [&](const std::string& k, const std::string& v) {
    cfg.gp.parsimony = parse_double(k, v);
  };
  set["gp.tournament"] = [&](const std::string& k, const std::string& v) {
    cfg.gp.tournament = parse_int(k, v);
  };
  set["gp.const_lo"] = [&](const std::string& k, const std::string& v) {
    cfg.gp.const_lo = parse_double(k, v);
  };
  set["gp.const_hi"] = [&](const std::string& k, const std::string& v) {
    cfg.gp.const_hi = parse_double(k, v);
  };
  set["gp.init_depth_lo"] = [&](const std::string& k, const std::string& v) {
    cfg.gp.init_depth_lo = parse_int(k, v);
  };
  set["gp.init_depth_hi"] = [&](const std::string& k, const std::string& v) {
    cfg.gp.init_depth_hi = parse_int(k, v);
  };
  set["gp.use_sigmoid"] = [&](const std::string& k, const std::string& v) {
    cfg.gp.use_sigmoid = parse_bool(k, v);
  };
  set["gp.use_time"] = [&](const std::string& k, const std::string& v) {
    cfg.gp.use_time = parse_bool(k, v);
  };
  set["gp.max_size"] = [&](const std::string& k, const std::string& v) {
    cfg.gp.max_size = parse_int(k, v);
  };
  set["gp.fitness_substeps"] = [&](const std::string& k,
                                   const std::string& v) {
    cfg.gp.fitness_substeps = parse_int(k, v);
  };
  set["gp.fitness_stride"] = [&](const std::string& k, const std::string& v) {
    cfg.gp.fitness_stride = parse_int(k, v);
  };
  set["gp.distance_samples"] = [&](const std::string& k,
                                   const std::string& v) {
    cfg.gp.distance_samples = parse_int(k, v);
  };

  set["sindy.threshold"] = [&](const std::string& k, const std::string& v) {
    cfg.sindy.threshold = parse_double(k, v);
  };
  set["sindy.lambda1"] = [&](const std::string& k, const std::string& v) {
    cfg.sindy.lambda1 = parse_double(k, v);
  };
  set["sindy.lambda2"] = [&](const std::string& k, const std::string& v) {
    cfg.sindy.lambda2 = parse_double(k, v);
  };
  set["sindy.cutoff"] = [&](const std::string& k, const std::string& v) {
    cfg.sindy.cutoff = parse_double(k, v);
  };

  set["bench.methods"] = [&](const std::string&, const std::string& v) {
    cfg.bench.methods = split_list(v);
  };
  set["bench.dynamics"] = [&](const std::string&, const std::string& v) {
    cfg.bench.dynamics = split_list(v);
  };
  set["bench.graphs"] = [&](const std::string&, const std::string& v) {
    cfg.bench.graphs = split_list(v);
  };
  set["bench.seeds"] = [&](const std::string& k, const std::string& v) {
    cfg.bench.seeds = parse_int(k, v);
  };
  set["bench.refine"] = [&](const std::string& k, const std::string& v) {
    cfg.bench.refine = parse_bool(k, v);
  };
  set["bench.refine_budget"] = [&](const std::string& k,
                                   const std::string& v) {
    cfg.bench.refine_budget = parse_int(k, v);
  };
  set["bench.snr_list"] = [&](const std::string& k, const std::string& v) {
    cfg.bench.snr_list = split_doubles(k, v);
  };
  set["bench.dt_list"] = [&](const std::string& k, const std::string& v) {
    cfg.bench.dt_list = split_doubles(k, v);
  };
  set["bench.dt_horizon"] = [&](const std::string& k, const std::string& v) {
    cfg.bench.dt_horizon = parse_double(k, v);
  };
  set["bench.bootstrap_resamples"] = [&](const std::string& k,
                                         const std::string& v) {
    cfg.bench.bootstrap_resamples = parse_int(k, v);
  };
  set["bench.master_seed"] = [&](const std::string& k, const std::string& v) {
    cfg.bench.master_seed = parse_u64(k, v);
  };

  for (const auto& [key, value] : kv) {
    auto it = set.find(key);
    if (it == set.end())
      throw std::invalid_argument("unknown config key: " + key);
    it->second(key, value);
  }
  cfg.gp.seed = cfg.bench.master_seed;
  return cfg;
}

Config Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return from_ini(ss.str());
}

std::string Config::to_ini() const {
  std::string out;
  out += "[graph]\n";
  out += "kind = " + graph.kind + "\n";
  out += "nodes = " + std::to_string(graph.nodes) + "\n";
  out += "ba_m = " + std::to_string(graph.ba_m) + "\n";
  out += "er_p = " + fmt(graph.er_p) + "\n";
  out += "\n[dynamics]\n";
  out += "name = " + dynamics.name + "\n";
  out += "horizon = " + fmt(dynamics.horizon) + "\n";
  out += "samples = " + std::to_string(dynamics.samples) + "\n";
  out += "truth_substeps = " + std::to_string(dynamics.truth_substeps) + "\n";
  out += "snr_db = " + fmt(dynamics.snr_db) + "\n";
  out += "delta = " + fmt(dynamics.delta) + "\n";
  out += "alpha = " + fmt(dynamics.alpha) + "\n";
  out += "theta = " + fmt(dynamics.theta) + "\n";
  out += "omega = " + fmt(dynamics.omega) + "\n";
  out += "tau = " + fmt(dynamics.tau) + "\n";
  out += "mu = " + fmt(dynamics.mu) + "\n";
  out += std::string("wc_flipped_sign = ") +
         (dynamics.wc_flipped_sign ? "true" : "false") + "\n";
  out += "\n[pind]\n";
  out += "latent_dim = " + std::to_string(pind.latent_dim) + "\n";
  out += std::string("nonlinear_dec = ") +
         (pind.nonlinear_dec ? "true" : "false") + "\n";
  out += "epochs = " + std::to_string(pind.epochs) + "\n";
  out += "pilot_epochs = " + std::to_string(pind.pilot_epochs) + "\n";
  out += "lr_grid = " + join(pind.lr_grid) + "\n";
  out += "weight_decay = " + fmt(pind.weight_decay) + "\n";
  out += "train_frac = " + fmt(pind.train_frac) + "\n";
  out += "val_frac = " + fmt(pind.val_frac) + "\n";
  out += "substeps = " + std::to_string(pind.substeps) + "\n";
  out += "interp_factor = " + std::to_string(pind.interp_factor) + "\n";
  out += "interp_substeps = " + std::to_string(pind.interp_substeps) + "\n";
  out += "\n[gp]\n";
  out += "population = " + std::to_string(gp.population) + "\n";
  out += "max_generations = " + std::to_string(gp.max_generations) + "\n";
  out += "stop_eps = " + fmt(gp.stop_eps) + "\n";
  out += "big_k = " + std::to_string(gp.big_k) + "\n";
  out += "p_crossover = " + fmt(gp.p_crossover) + "\n";
  out += "p_subtree = " + fmt(gp.p_subtree) + "\n";
  out += "p_hoist = " + fmt(gp.p_hoist) + "\n";
  out += "p_point = " + fmt(gp.p_point) + "\n";
  out += "parsimony = " + fmt(gp.parsimony) + "\n";
  out += "tournament = " + std::to_string(gp.tournament) + "\n";
  out += "const_lo = " + fmt(gp.const_lo) + "\n";
  out += "const_hi = " + fmt(gp.const_hi) + "\n";
  out += "init_depth_lo = " + std::to_string(gp.init_depth_lo) + "\n";
  out += "init_depth_hi = " + std::to_string(gp.init_depth_hi) + "\n";
  out += std::string("use_sigmoid = ") + (gp.use_sigmoid ? "true" : "false") +
         "\n";
  out += std::string("use_time = ") + (gp.use_time ? "true" : "false") + "\n";
  out += "max_size = " + std::to_string(gp.max_size) + "\n";
  out += "fitness_substeps = " + std::to_string(gp.fitness_substeps) + "\n";
  out += "fitness_stride = " + std::to_string(gp.fitness_stride) + "\n";
  out += "distance_samples = " + std::to_string(gp.distance_samples) + "\n";
  out += "\n[sindy]\n";
  out += "threshold = " + fmt(sindy.threshold) + "\n";
  out += "lambda1 = " + fmt(sindy.lambda1) + "\n";
  out += "lambda2 = " + fmt(sindy.lambda2) + "\n";
  out += "cutoff = " + fmt(sindy.cutoff) + "\n";
  out += "\n[bench]\n";
  out += "methods = " + join(bench.methods) + "\n";
  out += "dynamics = " + join(bench.dynamics) + "\n";
  out += "graphs = " + join(bench.graphs) + "\n";
  out += "seeds = " + std::to_string(bench.seeds) + "\n";
  out += std::string("refine = ") + (bench.refine ? "true" : "false") + "\n";
  out += "refine_budget = " + std::to_string(bench.refine_budget) + "\n";
  out += "snr_list = " + join(bench.snr_list) + "\n";
  out += "dt_list = " + join(bench.dt_list) + "\n";
  out += "dt_horizon = " + fmt(bench.dt_horizon) + "\n";
  out += "bootstrap_resamples = " + std::to_string(bench.bootstrap_resamples) +
         "\n";
  out += "master_seed = " + std::to_string(bench.master_seed) + "\n";
  return out;
}

} // namespace netsr

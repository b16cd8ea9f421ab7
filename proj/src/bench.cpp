#include "netsr/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <random>
#include <stdexcept>

#include <json.hpp>

#include "netsr/pind.hpp"
#include "netsr/rng.hpp"
#include "netsr/sindy.hpp"
#include "netsr/skeleton.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace netsr {

namespace {

std::string fmt(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_num(const std::string& s) {
  double out = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  if (res.ec != std::errc())
    throw std::invalid_argument("bad number: '" + s + "'");
  return out;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return text;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

} // namespace

bool check_recovery(const Expr& found_node, const Expr& found_edge,
                    const DynamicsSpec& truth, double lo, double hi,
                    std::uint64_t seed) {
  EquivOptions node_opt;
  node_opt.lo_i = lo;
  node_opt.hi_i = hi;
  node_opt.edge = false;
  node_opt.seed = mix_seed(seed, 0xf00d);
  if (!skeleton_equiv(found_node, truth.formula_node(), node_opt))
    return false;

  EquivOptions edge_opt;
  edge_opt.lo_i = lo;
  edge_opt.hi_i = hi;
  edge_opt.lo_j = lo;
  edge_opt.hi_j = hi;
  edge_opt.edge = true;
  edge_opt.seed = mix_seed(seed, 0xfeed);
  return skeleton_equiv(found_edge, truth.formula_edge(), edge_opt);
}

std::optional<double> trajectory_mse(const Expr& node_expr,
                                     const Expr& edge_expr,
                                     const Graph& graph,
                                     const Trajectory& clean_obs,
                                     int substeps) {
  std::vector<double> x0(clean_obs.frame(0),
                         clean_obs.frame(0) + clean_obs.n_nodes);
  Trajectory sim;
  try {
    sim = simulate(DynamicsSpec::symbolic(node_expr, edge_expr), graph, x0,
                   clean_obs.timestamps, substeps);
  } catch (const IntegrationError&) {
    return std::nullopt;
  }
  double sse = 0.0;
  for (std::size_t i = 0; i < sim.data.size(); ++i) {
    double d = sim.data[i] - clean_obs.data[i];
    sse += d * d;
  }
  return sse / static_cast<double>(sim.data.size());
}

double OverfitCheck::ratio() const {
  if (diverged) return std::numeric_limits<double>::infinity();
  return extrap_mse / std::max(interp_mse, 1e-300);
}

OverfitCheck overfit_check(const Expr& node_expr, const Expr& edge_expr,
                           const DynamicsSpec& truth, const Graph& graph,
                           const std::vector<double>& x0, double horizon,
                           int samples, int substeps) {
  std::vector<double> times = sample_timestamps(2 * samples - 1,
                                                2.0 * horizon);
  Trajectory ref = simulate(truth, graph, x0, times, substeps);
  OverfitCheck out;
  Trajectory sim;
  try {
    sim = simulate(DynamicsSpec::symbolic(node_expr, edge_expr), graph, x0,
                   times, substeps);
  } catch (const IntegrationError&) {
    out.diverged = true;
    return out;
  }
  const int n = ref.n_nodes;
  auto window_mse = [&](int k_lo, int k_hi) {
    double sse = 0.0;
    for (int k = k_lo; k < k_hi; ++k)
      for (int v = 0; v < n; ++v) {
        double d = sim.at(k, v) - ref.at(k, v);
        sse += d * d;
      }
    return sse / (static_cast<double>(k_hi - k_lo) * n);
  };
  out.interp_mse = window_mse(0, samples);
  out.extrap_mse = window_mse(samples, 2 * samples - 1);
  return out;
}

std::string TrialResult::key() const {
  std::string k = method + "_" + dynamics + "_" + graph + "_s" +
                  std::to_string(seed);
  if (std::isfinite(snr_db)) k += "_snr" + fmt(snr_db);
  if (dt > 0.0) k += "_dt" + fmt(dt);
  return k;
}

std::string trial_to_json(const TrialResult& t) {
  json j;
  j["method"] = t.method;
  j["dynamics"] = t.dynamics;
  j["graph"] = t.graph;
  j["seed"] = t.seed;
  j["snr_db"] = fmt(t.snr_db);  // string: "inf" is a valid level
  j["dt"] = t.dt;
  j["recovered"] = t.recovered;
  j["diverged"] = t.diverged;
  j["node_expr"] = t.node_expr;
  j["edge_expr"] = t.edge_expr;
  if (t.traj_mse) {
    j["traj_mse"] = *t.traj_mse;
    j["traj_mse_x100"] = *t.traj_mse * 100.0;
  } else {
    j["traj_mse"] = nullptr;
  }
  j["wall_time"] = t.wall_time;
  j["details"] = t.details;
  return j.dump(2) + "\n";
}

TrialResult trial_from_json(const std::string& text) {
  json j = json::parse(text);
  TrialResult t;
  t.method = j.at("method").get<std::string>();
  t.dynamics = j.at("dynamics").get<std::string>();
  t.graph = j.at("graph").get<std::string>();
  t.seed = j.at("seed").get<int>();
  t.snr_db = parse_num(j.at("snr_db").get<std::string>());
  t.dt = j.at("dt").get<double>();
  t.recovered = j.at("recovered").get<bool>();
  t.diverged = j.at("diverged").get<bool>();
  t.node_expr = j.at("node_expr").get<std::string>();
  t.edge_expr = j.at("edge_expr").get<std::string>();
  if (!j.at("traj_mse").is_null()) t.traj_mse = j.at("traj_mse").get<double>();
  t.wall_time = j.at("wall_time").get<double>();
  if (j.contains("details"))
    t.details = j.at("details").get<std::map<std::string, double>>();
  return t;
}

Ci bootstrap_ci(const std::vector<double>& values, int resamples,
                std::uint64_t seed) {
  if (values.empty()) return {0.0, 0.0};
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= static_cast<double>(values.size());
  if (values.size() == 1 || resamples < 2) return {mean, mean};

  auto rng = make_rng(seed, 0xb007);
  std::uniform_int_distribution<std::size_t> pick(0, values.size() - 1);
  std::vector<double> means(resamples);
  for (int r = 0; r < resamples; ++r) {
    double acc = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) acc += values[pick(rng)];
    means[r] = acc / static_cast<double>(values.size());
  }
  std::sort(means.begin(), means.end());
  auto at_quantile = [&](double q) {
    double pos = q * (resamples - 1);
    int i = static_cast<int>(pos);
    double frac = pos - i;
    return i + 1 < resamples ? means[i] * (1 - frac) + means[i + 1] * frac
                             : means[i];
  };
  return {at_quantile(0.025), at_quantile(0.975)};
}

std::vector<Aggregate> aggregate_trials(const std::vector<TrialResult>& trials,
                                        const std::string& level_name,
                                        int resamples) {
  // Group key -> trial indices, ordered deterministically.
  std::map<std::tuple<std::string, std::string, std::string, double>,
           std::vector<std::size_t>>
      groups;
  for (std::size_t i = 0; i < trials.size(); ++i) {
    double level = 0.0;
    if (level_name == "snr_db") level = trials[i].snr_db;
    else if (level_name == "dt") level = trials[i].dt;
    groups[{trials[i].method, trials[i].dynamics, trials[i].graph, level}]
        .push_back(i);
  }

  std::vector<Aggregate> out;
  for (const auto& [key, idx] : groups) {
    Aggregate a;
    a.method = std::get<0>(key);
    a.dynamics = std::get<1>(key);
    a.graph = std::get<2>(key);
    a.level_name = level_name;
    a.level = std::get<3>(key);
    a.n_trials = static_cast<int>(idx.size());

    std::vector<double> rec, mses;
    for (std::size_t i : idx) {
      rec.push_back(trials[i].recovered ? 1.0 : 0.0);
      if (trials[i].recovered && trials[i].traj_mse)
        mses.push_back(*trials[i].traj_mse);
      if (trials[i].diverged) ++a.n_diverged;
    }
    double rec_sum = 0.0;
    for (double v : rec) rec_sum += v;
    a.rec_prob = rec.empty() ? 0.0 : rec_sum / rec.size();
    a.rec_ci = bootstrap_ci(rec, resamples,
                            fnv1a(a.method + a.dynamics + a.graph + "rec"));
    a.n_mse = static_cast<int>(mses.size());
    if (!mses.empty()) {
      double m = 0.0;
      for (double v : mses) m += v;
      m /= mses.size();
      double var = 0.0;
      for (double v : mses) var += (v - m) * (v - m);
      a.mse_mean = m;
      a.mse_std = mses.size() > 1 ? std::sqrt(var / (mses.size() - 1)) : 0.0;
      a.mse_ci = bootstrap_ci(mses, resamples,
                              fnv1a(a.method + a.dynamics + a.graph + "mse"));
    }
    out.push_back(std::move(a));
  }
  return out;
}

std::string report_to_csv(const BenchmarkReport& report) {
  std::string out =
      "method,dynamics,graph,level_name,level,n_trials,rec_prob,rec_lo,"
      "rec_hi,n_mse,mse_mean,mse_std,mse_mean_x100,mse_lo,mse_hi,"
      "n_diverged\n";
  for (const Aggregate& a : report.aggregates) {
    out += a.method + ',' + a.dynamics + ',' + a.graph + ',' + a.level_name +
           ',' + fmt(a.level) + ',' + std::to_string(a.n_trials) + ',' +
           fmt(a.rec_prob) + ',' + fmt(a.rec_ci.lo) + ',' + fmt(a.rec_ci.hi) +
           ',' + std::to_string(a.n_mse) + ',' + fmt(a.mse_mean) + ',' +
           fmt(a.mse_std) + ',' + fmt(a.mse_mean * 100.0) + ',' +
           fmt(a.mse_ci.lo) + ',' + fmt(a.mse_ci.hi) + ',' +
           std::to_string(a.n_diverged) + '\n';
  }
  return out;
}

std::string report_to_json(const BenchmarkReport& report) {
  json j;
  j["config"] = report.config_snapshot;
  j["environment"] = report.environment;
  j["level_name"] = report.level_name;
  j["trials"] = json::array();
  for (const TrialResult& t : report.trials)
    j["trials"].push_back(json::parse(trial_to_json(t)));
  j["aggregates"] = json::array();
  for (const Aggregate& a : report.aggregates) {
    json ja;
    ja["method"] = a.method;
    ja["dynamics"] = a.dynamics;
    ja["graph"] = a.graph;
    ja["level_name"] = a.level_name;
    ja["level"] = fmt(a.level);
    ja["n_trials"] = a.n_trials;
    ja["rec_prob"] = a.rec_prob;
    ja["rec_ci"] = {a.rec_ci.lo, a.rec_ci.hi};
    ja["n_mse"] = a.n_mse;
    ja["mse_mean"] = a.mse_mean;
    ja["mse_std"] = a.mse_std;
    ja["mse_mean_x100"] = a.mse_mean * 100.0;
    ja["mse_ci"] = {a.mse_ci.lo, a.mse_ci.hi};
    ja["n_diverged"] = a.n_diverged;
    j["aggregates"].push_back(std::move(ja));
  }
  return j.dump(2) + "\n";
}

std::string environment_info() {
  std::string out = "gcc " __VERSION__;
  out += ", " + std::to_string(sizeof(void*) * 8) + "-bit";
#ifdef __linux__
  out += ", linux";
#endif
#ifdef NDEBUG
  out += ", release";
#else
  out += ", debug";
#endif
  return out;
}

namespace {

struct PindArtifacts {
  PindModel model;
  Trajectory interp;
  double chosen_lr = 0.0;
  double best_val_mse = 0.0;
  double train_seconds = 0.0;
  bool reused = false;
};

// Train (or reload) the surrogate for one data condition; artifacts are
// shared by every neural method at the same condition.
PindArtifacts ensure_pind(const Config& cfg, const DynamicsSpec& spec,
                          const Graph& graph, const Trajectory& obs,
                          const std::string& data_key,
                          const std::string& artifact_dir,
                          std::uint64_t seed) {
  PindArtifacts art;
  std::string model_path = artifact_dir + "/pind_" + data_key + ".json";
  std::string interp_path = artifact_dir + "/interp_" + data_key + ".csv";
  std::string meta_path = artifact_dir + "/pind_" + data_key + ".meta.json";
  if (fs::exists(model_path) && fs::exists(interp_path)) {
    art.model = PindModel::load(model_path);
    art.interp = load_trajectory(interp_path);
    if (fs::exists(meta_path)) {
      json meta = json::parse(read_file(meta_path));
      art.chosen_lr = meta.value("chosen_lr", 0.0);
      art.best_val_mse = meta.value("best_val_mse", 0.0);
      art.train_seconds = meta.value("train_seconds", 0.0);
    }
    art.reused = true;
    return art;
  }

  auto t0 = std::chrono::steady_clock::now();
  PindConfig pcfg = PindConfig::for_dynamics(spec.name());
  pcfg.latent_dim = cfg.pind.latent_dim;
  pcfg.nonlinear_dec = cfg.pind.nonlinear_dec;
  PindModel init = PindModel::make(pcfg, mix_seed(seed, 0x11));

  TrainConfig tcfg;
  tcfg.epochs = cfg.pind.epochs;
  tcfg.pilot_epochs = cfg.pind.pilot_epochs;
  tcfg.lr_grid = cfg.pind.lr_grid;
  tcfg.weight_decay = cfg.pind.weight_decay;
  tcfg.train_frac = cfg.pind.train_frac;
  tcfg.val_frac = cfg.pind.val_frac;
  tcfg.substeps = cfg.pind.substeps;
  tcfg.seed = mix_seed(seed, 0x12);

  TrainResult tr = train(init, graph, obs, tcfg);
  std::vector<double> x0(obs.frame(0), obs.frame(0) + obs.n_nodes);
  art.model = tr.model;
  art.interp = interpolate(tr.model, graph, x0, obs.timestamps,
                           cfg.pind.interp_factor, cfg.pind.interp_substeps);
  art.chosen_lr = tr.chosen_lr;
  art.best_val_mse = tr.best_val_mse;
  art.train_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  art.model.save(model_path);
  save_trajectory(art.interp, interp_path);
  json meta;
  meta["chosen_lr"] = art.chosen_lr;
  meta["best_val_mse"] = art.best_val_mse;
  meta["train_seconds"] = art.train_seconds;
  write_file(meta_path, meta.dump(2) + "\n");
  return art;
}

} // namespace

TrialData make_trial_data(const Config& cfg, const std::string& dyn_name,
                          const std::string& graph_kind, int seed_index,
                          double snr_db, double dt) {
  DynCfg dyn = cfg.dynamics;
  dyn.name = dyn_name;
  dyn.snr_db = snr_db;
  if (dt > 0.0) {
    dyn.horizon = cfg.bench.dt_horizon;
    dyn.samples = static_cast<int>(std::lround(dyn.horizon / dt)) + 1;
  }
  GraphCfg gcfg = cfg.graph;
  gcfg.kind = graph_kind;

  // Data condition seeds are method-independent so methods compare on
  // identical data.
  TrialData data;
  data.stream = mix_seed(
      mix_seed(mix_seed(cfg.bench.master_seed, fnv1a(dyn_name)),
               fnv1a(graph_kind)),
      static_cast<std::uint64_t>(seed_index));
  data.graph = make_graph(gcfg, mix_seed(data.stream, 1));
  data.spec = make_spec(dyn);
  data.x0 = sample_x0(data.spec, data.graph.n_nodes(),
                      mix_seed(data.stream, 2));
  data.times = observation_grid(dyn);
  data.truth = simulate(data.spec, data.graph, data.x0, data.times,
                        dyn.truth_substeps);
  data.obs = std::isfinite(snr_db)
                 ? add_noise(data.truth, snr_db, mix_seed(data.stream, 3))
                 : data.truth;
  data.data_key = dyn_name + "_" + graph_kind + "_s" +
                  std::to_string(seed_index);
  if (std::isfinite(snr_db)) data.data_key += "_snr" + fmt(snr_db);
  if (dt > 0.0) data.data_key += "_dt" + fmt(dt);
  return data;
}

TrialResult run_trial(const Config& cfg, const std::string& method,
                      const std::string& dyn_name,
                      const std::string& graph_kind, int seed_index,
                      double snr_db, double dt, const std::string& out_dir) {
  auto t_start = std::chrono::steady_clock::now();

  TrialResult res;
  res.method = method;
  res.dynamics = dyn_name;
  res.graph = graph_kind;
  res.seed = seed_index;
  res.snr_db = snr_db;
  res.dt = dt > 0.0 ? dt : 0.0;  // 0: default grid, not a sweep level

  TrialData data = make_trial_data(cfg, dyn_name, graph_kind, seed_index,
                                   snr_db, dt);
  const Graph& graph = data.graph;
  const DynamicsSpec& spec = data.spec;
  const Trajectory& truth = data.truth;
  const Trajectory& obs = data.obs;
  std::uint64_t s_trial = data.stream;

  Expr found_node, found_edge;
  if (method == "sindy") {
    SparseFitResult fit = sindy_fit(obs, graph, FunctionLibrary::polynomial(),
                                    cfg.sindy.threshold);
    found_node = fit.node_expr;
    found_edge = fit.edge_expr;
    res.details["ok"] = fit.ok ? 1.0 : 0.0;
    res.details["rank_warning"] = fit.rank_warning ? 1.0 : 0.0;
    res.details["n_active"] = static_cast<double>(fit.active_columns.size());
  } else if (method == "tp-sindy") {
    SparseFitResult fit =
        tp_sindy(obs, graph, FunctionLibrary::extended(), cfg.sindy.lambda1,
                 cfg.sindy.lambda2, cfg.sindy.cutoff);
    found_node = fit.node_expr;
    found_edge = fit.edge_expr;
    res.details["ok"] = fit.ok ? 1.0 : 0.0;
    res.details["rank_warning"] = fit.rank_warning ? 1.0 : 0.0;
    res.details["n_active"] = static_cast<double>(fit.active_columns.size());
  } else if (method == "neural-gp" || method == "neural-gp-joint" ||
             method == "neural-gp-no-interp") {
    PindArtifacts art = ensure_pind(cfg, spec, graph, obs, data.data_key,
                                    out_dir + "/artifacts",
                                    mix_seed(s_trial, 4));
    NeuralRefs refs = extract_refs(art.model);
    BatchRef f_ref = [&refs](const std::vector<double>& xi,
                             const std::vector<double>&) {
      return refs.f(xi);
    };
    BatchRef g_ref = [&refs](const std::vector<double>& xi,
                             const std::vector<double>& xj) {
      return refs.g(xi, xj);
    };

    GpConfig gpcfg = cfg.gp;
    gpcfg.seed = mix_seed(s_trial, 5);
    const bool no_interp = method == "neural-gp-no-interp";
    const Trajectory& fit_traj = no_interp ? obs : art.interp;
    if (no_interp) gpcfg.fitness_stride = 1;  // raw grid is already coarse

    SearchResult sr =
        coordinated_search(f_ref, g_ref, fit_traj, graph, gpcfg,
                           method == "neural-gp-joint");

    found_node = sr.best_f;
    found_edge = sr.best_g;
    if (cfg.bench.refine) {
      PairEvaluator ev(graph, fit_traj, gpcfg.fitness_substeps,
                       gpcfg.fitness_stride);
      Expr edge_fixed = found_edge;
      found_node = refine_constants(
          found_node,
          [&](const Expr& cand) { return ev.pair_error(cand, edge_fixed); },
          cfg.bench.refine_budget);
      Expr node_fixed = found_node;
      found_edge = refine_constants(
          found_edge,
          [&](const Expr& cand) { return ev.pair_error(node_fixed, cand); },
          cfg.bench.refine_budget);
    }

    res.details["generations"] = sr.generations;
    res.details["converged"] = sr.converged ? 1.0 : 0.0;
    res.details["best_error"] = sr.best_error;
    res.details["logical_pairs"] = static_cast<double>(sr.logical_pairs);
    res.details["simulated_pairs"] = static_cast<double>(sr.simulated_pairs);
    res.details["search_seconds"] = sr.wall_seconds;
    res.details["chosen_lr"] = art.chosen_lr;
    res.details["pind_val_mse"] = art.best_val_mse;
    res.details["train_seconds"] = art.train_seconds;
  } else {
    throw std::invalid_argument("unknown method: " + method);
  }

  res.node_expr = found_node.str();
  res.edge_expr = found_edge.str();
  res.recovered = check_recovery(found_node, found_edge, spec, spec.x0_lo(),
                                 spec.x0_hi(), mix_seed(s_trial, 7));
  if (res.recovered) {
    auto mse = trajectory_mse(found_node, found_edge, graph, truth,
                              cfg.dynamics.truth_substeps);
    if (mse) res.traj_mse = *mse;
    else res.diverged = true;
  }
  res.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                    t_start)
          .count();
  return res;
}

namespace {

BenchmarkReport drive(const Config& cfg, const std::string& out_dir,
                      const std::vector<std::string>& methods,
                      const std::vector<double>& levels, bool levels_are_dt,
                      const std::string& level_name) {
  fs::create_directories(out_dir + "/trials");
  fs::create_directories(out_dir + "/artifacts");
  write_file(out_dir + "/config_used.ini", cfg.to_ini());

  BenchmarkReport report;
  report.config_snapshot = cfg.to_ini();
  report.environment = environment_info();
  report.level_name = level_name;

  for (const std::string& dyn_name : cfg.bench.dynamics) {
    for (const std::string& graph_kind : cfg.bench.graphs) {
      for (double level : levels) {
        double snr = levels_are_dt ? cfg.dynamics.snr_db : level;
        double dt = levels_are_dt ? level : 0.0;
        for (int seed = 0; seed < cfg.bench.seeds; ++seed) {
          for (const std::string& method : methods) {
            TrialResult probe;
            probe.method = method;
            probe.dynamics = dyn_name;
            probe.graph = graph_kind;
            probe.seed = seed;
            probe.snr_db = snr;
            probe.dt = dt;
            std::string path =
                out_dir + "/trials/" + probe.key() + ".json";
            TrialResult res;
            if (fs::exists(path)) {
              res = trial_from_json(read_file(path));
            } else {
              try {
                res = run_trial(cfg, method, dyn_name, graph_kind, seed, snr,
                                dt, out_dir);
              } catch (const std::exception& e) {
                res = probe;
                res.details["failed"] = 1.0;
                res.node_expr = std::string("error: ") + e.what();
              }
              write_file(path, trial_to_json(res));
            }
            report.trials.push_back(std::move(res));
          }
        }
      }
    }
  }

  report.aggregates = aggregate_trials(report.trials, level_name,
                                       cfg.bench.bootstrap_resamples);
  write_report(report, out_dir);
  return report;
}

} // namespace

BenchmarkReport run_benchmark(const Config& cfg, const std::string& out_dir) {
  return drive(cfg, out_dir, cfg.bench.methods, {cfg.dynamics.snr_db}, false,
               "");
}

BenchmarkReport sweep_noise(const Config& cfg,
                            const std::vector<double>& snr_list,
                            const std::string& out_dir) {
  if (snr_list.empty()) throw std::invalid_argument("empty snr list");
  return drive(cfg, out_dir, cfg.bench.methods, snr_list, false, "snr_db");
}

BenchmarkReport sweep_dt(const Config& cfg, const std::vector<double>& dt_list,
                         const std::string& out_dir) {
  if (dt_list.empty()) throw std::invalid_argument("empty dt list");
  for (double dt : dt_list)
    if (!(dt > 0.0)) throw std::invalid_argument("dt levels must be > 0");
  return drive(cfg, out_dir, cfg.bench.methods, dt_list, true, "dt");
}

BenchmarkReport ablate(const Config& cfg, const std::string& variant,
                       const std::string& out_dir) {
  std::string mapped;
  if (variant == "no-coord") mapped = "neural-gp-joint";
  else if (variant == "no-interp") mapped = "neural-gp-no-interp";
  else throw std::invalid_argument("unknown ablation variant: " + variant);
  return drive(cfg, out_dir, {"neural-gp", mapped}, {cfg.dynamics.snr_db},
               false, "");
}

BenchmarkReport recompute_report(const Config& cfg,
                                 const std::string& out_dir) {
  BenchmarkReport report;
  report.config_snapshot = cfg.to_ini();
  report.environment = environment_info();

  std::vector<fs::path> files;
  fs::path trials_dir = fs::path(out_dir) / "trials";
  if (fs::exists(trials_dir))
    for (const auto& entry : fs::directory_iterator(trials_dir))
      if (entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  for (const fs::path& p : files)
    report.trials.push_back(trial_from_json(read_file(p.string())));

  // Infer the sweep axis from the stored trials.
  std::vector<double> dts, snrs;
  for (const TrialResult& t : report.trials) {
    if (t.dt > 0.0) dts.push_back(t.dt);
    snrs.push_back(t.snr_db);
  }
  std::sort(dts.begin(), dts.end());
  dts.erase(std::unique(dts.begin(), dts.end()), dts.end());
  std::sort(snrs.begin(), snrs.end());
  snrs.erase(std::unique(snrs.begin(), snrs.end()), snrs.end());
  if (dts.size() > 1) report.level_name = "dt";
  else if (snrs.size() > 1) report.level_name = "snr_db";

  report.aggregates = aggregate_trials(report.trials, report.level_name,
                                       cfg.bench.bootstrap_resamples);
  return report;
}

void write_report(const BenchmarkReport& report, const std::string& out_dir) {
  fs::create_directories(out_dir);
  write_file(out_dir + "/report.json", report_to_json(report));
  write_file(out_dir + "/report.csv", report_to_csv(report));
}

} // namespace netsr

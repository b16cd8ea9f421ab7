#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "netsr/bench.hpp"
#include "netsr/config.hpp"
#include "netsr/gp.hpp"
#include "netsr/pind.hpp"
#include "netsr/rng.hpp"
#include "netsr/sindy.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace netsr;

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

// The single-run commands (generate, train-pind, search, baseline) all
// operate on the data condition configured in [dynamics]/[graph].
TrialData configured_data(const Config& cfg, int seed_index) {
  return make_trial_data(cfg, cfg.dynamics.name, cfg.graph.kind, seed_index,
                         cfg.dynamics.snr_db, 0.0);
}

int cmd_generate(const Config& cfg, const std::string& out_dir,
                 int seed_index) {
  TrialData data = configured_data(cfg, seed_index);
  fs::create_directories(out_dir);
  save_edge_list(data.graph, out_dir + "/graph.edges");
  save_trajectory(data.truth, out_dir + "/truth.csv");
  save_trajectory(data.obs, out_dir + "/obs.csv");
  json meta;
  meta["dynamics"] = cfg.dynamics.name;
  meta["graph"] = cfg.graph.kind;
  meta["nodes"] = data.graph.n_nodes();
  meta["seed_index"] = seed_index;
  meta["snr_db"] = std::isfinite(cfg.dynamics.snr_db)
                       ? std::to_string(cfg.dynamics.snr_db)
                       : "inf";
  meta["truth_node"] = data.spec.formula_node().str();
  meta["truth_edge"] = data.spec.formula_edge().str();
  write_text(out_dir + "/meta.json", meta.dump(2) + "\n");
  std::cout << "wrote graph + trajectories for " << data.data_key << " to "
            << out_dir << "\n";
  return 0;
}

int cmd_train_pind(const Config& cfg, const std::string& out_dir,
                   int seed_index) {
  TrialData data = configured_data(cfg, seed_index);
  fs::create_directories(out_dir);

  PindConfig pcfg = PindConfig::for_dynamics(cfg.dynamics.name);
  pcfg.latent_dim = cfg.pind.latent_dim;
  pcfg.nonlinear_dec = cfg.pind.nonlinear_dec;
  PindModel init = PindModel::make(pcfg, mix_seed(data.stream, 0x11));

  TrainConfig tcfg;
  tcfg.epochs = cfg.pind.epochs;
  tcfg.pilot_epochs = cfg.pind.pilot_epochs;
  tcfg.lr_grid = cfg.pind.lr_grid;
  tcfg.weight_decay = cfg.pind.weight_decay;
  tcfg.train_frac = cfg.pind.train_frac;
  tcfg.val_frac = cfg.pind.val_frac;
  tcfg.substeps = cfg.pind.substeps;
  tcfg.seed = mix_seed(data.stream, 0x12);

  TrainResult tr = train(init, data.graph, data.obs, tcfg);
  tr.model.save(out_dir + "/pind.json");
  write_text(out_dir + "/curves.csv", curves_to_csv(tr.curves));
  Trajectory interp =
      interpolate(tr.model, data.graph, data.x0, data.obs.timestamps,
                  cfg.pind.interp_factor, cfg.pind.interp_substeps);
  save_trajectory(interp, out_dir + "/interp.csv");

  std::cout << "trained surrogate: lr " << tr.chosen_lr << ", val mse "
            << tr.best_val_mse << "; wrote pind.json, curves.csv, interp.csv"
            << "\n";
  return 0;
}

int cmd_search(const Config& cfg, const std::string& out_dir, int seed_index,
               const std::string& model_path, const std::string& interp_path,
               bool joint) {
  TrialData data = configured_data(cfg, seed_index);
  fs::create_directories(out_dir);
  std::string mp = model_path.empty() ? out_dir + "/pind.json" : model_path;
  std::string ip = interp_path.empty() ? out_dir + "/interp.csv" : interp_path;
  PindModel model = PindModel::load(mp);
  Trajectory interp = load_trajectory(ip);

  NeuralRefs refs = extract_refs(model);
  BatchRef f_ref = [&refs](const std::vector<double>& xi,
                           const std::vector<double>&) { return refs.f(xi); };
  BatchRef g_ref = [&refs](const std::vector<double>& xi,
                           const std::vector<double>& xj) {
    return refs.g(xi, xj);
  };

  GpConfig gpcfg = cfg.gp;
  gpcfg.seed = mix_seed(data.stream, 5);
  SearchResult sr =
      coordinated_search(f_ref, g_ref, interp, data.graph, gpcfg, joint);

  write_text(out_dir + "/history.csv", history_to_csv(sr.history));
  json j;
  j["node_expr"] = sr.best_f.str();
  j["edge_expr"] = sr.best_g.str();
  j["node_constants"] = sr.best_f.constants();
  j["edge_constants"] = sr.best_g.constants();
  j["best_error"] = sr.best_error;
  j["converged"] = sr.converged;
  j["generations"] = sr.generations;
  j["logical_pairs"] = sr.logical_pairs;
  j["simulated_pairs"] = sr.simulated_pairs;
  j["wall_seconds"] = sr.wall_seconds;
  write_text(out_dir + "/result.json", j.dump(2) + "\n");

  std::cout << "search " << (sr.converged ? "converged" : "exhausted budget")
            << " after " << sr.generations << " generations; best pair:\n"
            << "  F = " << sr.best_f.str() << "\n"
            << "  G = " << sr.best_g.str() << "\n";
  return 0;
}

int cmd_baseline(const Config& cfg, const std::string& out_dir,
                 int seed_index, const std::string& method) {
  TrialData data = configured_data(cfg, seed_index);
  fs::create_directories(out_dir);
  SparseFitResult fit;
  if (method == "sindy") {
    fit = sindy_fit(data.obs, data.graph, FunctionLibrary::polynomial(),
                    cfg.sindy.threshold);
  } else if (method == "tp-sindy") {
    fit = tp_sindy(data.obs, data.graph, FunctionLibrary::extended(),
                   cfg.sindy.lambda1, cfg.sindy.lambda2, cfg.sindy.cutoff);
  } else {
    throw std::invalid_argument("baseline method must be sindy or tp-sindy");
  }
  json j;
  j["method"] = method;
  j["ok"] = fit.ok;
  j["node_expr"] = fit.node_expr.str();
  j["edge_expr"] = fit.edge_expr.str();
  j["active_columns"] = fit.active_columns;
  j["rank_warning"] = fit.rank_warning;
  j["recovered"] = check_recovery(fit.node_expr, fit.edge_expr, data.spec,
                                  data.spec.x0_lo(), data.spec.x0_hi(),
                                  mix_seed(data.stream, 7));
  write_text(out_dir + "/baseline_" + method + ".json", j.dump(2) + "\n");
  std::cout << method << ": F = " << fit.node_expr.str()
            << "; G = " << fit.edge_expr.str() << "\n";
  return 0;
}

void print_summary(const BenchmarkReport& report) {
  for (const Aggregate& a : report.aggregates) {
    std::cout << a.method << " on " << a.dynamics << "/" << a.graph;
    if (!a.level_name.empty())
      std::cout << " @ " << a.level_name << "=" << a.level;
    std::cout << ": rec " << a.rec_prob << " (" << a.n_trials << " trials)";
    if (a.n_mse > 0)
      std::cout << ", mse x100 " << a.mse_mean * 100.0 << " +/- "
                << a.mse_std * 100.0;
    std::cout << "\n";
  }
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"simulate network dynamics, train a neural surrogate, and "
               "recover closed-form node/edge dynamics"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  int parallelism = 1;
  bool paper_scale = false;
  app.add_option("--config", config_path, "INI config file");
  app.add_option("--seed", seed, "master seed (overrides the config)");
  app.add_option("--out-dir", out_dir, "output directory")
      ->capture_default_str();
  app.add_option("--parallelism", parallelism,
                 "worker count (evaluation is currently sequential)")
      ->capture_default_str();
  app.add_flag("--paper-scale", paper_scale,
               "published run sizes (200 nodes, 100 seeds, population 200)");

  int seed_index = 0;
  std::string baseline_method = "tp-sindy";
  std::string model_path, interp_path, variant;
  bool joint = false;

  CLI::App* c_generate =
      app.add_subcommand("generate", "write the graph and trajectories");
  c_generate->add_option("--trial", seed_index, "trial index");
  CLI::App* c_train =
      app.add_subcommand("train-pind", "train the neural surrogate");
  c_train->add_option("--trial", seed_index, "trial index");
  CLI::App* c_search = app.add_subcommand(
      "search", "run the symbolic search against a trained surrogate");
  c_search->add_option("--trial", seed_index, "trial index");
  c_search->add_option("--model", model_path, "surrogate checkpoint path");
  c_search->add_option("--interp", interp_path,
                       "interpolated trajectory path");
  c_search->add_flag("--joint", joint, "evolve both populations every "
                                       "generation");
  CLI::App* c_baseline =
      app.add_subcommand("baseline", "sparse-regression baseline");
  c_baseline->add_option("--trial", seed_index, "trial index");
  c_baseline->add_option("--method", baseline_method, "sindy or tp-sindy")
      ->capture_default_str();
  CLI::App* c_bench =
      app.add_subcommand("bench", "full benchmark over the config");
  CLI::App* c_noise =
      app.add_subcommand("sweep-noise", "recovery vs noise level");
  CLI::App* c_dt =
      app.add_subcommand("sweep-dt", "recovery vs sampling interval");
  CLI::App* c_ablate = app.add_subcommand("ablate", "ablation run");
  c_ablate->add_option("--variant", variant, "no-interp or no-coord")
      ->required();
  CLI::App* c_report =
      app.add_subcommand("report", "recompute the report from stored trials");

  for (CLI::App* sc : {c_generate, c_train, c_search, c_baseline, c_bench,
                       c_noise, c_dt, c_ablate, c_report})
    sc->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    Config cfg = config_path.empty() ? Config::desk_defaults()
                                     : Config::load_file(config_path);
    if (paper_scale) cfg.apply_paper_scale();
    if (app.count("--seed") > 0) cfg.bench.master_seed = seed;
    cfg.gp.seed = cfg.bench.master_seed;
    (void)parallelism;

    if (c_generate->parsed()) return cmd_generate(cfg, out_dir, seed_index);
    if (c_train->parsed()) return cmd_train_pind(cfg, out_dir, seed_index);
    if (c_search->parsed())
      return cmd_search(cfg, out_dir, seed_index, model_path, interp_path,
                        joint);
    if (c_baseline->parsed())
      return cmd_baseline(cfg, out_dir, seed_index, baseline_method);
    if (c_bench->parsed()) {
      print_summary(run_benchmark(cfg, out_dir));
      return 0;
    }
    if (c_noise->parsed()) {
      print_summary(sweep_noise(cfg, cfg.bench.snr_list, out_dir));
      return 0;
    }
    if (c_dt->parsed()) {
      print_summary(sweep_dt(cfg, cfg.bench.dt_list, out_dir));
      return 0;
    }
    if (c_ablate->parsed()) {
      print_summary(ablate(cfg, variant, out_dir));
      return 0;
    }
    if (c_report->parsed()) {
      BenchmarkReport report = recompute_report(cfg, out_dir);
      write_report(report, out_dir);
      print_summary(report);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

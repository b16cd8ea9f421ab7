#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "netsr/dynamics.hpp"
#include "netsr/gp.hpp"
#include "netsr/graph.hpp"

namespace netsr {

// Flat "section.key" -> value view of an INI file: [section] headers,
// key = value lines, # or ; comments. Values keep inner whitespace.
std::map<std::string, std::string> parse_ini(const std::string& text);

struct GraphCfg {
  std::string kind = "ba";  // "ba" or "er"
  int nodes = 50;
  int ba_m = 3;
  double er_p = 0.02;
};

Graph make_graph(const GraphCfg& cfg, std::uint64_t seed);

struct DynCfg {
  std::string name = "kur";  // sis | lv | kur | wc
  double horizon = 1.0;
  int samples = 100;
  int truth_substeps = 20;
  double snr_db = std::numeric_limits<double>::infinity();  // inf = clean
  // Built-in dynamics parameters; defaults match DynamicsSpec.
  double delta = 0.5;
  double alpha = 0.75;
  double theta = 0.5;
  double omega = 0.75;
  double tau = 0.75;
  double mu = 0.5;
  bool wc_flipped_sign = false;
};

DynamicsSpec make_spec(const DynCfg& cfg);
std::vector<double> observation_grid(const DynCfg& cfg);

struct PindSettings {
  int latent_dim = 10;
  bool nonlinear_dec = false;
  int epochs = 1000;
  int pilot_epochs = 150;
  std::vector<double> lr_grid = {1e-3, 3e-3, 1e-2};
  double weight_decay = 1e-3;
  double train_frac = 0.8;
  double val_frac = 0.1;
  int substeps = 2;
  int interp_factor = 4;
  int interp_substeps = 2;
};

struct SindyCfg {
  double threshold = 0.05;  // single-phase STLSQ threshold
  double lambda1 = 0.05;
  double lambda2 = 0.05;
  double cutoff = 0.1;
};

struct BenchCfg {
  std::vector<std::string> methods = {"neural-gp", "sindy", "tp-sindy"};
  std::vector<std::string> dynamics = {"sis", "lv", "kur", "wc"};
  std::vector<std::string> graphs = {"ba"};
  int seeds = 5;
  bool refine = true;  // constant-refinement post-pass on found pairs
  int refine_budget = 200;
  std::vector<double> snr_list = {70, 60, 50, 40, 35, 30, 25};
  std::vector<double> dt_list = {0.005, 0.01, 0.02, 0.04};
  double dt_horizon = 1.0;
  int bootstrap_resamples = 1000;
  std::uint64_t master_seed = 0;
};

struct Config {
  GraphCfg graph;
  DynCfg dynamics;
  PindSettings pind;
  GpConfig gp;
  SindyCfg sindy;
  BenchCfg bench;

  // Desk-scale run sizes: 50-node graphs, 5 seeds, BA only. Search and
  // training hyperparameters keep their published values.
  static Config desk_defaults();
  // Published run sizes: 200-node graphs, 100 seeds, both graph families.
  void apply_paper_scale();

  static Config from_ini(const std::string& text);
  static Config load_file(const std::string& path);
  std::string to_ini() const;
};

} // namespace netsr

#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "netsr/autodiff.hpp"
#include "netsr/graph.hpp"
#include "netsr/trajectory.hpp"

namespace netsr {

// Neural surrogate of the coupled dynamics: latent derivative
//   dh_v/dt = phi_n(Enc(x_v), t) + sum_u a_vu phi_e(Enc(x_v), Enc(x_u), t)
// decoded back to state space and integrated by RK4.
struct PindConfig {
  int latent_dim = 10;
  int phi_n_layers = 2;  // hidden layers
  int phi_e_layers = 2;
  Act act_phi_n = Act::kRelu;
  Act act_phi_e = Act::kRelu;
  Act act_enc = Act::kRelu;
  Act act_dec = Act::kRelu;  // only used when nonlinear_dec
  // Default decoder is strictly linear (single bias-free layer) so that
  // decoding commutes with the latent sum and the extracted node/edge
  // references add up to the full right-hand side exactly.
  bool nonlinear_dec = false;

  // Per-dynamics presets ("sis", "lv", "kur", "wc").
  static PindConfig for_dynamics(const std::string& name);
};

struct PindModel {
  PindConfig cfg;
  Mlp enc;    // 1 -> d'
  Mlp phi_n;  // d'+1 -> d'
  Mlp phi_e;  // 2d'+1 -> d'
  Mlp dec;    // d' -> 1

  static PindModel make(const PindConfig& cfg, std::uint64_t seed);

  void collect_params(std::vector<Tensor*>& out);
  void collect_params(std::vector<const Tensor*>& out) const;

  void save(const std::string& path) const;
  static PindModel load(const std::string& path);
};

struct TrainConfig {
  int epochs = 1000;
  int pilot_epochs = 150;                      // per learning-rate candidate
  std::vector<double> lr_grid = {1e-3, 3e-3, 1e-2};
  double weight_decay = 1e-3;
  double train_frac = 0.8;
  double val_frac = 0.1;  // remainder is the test split
  int substeps = 2;       // RK4 substeps per observation interval
  std::uint64_t seed = 0;
};

struct TrainResult {
  PindModel model;       // best-validation checkpoint
  double chosen_lr = 0.0;
  double best_val_mse = 0.0;
  double final_train_mse = 0.0;
  std::vector<std::array<double, 3>> curves;  // epoch, train_mse, val_mse
  std::vector<int> train_idx, val_idx, test_idx;
};

std::string curves_to_csv(const std::vector<std::array<double, 3>>& curves);

// Surrogate right-hand side at one state (length n_nodes, dim 1).
std::vector<double> pind_rhs(const PindModel& model, const Graph& graph,
                             const std::vector<double>& state, double t);

// RK4 integration of the surrogate hitting every requested timestamp.
Trajectory pind_forward(const PindModel& model, const Graph& graph,
                        const std::vector<double>& x0,
                        const std::vector<double>& timestamps,
                        int substeps = 2);

// Fits the surrogate to observations: full-trajectory forward from the
// first observed frame, MSE on the training timestamps, AdamW, learning
// rate picked on the validation split from cfg.lr_grid via short pilot
// runs. Deterministic given (cfg.seed, inputs). Throws on non-finite loss.
TrainResult train(const PindModel& init, const Graph& graph,
                  const Trajectory& observations, const TrainConfig& cfg);

// Dense regular resample of the fitted trajectory over the observation
// window: (K-1)*factor + 1 points, so every observation time reappears.
Trajectory interpolate(const PindModel& model, const Graph& graph,
                       const std::vector<double>& x0,
                       const std::vector<double>& obs_timestamps,
                       int factor = 4, int substeps = 2);

// Neural references: F_hat(x) = Dec(phi_n(Enc(x), 0)),
// G_hat(x_i, x_j) = Dec(phi_e(Enc(x_i), Enc(x_j), 0)).
struct NeuralRefs {
  PindModel model;

  std::vector<double> f(const std::vector<double>& x) const;
  std::vector<double> g(const std::vector<double>& xi,
                        const std::vector<double>& xj) const;
  double f1(double x) const;
  double g1(double xi, double xj) const;
};

NeuralRefs extract_refs(const PindModel& model);

} // namespace netsr

#include "netsr/pind.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "netsr/dynamics.hpp"
#include "netsr/rng.hpp"

namespace netsr {

PindConfig PindConfig::for_dynamics(const std::string& name) {
  PindConfig c;
  if (name == "sis") {
    c.phi_n_layers = 2;
    c.phi_e_layers = 2;
    c.act_phi_n = Act::kRelu;
    c.act_phi_e = Act::kRelu;
    c.act_enc = Act::kRelu;
    c.act_dec = Act::kRelu;
  } else if (name == "lv") {
    c.phi_n_layers = 2;
    c.phi_e_layers = 2;
    c.act_phi_n = Act::kRelu;
    c.act_phi_e = Act::kTanh;
    c.act_enc = Act::kTanh;
    c.act_dec = Act::kTanh;
  } else if (name == "kur") {
    c.phi_n_layers = 1;
    c.phi_e_layers = 3;
    c.act_phi_n = Act::kRelu;
    c.act_phi_e = Act::kTanh;
    c.act_enc = Act::kTanh;
    c.act_dec = Act::kTanh;
  } else if (name == "wc") {
    c.phi_n_layers = 1;
    c.phi_e_layers = 2;
    c.act_phi_n = Act::kRelu;
    c.act_phi_e = Act::kSigmoid;
    c.act_enc = Act::kRelu;
    c.act_dec = Act::kRelu;
  } else {
    throw std::invalid_argument("no surrogate preset for '" + name + "'");
  }
  return c;
}

namespace {

std::vector<int> mlp_sizes(int in, int hidden, int layers, int out) {
  std::vector<int> s{in};
  for (int l = 0; l < layers; ++l) s.push_back(hidden);
  s.push_back(out);
  return s;
}

} // namespace

PindModel PindModel::make(const PindConfig& cfg, std::uint64_t seed) {
  PindModel m;
  m.cfg = cfg;
  int d = cfg.latent_dim;
  m.enc = Mlp::make(mlp_sizes(1, d, 1, d), cfg.act_enc, mix_seed(seed, 1));
  m.phi_n = Mlp::make(mlp_sizes(d + 1, d, cfg.phi_n_layers, d), cfg.act_phi_n,
                      mix_seed(seed, 2));
  m.phi_e = Mlp::make(mlp_sizes(2 * d + 1, d, cfg.phi_e_layers, d),
                      cfg.act_phi_e, mix_seed(seed, 3));
  if (cfg.nonlinear_dec) {
    m.dec = Mlp::make(mlp_sizes(d, d, 1, 1), cfg.act_dec, mix_seed(seed, 4));
  } else {
    m.dec = Mlp::make({d, 1}, Act::kIdentity, mix_seed(seed, 4),
                      Act::kIdentity, /*use_bias=*/false);
  }
  return m;
}

void PindModel::collect_params(std::vector<Tensor*>& out) {
  enc.collect_params(out);
  phi_n.collect_params(out);
  phi_e.collect_params(out);
  dec.collect_params(out);
}

void PindModel::collect_params(std::vector<const Tensor*>& out) const {
  enc.collect_params(out);
  phi_n.collect_params(out);
  phi_e.collect_params(out);
  dec.collect_params(out);
}

namespace {

nlohmann::json tensor_to_json(const Tensor& t) {
  return {{"rows", t.rows}, {"cols", t.cols}, {"data", t.v}};
}

Tensor tensor_from_json(const nlohmann::json& j) {
  Tensor t(j.at("rows").get<int>(), j.at("cols").get<int>());
  t.v = j.at("data").get<std::vector<double>>();
  if (t.v.size() != static_cast<std::size_t>(t.rows) * t.cols)
    throw std::runtime_error("model file: tensor size mismatch");
  return t;
}

nlohmann::json mlp_to_json(const Mlp& m) {
  nlohmann::json j;
  j["sizes"] = m.sizes;
  j["hidden"] = act_name(m.hidden);
  j["output"] = act_name(m.output);
  j["use_bias"] = m.use_bias;
  for (const auto& w : m.weights) j["weights"].push_back(tensor_to_json(w));
  for (const auto& b : m.biases) j["biases"].push_back(tensor_to_json(b));
  return j;
}

Mlp mlp_from_json(const nlohmann::json& j) {
  Mlp m;
  m.sizes = j.at("sizes").get<std::vector<int>>();
  m.hidden = act_from_name(j.at("hidden").get<std::string>());
  m.output = act_from_name(j.at("output").get<std::string>());
  m.use_bias = j.at("use_bias").get<bool>();
  for (const auto& w : j.at("weights")) m.weights.push_back(tensor_from_json(w));
  for (const auto& b : j.at("biases")) m.biases.push_back(tensor_from_json(b));
  return m;
}

} // namespace

void PindModel::save(const std::string& path) const {
  nlohmann::json j;
  j["arch"] = {{"latent_dim", cfg.latent_dim},
               {"phi_n_layers", cfg.phi_n_layers},
               {"phi_e_layers", cfg.phi_e_layers},
               {"act_phi_n", act_name(cfg.act_phi_n)},
               {"act_phi_e", act_name(cfg.act_phi_e)},
               {"act_enc", act_name(cfg.act_enc)},
               {"act_dec", act_name(cfg.act_dec)},
               {"nonlinear_dec", cfg.nonlinear_dec}};
  j["enc"] = mlp_to_json(enc);
  j["phi_n"] = mlp_to_json(phi_n);
  j["phi_e"] = mlp_to_json(phi_e);
  j["dec"] = mlp_to_json(dec);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(1);
}

PindModel PindModel::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  PindModel m;
  const auto& a = j.at("arch");
  m.cfg.latent_dim = a.at("latent_dim").get<int>();
  m.cfg.phi_n_layers = a.at("phi_n_layers").get<int>();
  m.cfg.phi_e_layers = a.at("phi_e_layers").get<int>();
  m.cfg.act_phi_n = act_from_name(a.at("act_phi_n").get<std::string>());
  m.cfg.act_phi_e = act_from_name(a.at("act_phi_e").get<std::string>());
  m.cfg.act_enc = act_from_name(a.at("act_enc").get<std::string>());
  m.cfg.act_dec = act_from_name(a.at("act_dec").get<std::string>());
  m.cfg.nonlinear_dec = a.at("nonlinear_dec").get<bool>();
  m.enc = mlp_from_json(j.at("enc"));
  m.phi_n = mlp_from_json(j.at("phi_n"));
  m.phi_e = mlp_from_json(j.at("phi_e"));
  m.dec = mlp_from_json(j.at("dec"));
  return m;
}

namespace {

// Tape-free surrogate right-hand side over tensors (rows = nodes).
Tensor rhs_infer(const PindModel& m, const DirectedEdges& de, int n,
                 const Tensor& x, double t) {
  Tensor h = m.enc.apply(x);  // n x d'
  Tensor tcol(n, 1);
  for (double& v : tcol.v) v = t;

  Tensor hn_in(n, h.cols + 1);
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < h.cols; ++c) hn_in.at(r, c) = h.at(r, c);
    hn_in.at(r, h.cols) = t;
  }
  Tensor latent = m.phi_n.apply(hn_in);  // n x d'

  if (de.size() > 0) {
    int e = de.size();
    Tensor he_in(e, 2 * h.cols + 1);
    for (int r = 0; r < e; ++r) {
      int vd = de.dst[r], vs = de.src[r];
      for (int c = 0; c < h.cols; ++c) {
        he_in.at(r, c) = h.at(vd, c);
        he_in.at(r, h.cols + c) = h.at(vs, c);
      }
      he_in.at(r, 2 * h.cols) = t;
    }
    Tensor msg = m.phi_e.apply(he_in);  // e x d'
    for (int r = 0; r < e; ++r)
      for (int c = 0; c < latent.cols; ++c)
        latent.at(de.dst[r], c) += de.weight[r] * msg.at(r, c);
  }
  return m.dec.apply(latent);  // n x 1
}

Tensor state_to_tensor(const std::vector<double>& x) {
  Tensor t(static_cast<int>(x.size()), 1);
  t.v = x;
  return t;
}

void check_finite_state(const Tensor& x, double t) {
  for (int r = 0; r < x.rows; ++r)
    if (!(std::abs(x.v[r]) <= kDivergeBound))
      throw IntegrationError("surrogate state diverged", t, r);
}

} // namespace

std::vector<double> pind_rhs(const PindModel& model, const Graph& graph,
                             const std::vector<double>& state, double t) {
  if (static_cast<int>(state.size()) != graph.n_nodes())
    throw std::invalid_argument("state size must equal node count");
  DirectedEdges de(graph);
  Tensor out =
      rhs_infer(model, de, graph.n_nodes(), state_to_tensor(state), t);
  return out.v;
}

Trajectory pind_forward(const PindModel& model, const Graph& graph,
                        const std::vector<double>& x0,
                        const std::vector<double>& timestamps, int substeps) {
  if (timestamps.empty()) throw std::invalid_argument("no timestamps");
  DirectedEdges de(graph);
  const int n = graph.n_nodes();

  Trajectory traj;
  traj.timestamps = timestamps;
  traj.n_nodes = n;
  traj.dim = 1;
  traj.data.reserve(timestamps.size() * n);
  traj.data.insert(traj.data.end(), x0.begin(), x0.end());

  Tensor x = state_to_tensor(x0);
  for (std::size_t seg = 0; seg + 1 < timestamps.size(); ++seg) {
    double t = timestamps[seg];
    double h = (timestamps[seg + 1] - timestamps[seg]) / substeps;
    for (int s = 0; s < substeps; ++s) {
      Tensor k1 = rhs_infer(model, de, n, x, t);
      Tensor xt = x;
      for (int r = 0; r < n; ++r) xt.v[r] = x.v[r] + 0.5 * h * k1.v[r];
      Tensor k2 = rhs_infer(model, de, n, xt, t + 0.5 * h);
      for (int r = 0; r < n; ++r) xt.v[r] = x.v[r] + 0.5 * h * k2.v[r];
      Tensor k3 = rhs_infer(model, de, n, xt, t + 0.5 * h);
      for (int r = 0; r < n; ++r) xt.v[r] = x.v[r] + h * k3.v[r];
      Tensor k4 = rhs_infer(model, de, n, xt, t + h);
      for (int r = 0; r < n; ++r)
        x.v[r] += h / 6.0 * (k1.v[r] + 2.0 * k2.v[r] + 2.0 * k3.v[r] + k4.v[r]);
      t += h;
      check_finite_state(x, t);
    }
    traj.data.insert(traj.data.end(), x.v.begin(), x.v.end());
  }
  return traj;
}

namespace {

struct TapeForward {
  Tape tape;
  PindModel* model = nullptr;
  MlpRef enc_ref, phi_n_ref, phi_e_ref, dec_ref;
  const DirectedEdges* de = nullptr;
  int n = 0;

  void bind(PindModel& m, const DirectedEdges& edges, int n_nodes) {
    tape.clear();
    model = &m;
    de = &edges;
    n = n_nodes;
    enc_ref = bind_mlp(tape, m.enc);
    phi_n_ref = bind_mlp(tape, m.phi_n);
    phi_e_ref = bind_mlp(tape, m.phi_e);
    dec_ref = bind_mlp(tape, m.dec);
  }

  int rhs(int x_id, double t) {
    int h = mlp_forward(tape, model->enc, enc_ref, x_id);
    Tensor tcol(n, 1);
    for (double& v : tcol.v) v = t;
    int t_node = tape.leaf(tcol, false);
    int latent =
        mlp_forward(tape, model->phi_n, phi_n_ref, tape.concat_cols(h, t_node));
    if (de->size() > 0) {
      int hd = tape.gather_rows(h, de->dst);
      int hs = tape.gather_rows(h, de->src);
      Tensor tedge(de->size(), 1);
      for (double& v : tedge.v) v = t;
      int t_edge = tape.leaf(tedge, false);
      int ein = tape.concat_cols(tape.concat_cols(hd, hs), t_edge);
      int msg = mlp_forward(tape, model->phi_e, phi_e_ref, ein);
      int agg = tape.scatter_add_rows(msg, de->dst, de->weight, n);
      latent = tape.add(latent, agg);
    }
    return mlp_forward(tape, model->dec, dec_ref, latent);
  }

  // Returns the tape ids of predicted frames at every timestamp.
  std::vector<int> unroll(const Tensor& x0,
                          const std::vector<double>& timestamps,
                          int substeps) {
    std::vector<int> frames;
    int x = tape.leaf(x0, false);
    frames.push_back(x);
    for (std::size_t seg = 0; seg + 1 < timestamps.size(); ++seg) {
      double t = timestamps[seg];
      double h = (timestamps[seg + 1] - timestamps[seg]) / substeps;
      for (int s = 0; s < substeps; ++s) {
        int k1 = rhs(x, t);
        int k2 = rhs(tape.add(x, tape.scale(k1, 0.5 * h)), t + 0.5 * h);
        int k3 = rhs(tape.add(x, tape.scale(k2, 0.5 * h)), t + 0.5 * h);
        int k4 = rhs(tape.add(x, tape.scale(k3, h)), t + h);
        int incr = tape.add(tape.add(k1, k4),
                            tape.scale(tape.add(k2, k3), 2.0));
        x = tape.add(x, tape.scale(incr, h / 6.0));
        t += h;
      }
      frames.push_back(x);
    }
    return frames;
  }
};

struct SplitIdx {
  std::vector<int> train, val, test;
};

SplitIdx split_timestamps(int k, double train_frac, double val_frac,
                          std::uint64_t seed) {
  std::vector<int> idx(k - 1);
  std::iota(idx.begin(), idx.end(), 1);
  std::mt19937_64 rng = make_rng(seed, 0x5b17ULL);
  std::shuffle(idx.begin(), idx.end(), rng);
  int n_train = static_cast<int>(std::lround(train_frac * k));
  int n_val = static_cast<int>(std::lround(val_frac * k));
  n_train = std::clamp(n_train, 1, k);
  SplitIdx s;
  s.train.push_back(0);  // the initial frame anchors the integration
  int pos = 0;
  while (static_cast<int>(s.train.size()) < n_train &&
         pos < static_cast<int>(idx.size()))
    s.train.push_back(idx[pos++]);
  while (static_cast<int>(s.val.size()) < n_val &&
         pos < static_cast<int>(idx.size()))
    s.val.push_back(idx[pos++]);
  while (pos < static_cast<int>(idx.size())) s.test.push_back(idx[pos++]);
  std::sort(s.train.begin(), s.train.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.test.begin(), s.test.end());
  return s;
}

double frames_mse(const Tape& tape, const std::vector<int>& frames,
                  const Trajectory& obs, const std::vector<int>& which) {
  if (which.empty()) return 0.0;
  double acc = 0.0;
  std::size_t count = 0;
  for (int k : which) {
    const Tensor& pred = tape.value(frames[k]);
    for (int v = 0; v < obs.n_nodes; ++v) {
      double d = pred.v[v] - obs.at(k, v);
      acc += d * d;
      ++count;
    }
  }
  return acc / static_cast<double>(count);
}

struct EpochResult {
  double train_mse;
  double val_mse;
};

// One full forward/backward/update pass; returns epoch losses.
EpochResult run_epoch(PindModel& model, TapeForward& fwd,
                      const DirectedEdges& de, const Trajectory& obs,
                      const SplitIdx& split, int substeps, AdamW& opt,
                      bool update) {
  fwd.bind(model, de, obs.n_nodes);
  Tensor x0(obs.n_nodes, 1);
  for (int v = 0; v < obs.n_nodes; ++v) x0.v[v] = obs.at(0, v);
  std::vector<int> frames = fwd.unroll(x0, obs.timestamps, substeps);

  // Mean of per-frame MSEs over the training split (frames share a size,
  // so this equals the MSE over all train (node, time) entries).
  int loss = -1;
  for (int k : split.train) {
    Tensor target(obs.n_nodes, 1);
    for (int v = 0; v < obs.n_nodes; ++v) target.v[v] = obs.at(k, v);
    int term = fwd.tape.mse(frames[k], fwd.tape.leaf(target, false));
    loss = loss < 0 ? term : fwd.tape.add(loss, term);
  }
  loss = fwd.tape.scale(loss, 1.0 / split.train.size());

  EpochResult res;
  res.train_mse = fwd.tape.value(loss).at(0, 0);
  res.val_mse = frames_mse(fwd.tape, frames, obs, split.val);
  if (!std::isfinite(res.train_mse))
    throw std::runtime_error("training diverged: non-finite loss");

  if (update) {
    fwd.tape.backward(loss);
    std::vector<Tensor*> params;
    model.collect_params(params);
    std::vector<const Tensor*> grads;
    auto take = [&](const MlpRef& ref) {
      for (int id : ref.w) grads.push_back(&fwd.tape.grad(id));
      for (int id : ref.b) grads.push_back(&fwd.tape.grad(id));
    };
    take(fwd.enc_ref);
    take(fwd.phi_n_ref);
    take(fwd.phi_e_ref);
    take(fwd.dec_ref);
    opt.step(params, grads);
  }
  return res;
}

struct RunOutcome {
  PindModel best_model;
  double best_val = 0.0;
  double final_train = 0.0;
  std::vector<std::array<double, 3>> curves;
};

RunOutcome training_run(const PindModel& init, const DirectedEdges& de,
                        const Trajectory& obs, const SplitIdx& split,
                        const TrainConfig& cfg, double lr, int epochs) {
  PindModel model = init;
  AdamW opt(lr, cfg.weight_decay);
  TapeForward fwd;
  RunOutcome out;
  out.best_model = model;
  out.best_val = std::numeric_limits<double>::infinity();
  for (int epoch = 1; epoch <= epochs; ++epoch) {
    EpochResult r =
        run_epoch(model, fwd, de, obs, split, cfg.substeps, opt, true);
    out.curves.push_back({static_cast<double>(epoch), r.train_mse, r.val_mse});
    if (r.val_mse < out.best_val) {
      out.best_val = r.val_mse;
      out.best_model = model;
    }
    out.final_train = r.train_mse;
  }
  return out;
}

} // namespace

std::string curves_to_csv(const std::vector<std::array<double, 3>>& curves) {
  std::string out = "epoch,train_mse,val_mse\n";
  char buf[40];
  for (const auto& row : curves) {
    out += std::to_string(static_cast<int>(row[0]));
    for (int c = 1; c < 3; ++c) {
      out += ',';
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), row[c],
                                     std::chars_format::general, 17);
      (void)ec;
      out.append(buf, ptr);
    }
    out += '\n';
  }
  return out;
}

TrainResult train(const PindModel& init, const Graph& graph,
                  const Trajectory& observations, const TrainConfig& cfg) {
  observations.validate();
  if (observations.n_times() < 2)
    throw std::invalid_argument("need at least 2 observed timestamps");
  if (observations.dim != 1)
    throw std::invalid_argument("surrogate training expects dim 1");

  DirectedEdges de(graph);
  SplitIdx split = split_timestamps(observations.n_times(), cfg.train_frac,
                                    cfg.val_frac, cfg.seed);

  // Short pilot run per learning-rate candidate, judged by best validation
  // MSE; the winner gets the full-length run.
  double chosen_lr = cfg.lr_grid.front();
  if (cfg.lr_grid.size() > 1 && cfg.pilot_epochs > 0) {
    double best = std::numeric_limits<double>::infinity();
    for (double lr : cfg.lr_grid) {
      RunOutcome pilot =
          training_run(init, de, observations, split, cfg, lr,
                       std::min(cfg.pilot_epochs, cfg.epochs));
      if (pilot.best_val < best) {
        best = pilot.best_val;
        chosen_lr = lr;
      }
    }
  }

  RunOutcome full = training_run(init, de, observations, split, cfg,
                                 chosen_lr, cfg.epochs);

  TrainResult res;
  res.model = std::move(full.best_model);
  res.chosen_lr = chosen_lr;
  res.best_val_mse = full.best_val;
  res.final_train_mse = full.final_train;
  res.curves = std::move(full.curves);
  res.train_idx = split.train;
  res.val_idx = split.val;
  res.test_idx = split.test;
  return res;
}

Trajectory interpolate(const PindModel& model, const Graph& graph,
                       const std::vector<double>& x0,
                       const std::vector<double>& obs_timestamps, int factor,
                       int substeps) {
  if (obs_timestamps.size() < 2)
    throw std::invalid_argument("need at least 2 observation timestamps");
  if (factor < 1) throw std::invalid_argument("factor must be >= 1");
  double t0 = obs_timestamps.front();
  double t1 = obs_timestamps.back();
  int dense = (static_cast<int>(obs_timestamps.size()) - 1) * factor + 1;
  std::vector<double> ts(dense);
  for (int k = 0; k < dense; ++k)
    ts[k] = t0 + (t1 - t0) * k / (dense - 1);
  Trajectory traj = pind_forward(model, graph, x0, ts, substeps);
  traj.meta = TrajMeta::kInterpolated;
  return traj;
}

std::vector<double> NeuralRefs::f(const std::vector<double>& x) const {
  Tensor in(static_cast<int>(x.size()), 1);
  in.v = x;
  Tensor h = model.enc.apply(in);
  Tensor hn(h.rows, h.cols + 1);
  for (int r = 0; r < h.rows; ++r) {
    for (int c = 0; c < h.cols; ++c) hn.at(r, c) = h.at(r, c);
    hn.at(r, h.cols) = 0.0;  // reference time
  }
  return model.dec.apply(model.phi_n.apply(hn)).v;
}

std::vector<double> NeuralRefs::g(const std::vector<double>& xi,
                                  const std::vector<double>& xj) const {
  if (xi.size() != xj.size())
    throw std::invalid_argument("g: input size mismatch");
  Tensor a(static_cast<int>(xi.size()), 1), b(static_cast<int>(xj.size()), 1);
  a.v = xi;
  b.v = xj;
  Tensor ha = model.enc.apply(a);
  Tensor hb = model.enc.apply(b);
  Tensor he(ha.rows, 2 * ha.cols + 1);
  for (int r = 0; r < ha.rows; ++r) {
    for (int c = 0; c < ha.cols; ++c) {
      he.at(r, c) = ha.at(r, c);
      he.at(r, ha.cols + c) = hb.at(r, c);
    }
    he.at(r, 2 * ha.cols) = 0.0;
  }
  return model.dec.apply(model.phi_e.apply(he)).v;
}

double NeuralRefs::f1(double x) const { return f({x})[0]; }
double NeuralRefs::g1(double xi, double xj) const {
  return g({xi}, {xj})[0];
}

NeuralRefs extract_refs(const PindModel& model) {
  return NeuralRefs{model};
}

} // namespace netsr

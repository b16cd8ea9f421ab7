#include "netsr/autodiff.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <random>
#include <stdexcept>

#include "netsr/rng.hpp"

namespace netsr {

using EMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                           Eigen::RowMajor>;
using EMap = Eigen::Map<EMat>;
using ECMap = Eigen::Map<const EMat>;

namespace {

ECMap emap(const Tensor& t) { return ECMap(t.v.data(), t.rows, t.cols); }
EMap emap(Tensor& t) { return EMap(t.v.data(), t.rows, t.cols); }

} // namespace

Act act_from_name(const std::string& name) {
  if (name == "identity" || name == "linear") return Act::kIdentity;
  if (name == "relu") return Act::kRelu;
  if (name == "tanh") return Act::kTanh;
  if (name == "sigmoid") return Act::kSigmoid;
  throw std::invalid_argument("unknown activation '" + name + "'");
}

const char* act_name(Act act) {
  switch (act) {
    case Act::kIdentity: return "identity";
    case Act::kRelu: return "relu";
    case Act::kTanh: return "tanh";
    case Act::kSigmoid: return "sigmoid";
  }
  return "?";
}

double apply_act(Act act, double x) {
  switch (act) {
    case Act::kIdentity: return x;
    case Act::kRelu: return x > 0.0 ? x : 0.0;
    case Act::kTanh: return std::tanh(x);
    case Act::kSigmoid: return 1.0 / (1.0 + std::exp(-x));
  }
  return x;
}

int Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

void Tape::ensure_grad(int id) {
  Node& n = nodes_[id];
  if (!n.grad.same_shape(n.value)) {
    n.grad = Tensor(n.value.rows, n.value.cols);
  }
}

int Tape::leaf(const Tensor& value, bool requires_grad) {
  Node n;
  n.op = OpKind::kLeaf;
  n.value = value;
  n.requires_grad = requires_grad;
  return push(std::move(n));
}

int Tape::matmul(int a, int b) {
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  if (ta.cols != tb.rows) throw std::invalid_argument("matmul shape mismatch");
  Node n;
  n.op = OpKind::kMatmul;
  n.a = a;
  n.b = b;
  n.value = Tensor(ta.rows, tb.cols);
  emap(n.value) = emap(ta) * emap(tb);
  n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
  return push(std::move(n));
}

int Tape::add(int a, int b) {
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  Node n;
  n.a = a;
  n.b = b;
  if (ta.same_shape(tb)) {
    n.op = OpKind::kAdd;
    n.value = ta;
    emap(n.value) += emap(tb);
  } else if (tb.rows == 1 && tb.cols == ta.cols) {
    n.op = OpKind::kAddBias;
    n.value = ta;
    emap(n.value).rowwise() += ECMap(tb.v.data(), 1, tb.cols).row(0);
  } else {
    throw std::invalid_argument("add shape mismatch");
  }
  n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
  return push(std::move(n));
}

int Tape::scale(int a, double s) {
  Node n;
  n.op = OpKind::kScale;
  n.a = a;
  n.s = s;
  n.value = nodes_[a].value;
  emap(n.value) *= s;
  n.requires_grad = nodes_[a].requires_grad;
  return push(std::move(n));
}

int Tape::activation(int a, Act act) {
  Node n;
  n.op = OpKind::kAct;
  n.a = a;
  n.act = act;
  n.value = nodes_[a].value;
  for (double& x : n.value.v) x = apply_act(act, x);
  n.requires_grad = nodes_[a].requires_grad;
  return push(std::move(n));
}

int Tape::concat_cols(int a, int b) {
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  if (ta.rows != tb.rows) throw std::invalid_argument("concat rows mismatch");
  Node n;
  n.op = OpKind::kConcat;
  n.a = a;
  n.b = b;
  n.value = Tensor(ta.rows, ta.cols + tb.cols);
  for (int r = 0; r < ta.rows; ++r) {
    for (int c = 0; c < ta.cols; ++c) n.value.at(r, c) = ta.at(r, c);
    for (int c = 0; c < tb.cols; ++c)
      n.value.at(r, ta.cols + c) = tb.at(r, c);
  }
  n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
  return push(std::move(n));
}

int Tape::gather_rows(int a, std::vector<int> idx) {
  const Tensor& ta = nodes_[a].value;
  Node n;
  n.op = OpKind::kGather;
  n.a = a;
  n.idx = std::move(idx);
  n.value = Tensor(static_cast<int>(n.idx.size()), ta.cols);
  for (std::size_t r = 0; r < n.idx.size(); ++r)
    for (int c = 0; c < ta.cols; ++c)
      n.value.at(static_cast<int>(r), c) = ta.at(n.idx[r], c);
  n.requires_grad = nodes_[a].requires_grad;
  return push(std::move(n));
}

int Tape::scatter_add_rows(int a, std::vector<int> idx,
                           std::vector<double> w, int n_out) {
  const Tensor& ta = nodes_[a].value;
  if (idx.size() != static_cast<std::size_t>(ta.rows) ||
      w.size() != idx.size())
    throw std::invalid_argument("scatter index/weight size mismatch");
  Node n;
  n.op = OpKind::kScatter;
  n.a = a;
  n.idx = std::move(idx);
  n.w = std::move(w);
  n.value = Tensor(n_out, ta.cols);
  for (int r = 0; r < ta.rows; ++r)
    for (int c = 0; c < ta.cols; ++c)
      n.value.at(n.idx[r], c) += n.w[r] * ta.at(r, c);
  n.requires_grad = nodes_[a].requires_grad;
  return push(std::move(n));
}

int Tape::mse(int a, int b) {
  const Tensor& ta = nodes_[a].value;
  const Tensor& tb = nodes_[b].value;
  if (!ta.same_shape(tb)) throw std::invalid_argument("mse shape mismatch");
  Node n;
  n.op = OpKind::kMse;
  n.a = a;
  n.b = b;
  n.value = Tensor(1, 1);
  double acc = 0.0;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    double d = ta.v[i] - tb.v[i];
    acc += d * d;
  }
  n.value.at(0, 0) = acc / static_cast<double>(ta.size());
  n.requires_grad = nodes_[a].requires_grad || nodes_[b].requires_grad;
  return push(std::move(n));
}

void Tape::backward(int id) {
  if (nodes_[id].value.size() != 1)
    throw std::invalid_argument("backward target must be scalar");
  for (Node& n : nodes_) {
    if (n.grad.same_shape(n.value))
      std::fill(n.grad.v.begin(), n.grad.v.end(), 0.0);
  }
  ensure_grad(id);
  nodes_[id].grad.at(0, 0) = 1.0;

  for (int i = id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.grad.same_shape(n.value)) continue;
    switch (n.op) {
      case OpKind::kLeaf:
        break;
      case OpKind::kMatmul: {
        if (nodes_[n.a].requires_grad) {
          ensure_grad(n.a);
          emap(nodes_[n.a].grad) +=
              emap(n.grad) * emap(nodes_[n.b].value).transpose();
        }
        if (nodes_[n.b].requires_grad) {
          ensure_grad(n.b);
          emap(nodes_[n.b].grad) +=
              emap(nodes_[n.a].value).transpose() * emap(n.grad);
        }
        break;
      }
      case OpKind::kAdd: {
        for (int side : {n.a, n.b}) {
          if (nodes_[side].requires_grad) {
            ensure_grad(side);
            emap(nodes_[side].grad) += emap(n.grad);
          }
        }
        break;
      }
      case OpKind::kAddBias: {
        if (nodes_[n.a].requires_grad) {
          ensure_grad(n.a);
          emap(nodes_[n.a].grad) += emap(n.grad);
        }
        if (nodes_[n.b].requires_grad) {
          ensure_grad(n.b);
          EMap(nodes_[n.b].grad.v.data(), 1, n.grad.cols).row(0) +=
              emap(n.grad).colwise().sum();
        }
        break;
      }
      case OpKind::kScale: {
        if (nodes_[n.a].requires_grad) {
          ensure_grad(n.a);
          emap(nodes_[n.a].grad) += n.s * emap(n.grad);
        }
        break;
      }
      case OpKind::kAct: {
        if (!nodes_[n.a].requires_grad) break;
        ensure_grad(n.a);
        Tensor& ga = nodes_[n.a].grad;
        for (std::size_t k = 0; k < n.value.size(); ++k) {
          double y = n.value.v[k];
          double d = 1.0;
          switch (n.act) {
            case Act::kIdentity: d = 1.0; break;
            case Act::kRelu: d = y > 0.0 ? 1.0 : 0.0; break;
            case Act::kTanh: d = 1.0 - y * y; break;
            case Act::kSigmoid: d = y * (1.0 - y); break;
          }
          ga.v[k] += d * n.grad.v[k];
        }
        break;
      }
      case OpKind::kConcat: {
        const Tensor& ta = nodes_[n.a].value;
        const Tensor& tb = nodes_[n.b].value;
        if (nodes_[n.a].requires_grad) {
          ensure_grad(n.a);
          for (int r = 0; r < ta.rows; ++r)
            for (int c = 0; c < ta.cols; ++c)
              nodes_[n.a].grad.at(r, c) += n.grad.at(r, c);
        }
        if (nodes_[n.b].requires_grad) {
          ensure_grad(n.b);
          for (int r = 0; r < tb.rows; ++r)
            for (int c = 0; c < tb.cols; ++c)
              nodes_[n.b].grad.at(r, c) += n.grad.at(r, ta.cols + c);
        }
        break;
      }
      case OpKind::kGather: {
        if (!nodes_[n.a].requires_grad) break;
        ensure_grad(n.a);
        Tensor& ga = nodes_[n.a].grad;
        for (std::size_t r = 0; r < n.idx.size(); ++r)
          for (int c = 0; c < n.value.cols; ++c)
            ga.at(n.idx[r], c) += n.grad.at(static_cast<int>(r), c);
        break;
      }
      case OpKind::kScatter: {
        if (!nodes_[n.a].requires_grad) break;
        ensure_grad(n.a);
        Tensor& ga = nodes_[n.a].grad;
        for (std::size_t r = 0; r < n.idx.size(); ++r)
          for (int c = 0; c < ga.cols; ++c)
            ga.at(static_cast<int>(r), c) += n.w[r] * n.grad.at(n.idx[r], c);
        break;
      }
      case OpKind::kMse: {
        double adj = n.grad.at(0, 0);
        const Tensor& ta = nodes_[n.a].value;
        const Tensor& tb = nodes_[n.b].value;
        double f = 2.0 * adj / static_cast<double>(ta.size());
        if (nodes_[n.a].requires_grad) {
          ensure_grad(n.a);
          Tensor& ga = nodes_[n.a].grad;
          for (std::size_t k = 0; k < ta.size(); ++k)
            ga.v[k] += f * (ta.v[k] - tb.v[k]);
        }
        if (nodes_[n.b].requires_grad) {
          ensure_grad(n.b);
          Tensor& gb = nodes_[n.b].grad;
          for (std::size_t k = 0; k < ta.size(); ++k)
            gb.v[k] -= f * (ta.v[k] - tb.v[k]);
        }
        break;
      }
    }
  }
}

void Tape::clear() { nodes_.clear(); }

Mlp Mlp::make(const std::vector<int>& sizes, Act hidden, std::uint64_t seed,
              Act output, bool use_bias) {
  if (sizes.size() < 2) throw std::invalid_argument("Mlp needs >= 2 sizes");
  Mlp m;
  m.sizes = sizes;
  m.hidden = hidden;
  m.output = output;
  m.use_bias = use_bias;
  std::mt19937_64 rng = make_rng(seed, 0x31a9ULL);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    double bound = std::sqrt(1.0 / sizes[l]);
    std::uniform_real_distribution<double> u(-bound, bound);
    Tensor w(sizes[l], sizes[l + 1]);
    for (double& x : w.v) x = u(rng);
    Tensor b(1, sizes[l + 1]);
    if (use_bias)
      for (double& x : b.v) x = u(rng);
    m.weights.push_back(std::move(w));
    m.biases.push_back(std::move(b));
  }
  return m;
}

Tensor Mlp::apply(const Tensor& input) const {
  if (input.cols != in_dim())
    throw std::invalid_argument("Mlp input width mismatch");
  Tensor h = input;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    Tensor z(h.rows, weights[l].cols);
    emap(z) = emap(h) * emap(weights[l]);
    if (use_bias)
      emap(z).rowwise() +=
          ECMap(biases[l].v.data(), 1, biases[l].cols).row(0);
    Act act = (l + 1 == weights.size()) ? output : hidden;
    if (act != Act::kIdentity)
      for (double& x : z.v) x = apply_act(act, x);
    h = std::move(z);
  }
  return h;
}

void Mlp::collect_params(std::vector<Tensor*>& out) {
  for (auto& w : weights) out.push_back(&w);
  if (use_bias)
    for (auto& b : biases) out.push_back(&b);
}

void Mlp::collect_params(std::vector<const Tensor*>& out) const {
  for (auto& w : weights) out.push_back(&w);
  if (use_bias)
    for (auto& b : biases) out.push_back(&b);
}

MlpRef bind_mlp(Tape& tape, const Mlp& mlp) {
  MlpRef ref;
  for (const auto& w : mlp.weights) ref.w.push_back(tape.leaf(w, true));
  if (mlp.use_bias)
    for (const auto& b : mlp.biases) ref.b.push_back(tape.leaf(b, true));
  return ref;
}

int mlp_forward(Tape& tape, const Mlp& mlp, const MlpRef& ref, int input) {
  int h = input;
  for (std::size_t l = 0; l < mlp.weights.size(); ++l) {
    h = tape.matmul(h, ref.w[l]);
    if (mlp.use_bias) h = tape.add(h, ref.b[l]);
    Act act = (l + 1 == mlp.weights.size()) ? mlp.output : mlp.hidden;
    if (act != Act::kIdentity) h = tape.activation(h, act);
  }
  return h;
}

void AdamW::step(const std::vector<Tensor*>& params,
                 const std::vector<const Tensor*>& grads) {
  if (params.size() != grads.size())
    throw std::invalid_argument("params/grads size mismatch");
  if (m_.empty()) {
    for (const Tensor* p : params) {
      m_.emplace_back(p->rows, p->cols);
      v_.emplace_back(p->rows, p->cols);
    }
  }
  ++t_;
  double c1 = 1.0 - std::pow(beta1_, t_);
  double c2 = 1.0 - std::pow(beta2_, t_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = *grads[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      p.v[k] -= lr_ * weight_decay_ * p.v[k];  // decoupled decay
      double m = m_[i].v[k] = beta1_ * m_[i].v[k] + (1.0 - beta1_) * g.v[k];
      double vv = v_[i].v[k] =
          beta2_ * v_[i].v[k] + (1.0 - beta2_) * g.v[k] * g.v[k];
      p.v[k] -= lr_ * (m / c1) / (std::sqrt(vv / c2) + eps_);
    }
  }
}

void save_checkpoint(const std::map<std::string, Tensor>& entries,
                     const std::string& path) {
  nlohmann::json j;
  for (const auto& [name, t] : entries) {
    j[name] = {{"rows", t.rows}, {"cols", t.cols}, {"data", t.v}};
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(1);
}

std::map<std::string, Tensor> load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  nlohmann::json j = nlohmann::json::parse(in);
  std::map<std::string, Tensor> out;
  for (auto& [name, entry] : j.items()) {
    Tensor t(entry.at("rows").get<int>(), entry.at("cols").get<int>());
    t.v = entry.at("data").get<std::vector<double>>();
    if (t.v.size() != static_cast<std::size_t>(t.rows) * t.cols)
      throw std::runtime_error("checkpoint entry '" + name +
                               "': data size mismatch");
    out.emplace(name, std::move(t));
  }
  return out;
}

} // namespace netsr

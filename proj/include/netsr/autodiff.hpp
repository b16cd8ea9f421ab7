#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace netsr {

// Dense row-major matrix; vectors are 1 x n or n x 1 as context requires.
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), v(static_cast<std::size_t>(r) * c) {}

  double& at(int r, int c) { return v[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const {
    return v[static_cast<std::size_t>(r) * cols + c];
  }
  std::size_t size() const { return v.size(); }
  bool same_shape(const Tensor& o) const {
    return rows == o.rows && cols == o.cols;
  }
};

enum class Act { kIdentity, kRelu, kTanh, kSigmoid };
Act act_from_name(const std::string& name);
const char* act_name(Act act);
double apply_act(Act act, double x);

// Append-only reverse-mode tape. Build a scalar with the op helpers, call
// backward on it, then read gradients of any leaf that requires grad.
// clear() keeps allocations for reuse across training epochs.
class Tape {
public:
  int leaf(const Tensor& value, bool requires_grad);
  int matmul(int a, int b);
  // Same-shape elementwise add, or b broadcast as a 1 x cols bias row.
  int add(int a, int b);
  int scale(int a, double s);
  int activation(int a, Act act);
  int concat_cols(int a, int b);
  // out[r] = a[idx[r]] (rows)
  int gather_rows(int a, std::vector<int> idx);
  // out has n_out rows; out[idx[r]] += w[r] * a[r]
  int scatter_add_rows(int a, std::vector<int> idx, std::vector<double> w,
                       int n_out);
  // Mean of squared elementwise differences; 1 x 1 result.
  int mse(int a, int b);

  const Tensor& value(int id) const { return nodes_[id].value; }
  const Tensor& grad(int id) const { return nodes_[id].grad; }

  void backward(int id);
  void clear();
  std::size_t size() const { return nodes_.size(); }

private:
  enum class OpKind {
    kLeaf,
    kMatmul,
    kAdd,
    kAddBias,
    kScale,
    kAct,
    kConcat,
    kGather,
    kScatter,
    kMse,
  };
  struct Node {
    OpKind op;
    int a = -1, b = -1;
    double s = 0.0;
    Act act = Act::kIdentity;
    std::vector<int> idx;
    std::vector<double> w;
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
  };
  int push(Node n);
  void ensure_grad(int id);
  std::vector<Node> nodes_;
};

// Fully connected network; weights[l] maps sizes[l] -> sizes[l+1] as a
// right-multiplied matrix (batch rows x features).
struct Mlp {
  std::vector<int> sizes;
  Act hidden = Act::kRelu;
  Act output = Act::kIdentity;
  bool use_bias = true;  // false: strictly linear layers (no bias term)
  std::vector<Tensor> weights;
  std::vector<Tensor> biases;

  // Uniform +-sqrt(1/fan_in) initialization.
  static Mlp make(const std::vector<int>& sizes, Act hidden,
                  std::uint64_t seed, Act output = Act::kIdentity,
                  bool use_bias = true);

  int in_dim() const { return sizes.front(); }
  int out_dim() const { return sizes.back(); }

  // Tape-free forward for inference.
  Tensor apply(const Tensor& input) const;

  void collect_params(std::vector<Tensor*>& out);
  void collect_params(std::vector<const Tensor*>& out) const;
};

// Tape leaf ids for an Mlp's parameters, aligned with weights/biases.
struct MlpRef {
  std::vector<int> w;
  std::vector<int> b;
};
MlpRef bind_mlp(Tape& tape, const Mlp& mlp);
int mlp_forward(Tape& tape, const Mlp& mlp, const MlpRef& ref, int input);

// Decoupled weight decay Adam; beta = (0.9, 0.999), eps = 1e-8.
class AdamW {
public:
  AdamW(double lr, double weight_decay)
      : lr_(lr), weight_decay_(weight_decay) {}

  void step(const std::vector<Tensor*>& params,
            const std::vector<const Tensor*>& grads);

  double lr() const { return lr_; }
  void set_lr(double lr) { lr_ = lr; }

private:
  double lr_;
  double weight_decay_;
  double beta1_ = 0.9, beta2_ = 0.999, eps_ = 1e-8;
  int t_ = 0;
  std::vector<Tensor> m_, v_;
};

// Checkpoint: JSON map name -> {shape, data}; round-trips bit-exactly.
void save_checkpoint(const std::map<std::string, Tensor>& entries,
                     const std::string& path);
std::map<std::string, Tensor> load_checkpoint(const std::string& path);

} // namespace netsr

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <vector>

#include "netsr/autodiff.hpp"
#include "netsr/rng.hpp"

using namespace netsr;

namespace {

Tensor random_tensor(int r, int c, std::mt19937_64& rng, double scale = 1.0) {
  Tensor t(r, c);
  std::uniform_real_distribution<double> u(-scale, scale);
  for (double& v : t.v) v = u(rng);
  return t;
}

// Central finite difference of a scalar function of one tensor entry.
double fd_grad(const std::function<double()>& f, double& slot,
               double eps = 1e-5) {
  double keep = slot;
  slot = keep + eps;
  double hi = f();
  slot = keep - eps;
  double lo = f();
  slot = keep;
  return (hi - lo) / (2.0 * eps);
}

double rel_err(double a, double b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

} // namespace

TEST_CASE("one-layer identity network is plain affine arithmetic") {
  Mlp m = Mlp::make({1, 1}, Act::kIdentity, 1);
  m.weights[0].at(0, 0) = 2.0;
  m.biases[0].at(0, 0) = 1.0;
  Tensor in(1, 1);
  in.at(0, 0) = 3.0;
  CHECK(m.apply(in).at(0, 0) == 7.0);
}

TEST_CASE("zero-weight network outputs its bias") {
  Mlp m = Mlp::make({3, 2}, Act::kIdentity, 2);
  for (double& v : m.weights[0].v) v = 0.0;
  m.biases[0].at(0, 0) = 0.25;
  m.biases[0].at(0, 1) = -1.5;
  std::mt19937_64 rng = make_rng(3);
  Tensor in = random_tensor(4, 3, rng);
  Tensor out = m.apply(in);
  for (int r = 0; r < 4; ++r) {
    CHECK(out.at(r, 0) == 0.25);
    CHECK(out.at(r, 1) == -1.5);
  }
}

TEST_CASE("batched forward equals stacked per-sample forwards") {
  std::mt19937_64 rng = make_rng(5);
  Mlp m = Mlp::make({3, 8, 2}, Act::kTanh, 7);
  Tensor batch = random_tensor(6, 3, rng);
  Tensor full = m.apply(batch);
  for (int r = 0; r < 6; ++r) {
    Tensor row(1, 3);
    for (int c = 0; c < 3; ++c) row.at(0, c) = batch.at(r, c);
    Tensor out = m.apply(row);
    for (int c = 0; c < 2; ++c) CHECK(out.at(0, c) == full.at(r, c));
  }
}

TEST_CASE("sigmoid derivative at zero is one quarter") {
  Tape tape;
  Tensor z(1, 1);
  int zi = tape.leaf(z, true);
  int s = tape.activation(zi, Act::kSigmoid);
  tape.backward(s);
  CHECK(tape.grad(zi).at(0, 0) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("two-layer network gradients match finite differences") {
  std::mt19937_64 rng = make_rng(11);
  // Smooth activations keep the finite-difference probe valid everywhere.
  Mlp m = Mlp::make({4, 6, 3}, Act::kTanh, 13, Act::kSigmoid);
  Tensor input = random_tensor(5, 4, rng);
  Tensor target = random_tensor(5, 3, rng);

  auto loss_value = [&]() {
    Tape t;
    MlpRef ref = bind_mlp(t, m);
    int out = mlp_forward(t, m, ref, t.leaf(input, false));
    return t.value(t.mse(out, t.leaf(target, false))).at(0, 0);
  };

  Tape tape;
  MlpRef ref = bind_mlp(tape, m);
  int out = mlp_forward(tape, m, ref, tape.leaf(input, false));
  int loss = tape.mse(out, tape.leaf(target, false));
  tape.backward(loss);

  double worst = 0.0;
  for (std::size_t layer = 0; layer < m.weights.size(); ++layer) {
    Tensor& w = m.weights[layer];
    const Tensor& g = tape.grad(ref.w[layer]);
    for (std::size_t i = 0; i < w.v.size(); ++i)
      worst = std::max(worst, rel_err(g.v[i], fd_grad(loss_value, w.v[i])));
    Tensor& b = m.biases[layer];
    const Tensor& gb = tape.grad(ref.b[layer]);
    for (std::size_t i = 0; i < b.v.size(); ++i)
      worst = std::max(worst, rel_err(gb.v[i], fd_grad(loss_value, b.v[i])));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("every tape primitive passes a finite-difference check") {
  std::mt19937_64 rng = make_rng(17);
  // One composite touching matmul, bias add, scale, concat, gather,
  // scatter, activations and mse.
  Tensor a = random_tensor(4, 3, rng);
  Tensor w = random_tensor(3, 3, rng);
  Tensor bias = random_tensor(1, 3, rng);
  Tensor target = random_tensor(5, 6, rng);
  std::vector<int> gather_idx = {2, 0, 1, 3, 2, 0};
  std::vector<int> scatter_idx = {0, 1, 1, 2, 4, 3};
  std::vector<double> scatter_w = {1.0, 0.5, -1.0, 2.0, 0.25, 1.5};

  auto build = [&](Tape& t, MlpRef* refs_out) {
    int ai = t.leaf(a, true);
    int wi = t.leaf(w, true);
    int bi = t.leaf(bias, true);
    if (refs_out) {
      refs_out->w = {ai, wi};
      refs_out->b = {bi};
    }
    int h = t.add(t.matmul(ai, wi), bi);      // bias broadcast
    int act = t.activation(h, Act::kTanh);
    int sc = t.scale(act, 0.75);
    int gathered = t.gather_rows(sc, gather_idx);
    int scattered = t.scatter_add_rows(gathered, scatter_idx, scatter_w, 5);
    int wide = t.concat_cols(scattered, t.activation(scattered, Act::kSigmoid));
    return t.mse(wide, t.leaf(target, false));
  };

  auto loss_value = [&]() {
    Tape t;
    return t.value(build(t, nullptr)).at(0, 0);
  };

  Tape tape;
  MlpRef refs;
  int loss = build(tape, &refs);
  tape.backward(loss);

  double worst = 0.0;
  Tensor* leaves[3] = {&a, &w, &bias};
  int ids[3] = {refs.w[0], refs.w[1], refs.b[0]};
  for (int leaf = 0; leaf < 3; ++leaf) {
    const Tensor& g = tape.grad(ids[leaf]);
    for (std::size_t i = 0; i < leaves[leaf]->v.size(); ++i)
      worst = std::max(worst,
                       rel_err(g.v[i], fd_grad(loss_value, leaves[leaf]->v[i])));
  }
  CHECK(worst < 1e-4);
}

TEST_CASE("rectifier gradient is the step function") {
  Tape tape;
  Tensor z(1, 2);
  z.at(0, 0) = 1.5;
  z.at(0, 1) = -2.0;
  int zi = tape.leaf(z, true);
  int out = tape.mse(tape.activation(zi, Act::kRelu), tape.leaf(Tensor(1, 2), false));
  tape.backward(out);
  // d/dz mean(relu(z)^2) = relu(z) * 1{z>0} per element, scaled by 2/n.
  CHECK(tape.grad(zi).at(0, 0) == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(tape.grad(zi).at(0, 1) == 0.0);
}

TEST_CASE("scatter-add backward routes adjoints along reversed edges") {
  Tape tape;
  std::mt19937_64 rng = make_rng(23);
  Tensor msgs = random_tensor(4, 2, rng);
  std::vector<int> idx = {1, 0, 1, 2};
  std::vector<double> w = {2.0, 1.0, -0.5, 3.0};
  int mi = tape.leaf(msgs, true);
  int out = tape.scatter_add_rows(mi, idx, w, 3);
  // Scalar loss: sum of squares via mse against zeros (times n elements).
  int loss = tape.mse(out, tape.leaf(Tensor(3, 2), false));
  tape.backward(loss);
  const Tensor& got = tape.grad(mi);
  const Tensor& o = tape.value(out);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 2; ++c) {
      double expect = w[r] * 2.0 / 6.0 * o.at(idx[r], c);
      CHECK(got.at(r, c) == doctest::Approx(expect).epsilon(1e-10));
    }
}

TEST_CASE("optimizer leaves parameters alone without gradient or decay") {
  std::mt19937_64 rng = make_rng(29);
  Tensor p = random_tensor(3, 3, rng);
  Tensor before = p;
  Tensor zero_grad(3, 3);
  AdamW opt(0.01, 0.0);
  opt.step({&p}, {&zero_grad});
  CHECK(p.v == before.v);
}

TEST_CASE("decoupled decay shrinks parameters geometrically") {
  Tensor p(1, 1);
  p.at(0, 0) = 1.0;
  Tensor zero_grad(1, 1);
  AdamW opt(0.01, 0.001);
  opt.step({&p}, {&zero_grad});
  CHECK(p.at(0, 0) == doctest::Approx(1.0 - 0.01 * 0.001).epsilon(1e-15));
  opt.step({&p}, {&zero_grad});
  double f = 1.0 - 0.01 * 0.001;
  CHECK(p.at(0, 0) == doctest::Approx(f * f).epsilon(1e-15));
}

TEST_CASE("optimizer drives a quadratic to its minimum") {
  Tensor w(1, 1);
  w.at(0, 0) = 1.0;
  AdamW opt(0.01, 0.0);
  Tensor grad(1, 1);
  for (int step = 0; step < 2000; ++step) {
    grad.at(0, 0) = 2.0 * w.at(0, 0);
    opt.step({&w}, {&grad});
  }
  CHECK(std::abs(w.at(0, 0)) < 1e-3);
}

TEST_CASE("initialization and forward are deterministic per seed") {
  Mlp a = Mlp::make({2, 5, 1}, Act::kRelu, 31);
  Mlp b = Mlp::make({2, 5, 1}, Act::kRelu, 31);
  for (std::size_t l = 0; l < a.weights.size(); ++l) {
    CHECK(a.weights[l].v == b.weights[l].v);
    CHECK(a.biases[l].v == b.biases[l].v);
  }
  Mlp c = Mlp::make({2, 5, 1}, Act::kRelu, 32);
  CHECK(a.weights[0].v != c.weights[0].v);
}

TEST_CASE("checkpoints round-trip bit-exactly") {
  std::mt19937_64 rng = make_rng(37);
  std::map<std::string, Tensor> entries;
  entries["layer0/w"] = random_tensor(4, 7, rng, 3.0);
  entries["layer0/b"] = random_tensor(1, 7, rng, 0.01);
  entries["odd"] = Tensor(1, 3);
  entries["odd"].v = {1.0 / 3.0, -0.0, 5e-324};
  const char* path = "test_autodiff_ckpt.json";
  save_checkpoint(entries, path);
  auto back = load_checkpoint(path);
  REQUIRE(back.size() == entries.size());
  for (const auto& [name, t] : entries) {
    REQUIRE(back.count(name) == 1);
    CHECK(back[name].rows == t.rows);
    CHECK(back[name].cols == t.cols);
    for (std::size_t i = 0; i < t.v.size(); ++i) {
      // Bitwise comparison: -0.0 and denormals must survive.
      CHECK(std::memcmp(&back[name].v[i], &t.v[i], sizeof(double)) == 0);
    }
  }
  std::remove(path);
}

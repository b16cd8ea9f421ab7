#include "netsr/gp.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <random>
#include <stdexcept>

#include "netsr/canonical.hpp"
#include "netsr/dynamics.hpp"
#include "netsr/rng.hpp"

namespace netsr {

namespace {

// Terminal kinds; constants are drawn fresh on creation.
enum TerminalKind { kTermConst, kTermXi, kTermXj, kTermT };

std::vector<Op> function_set(const GpConfig& cfg) {
  std::vector<Op> fns = {Op::kAdd, Op::kSub, Op::kMul, Op::kDiv,
                         Op::kSin, Op::kCos, Op::kExp};
  if (cfg.use_sigmoid) fns.push_back(Op::kSigmoid);
  return fns;
}

std::vector<int> terminal_set(Role role, const GpConfig& cfg) {
  std::vector<int> terms = {kTermConst, kTermXi};
  if (role == Role::kEdgeDynamics) terms.push_back(kTermXj);
  if (cfg.use_time) terms.push_back(kTermT);
  return terms;
}

ExprPtr make_terminal(const std::vector<int>& terms, const GpConfig& cfg,
                      std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, terms.size() - 1);
  switch (terms[pick(rng)]) {
    case kTermXi: return make_var(Op::kVarXi);
    case kTermXj: return make_var(Op::kVarXj);
    case kTermT: return make_var(Op::kVarT);
    default: {
      std::uniform_real_distribution<double> c(cfg.const_lo, cfg.const_hi);
      return make_const(c(rng));
    }
  }
}

// Koza-style tree builder: full puts functions at every non-max depth,
// grow picks uniformly among all primitives.
ExprPtr build_tree(int depth, bool full, const std::vector<Op>& fns,
                   const std::vector<int>& terms, const GpConfig& cfg,
                   std::mt19937_64& rng) {
  bool choose_function = depth > 0;
  if (choose_function && !full) {
    std::uniform_int_distribution<std::size_t> pick(
        0, fns.size() + terms.size() - 1);
    choose_function = pick(rng) < fns.size();
  }
  if (!choose_function) return make_terminal(terms, cfg, rng);

  std::uniform_int_distribution<std::size_t> pick(0, fns.size() - 1);
  Op op = fns[pick(rng)];
  ExprPtr left = build_tree(depth - 1, full, fns, terms, cfg, rng);
  if (is_unary(op)) return make_unary(op, left);
  ExprPtr right = build_tree(depth - 1, full, fns, terms, cfg, rng);
  return make_binary(op, left, right);
}

int tree_size(const ExprNode& n) {
  int s = 1;
  if (n.left) s += tree_size(*n.left);
  if (n.right) s += tree_size(*n.right);
  return s;
}

// Preorder indexing: 0 is the root, then the left subtree, then the right.
ExprPtr subtree_at(const ExprPtr& node, int& idx) {
  if (idx == 0) return node;
  --idx;
  if (node->left) {
    ExprPtr hit = subtree_at(node->left, idx);
    if (hit) return hit;
  }
  if (node->right) return subtree_at(node->right, idx);
  return nullptr;
}

ExprPtr replace_at(const ExprPtr& node, int& idx, const ExprPtr& sub) {
  if (idx == 0) {
    --idx;
    return sub;
  }
  --idx;
  ExprPtr left = node->left, right = node->right;
  if (left && idx >= 0) left = replace_at(node->left, idx, sub);
  if (right && idx >= 0) right = replace_at(node->right, idx, sub);
  if (left == node->left && right == node->right) return node;
  auto copy = std::make_shared<ExprNode>();
  copy->op = node->op;
  copy->value = node->value;
  copy->left = std::move(left);
  copy->right = std::move(right);
  return copy;
}

// 90% of picks land on interior nodes when the tree has any (Koza's bias).
int pick_point(const ExprPtr& root, std::mt19937_64& rng) {
  int total = tree_size(*root);
  if (total == 1) return 0;
  std::vector<int> internal, leaves;
  struct Walker {
    std::vector<int>& internal;
    std::vector<int>& leaves;
    int next = 0;
    void walk(const ExprNode& n) {
      int idx = next++;
      if (n.left) internal.push_back(idx);
      else leaves.push_back(idx);
      if (n.left) walk(*n.left);
      if (n.right) walk(*n.right);
    }
  } w{internal, leaves};
  w.walk(*root);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const std::vector<int>& pool =
      (!internal.empty() && u(rng) < 0.9) ? internal : leaves;
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  return pool[pick(rng)];
}

ExprPtr get_subtree(const ExprPtr& root, int idx) {
  int i = idx;
  ExprPtr hit = subtree_at(root, i);
  if (!hit) throw std::logic_error("subtree index out of range");
  return hit;
}

ExprPtr set_subtree(const ExprPtr& root, int idx, const ExprPtr& sub) {
  int i = idx;
  return replace_at(root, i, sub);
}

Expr crossover(const Expr& parent, const Expr& donor, std::mt19937_64& rng) {
  int at = pick_point(parent.root(), rng);
  ExprPtr graft = get_subtree(donor.root(), pick_point(donor.root(), rng));
  return Expr(set_subtree(parent.root(), at, graft));
}

Expr subtree_mutate(const Expr& parent, const std::vector<Op>& fns,
                    const std::vector<int>& terms, const GpConfig& cfg,
                    std::mt19937_64& rng) {
  int at = pick_point(parent.root(), rng);
  std::uniform_int_distribution<int> d(cfg.init_depth_lo, cfg.init_depth_hi);
  ExprPtr fresh = build_tree(d(rng), false, fns, terms, cfg, rng);
  return Expr(set_subtree(parent.root(), at, fresh));
}

Expr hoist_mutate(const Expr& parent, std::mt19937_64& rng) {
  int at = pick_point(parent.root(), rng);
  ExprPtr sub = get_subtree(parent.root(), at);
  ExprPtr inner = get_subtree(sub, pick_point(sub, rng));
  return Expr(set_subtree(parent.root(), at, inner));
}

Expr point_mutate(const Expr& parent, const std::vector<Op>& fns,
                  const std::vector<int>& terms, const GpConfig& cfg,
                  std::mt19937_64& rng) {
  int total = parent.size();
  std::uniform_int_distribution<int> pick(0, total - 1);
  int at = pick(rng);
  ExprPtr old = get_subtree(parent.root(), at);

  ExprPtr repl;
  if (old->op == Op::kConst) {
    // Constants need a hill-climbing channel, not just a fresh draw: a
    // correct skeleton with slightly-off constants must be able to out-score
    // an entrenched wrong-shape champion before the final refit ever runs.
    std::uniform_real_distribution<double> u(0.0, 1.0);
    if (u(rng) < 0.5) {
      std::normal_distribution<double> creep(0.0,
                                             0.25 * (0.1 + std::abs(old->value)));
      repl = make_const(old->value + creep(rng));
    } else {
      std::uniform_real_distribution<double> c(cfg.const_lo, cfg.const_hi);
      repl = make_const(c(rng));
    }
  } else if (is_leaf(old->op)) {
    repl = make_terminal(terms, cfg, rng);
  } else {
    std::vector<Op> pool;
    for (Op op : fns)
      if (op != old->op && is_binary(op) == is_binary(old->op))
        pool.push_back(op);
    if (pool.empty()) return parent;
    std::uniform_int_distribution<std::size_t> p(0, pool.size() - 1);
    Op op = pool[p(rng)];
    repl = is_binary(op) ? make_binary(op, old->left, old->right)
                         : make_unary(op, old->left);
  }
  return Expr(set_subtree(parent.root(), at, repl));
}

int tournament_pick(const std::vector<double>& adjusted, int size,
                    std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pick(
      0, static_cast<int>(adjusted.size()) - 1);
  int best = pick(rng);
  for (int i = 1; i < size; ++i) {
    int c = pick(rng);
    if (adjusted[c] > adjusted[best]) best = c;
  }
  return best;
}

std::string fmt_double(double v) {
  char buf[40];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

} // namespace

Population init_population(Role role, const GpConfig& cfg,
                           std::uint64_t seed) {
  if (cfg.population < 1) throw std::invalid_argument("empty population");
  if (cfg.init_depth_lo < 1 || cfg.init_depth_hi < cfg.init_depth_lo)
    throw std::invalid_argument("bad init depth range");
  auto fns = function_set(cfg);
  auto terms = terminal_set(role, cfg);
  auto rng = make_rng(seed, role == Role::kNodeDynamics ? 0x6e0d : 0xed9e);

  Population pop;
  pop.role = role;
  pop.members.reserve(cfg.population);
  std::uniform_int_distribution<int> depth(cfg.init_depth_lo,
                                           cfg.init_depth_hi);
  std::uniform_int_distribution<int> coin(0, 1);
  for (int m = 0; m < cfg.population; ++m) {
    bool full = coin(rng) == 1;
    pop.members.emplace_back(build_tree(depth(rng), full, fns, terms, cfg, rng));
  }
  return pop;
}

DistanceSamples draw_distance_samples(Role role, double lo, double hi, int n,
                                      std::uint64_t seed) {
  if (!(hi > lo)) hi = lo + 1.0;  // degenerate observed range
  auto rng = make_rng(seed, 0xd157);
  std::uniform_real_distribution<double> u(lo, hi);
  DistanceSamples s;
  s.xi.resize(n);
  for (double& v : s.xi) v = u(rng);
  if (role == Role::kEdgeDynamics) {
    s.xj.resize(n);
    for (double& v : s.xj) v = u(rng);
  }
  return s;
}

double population_distance(const Population& pop, const BatchRef& ref,
                           const DistanceSamples& samples) {
  const int n = static_cast<int>(samples.xi.size());
  if (n == 0) throw std::invalid_argument("no distance samples");
  std::vector<double> ref_vals = ref(samples.xi, samples.xj);
  if (static_cast<int>(ref_vals.size()) != n)
    throw std::invalid_argument("reference batch size mismatch");

  const double* xj =
      samples.xj.empty() ? nullptr : samples.xj.data();
  std::vector<double> out(n), scratch;
  double total = 0.0;
  for (const Expr& member : pop.members) {
    CompiledExpr prog(member);
    bool ok = prog.eval_lanes(samples.xi.data(), xj, 0.0, out.data(), n,
                              scratch);
    if (!ok) {
      total += kPairPenalty;
      continue;
    }
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += std::abs(out[i] - ref_vals[i]);
    total += acc / n;
  }
  return total / static_cast<double>(pop.members.size());
}

PairEvaluator::PairEvaluator(const Graph& graph, const Trajectory& interp,
                             int substeps, int stride)
    : graph_(graph), interp_(interp), substeps_(substeps), de_(graph) {
  if (interp.dim != 1)
    throw std::invalid_argument("pair fitness expects dim 1");
  if (interp.n_nodes != graph.n_nodes())
    throw std::invalid_argument("trajectory/graph node count mismatch");
  if (substeps < 1) throw std::invalid_argument("substeps must be >= 1");
  if (stride < 1) throw std::invalid_argument("stride must be >= 1");
  for (int k = 0; k < interp.n_times(); k += stride) grid_.push_back(k);
  if (grid_.back() != interp.n_times() - 1)
    grid_.push_back(interp.n_times() - 1);
  if (grid_.size() < 2)
    throw std::invalid_argument("fitness grid needs at least 2 timestamps");

  const int n = graph.n_nodes();
  state_.resize(n);
  k1_.resize(n);
  k2_.resize(n);
  k3_.resize(n);
  k4_.resize(n);
  tmp_.resize(n);
  xi_.resize(de_.size());
  xj_.resize(de_.size());
  edge_out_.resize(de_.size());
}

namespace {

// One coupled-rhs evaluation across node and edge lanes; false on any
// non-finite intermediate.
bool coupled_rhs(const CompiledExpr& fprog, const CompiledExpr& gprog,
                 const DirectedEdges& de, const std::vector<double>& x,
                 double t, std::vector<double>& dxdt, std::vector<double>& xi,
                 std::vector<double>& xj, std::vector<double>& edge_out,
                 std::vector<double>& scratch) {
  const int n = static_cast<int>(x.size());
  if (!fprog.eval_lanes(x.data(), nullptr, t, dxdt.data(), n, scratch))
    return false;
  const int m = de.size();
  for (int e = 0; e < m; ++e) {
    xi[e] = x[de.dst[e]];
    xj[e] = x[de.src[e]];
  }
  if (!gprog.eval_lanes(xi.data(), xj.data(), t, edge_out.data(), m, scratch))
    return false;
  for (int e = 0; e < m; ++e)
    dxdt[de.dst[e]] += de.weight[e] * edge_out[e];
  return true;
}

} // namespace

double PairEvaluator::evaluate(const Expr& f, const Expr& g) {
  CompiledExpr fprog(f), gprog(g);
  const int n = graph_.n_nodes();
  std::memcpy(state_.data(), interp_.frame(grid_[0]),
              sizeof(double) * static_cast<std::size_t>(n));

  double sse = 0.0;
  const std::size_t count =
      static_cast<std::size_t>(grid_.size()) * static_cast<std::size_t>(n);
  auto rhs = [&](const std::vector<double>& x, double t,
                 std::vector<double>& dxdt) {
    return coupled_rhs(fprog, gprog, de_, x, t, dxdt, xi_, xj_, edge_out_,
                       scratch_);
  };

  for (std::size_t s = 1; s < grid_.size(); ++s) {
    double t0 = interp_.timestamps[grid_[s - 1]];
    double t1 = interp_.timestamps[grid_[s]];
    double h = (t1 - t0) / substeps_;
    for (int sub = 0; sub < substeps_; ++sub) {
      double t = t0 + sub * h;
      if (!rhs(state_, t, k1_)) return kPairPenalty;
      for (int v = 0; v < n; ++v) tmp_[v] = state_[v] + 0.5 * h * k1_[v];
      if (!rhs(tmp_, t + 0.5 * h, k2_)) return kPairPenalty;
      for (int v = 0; v < n; ++v) tmp_[v] = state_[v] + 0.5 * h * k2_[v];
      if (!rhs(tmp_, t + 0.5 * h, k3_)) return kPairPenalty;
      for (int v = 0; v < n; ++v) tmp_[v] = state_[v] + h * k3_[v];
      if (!rhs(tmp_, t + h, k4_)) return kPairPenalty;
      for (int v = 0; v < n; ++v)
        state_[v] +=
            h / 6.0 * (k1_[v] + 2.0 * k2_[v] + 2.0 * k3_[v] + k4_[v]);
      for (int v = 0; v < n; ++v)
        if (!(std::abs(state_[v]) <= kDivergeBound)) return kPairPenalty;
    }
    const double* target = interp_.frame(grid_[s]);
    for (int v = 0; v < n; ++v) {
      double d = state_[v] - target[v];
      sse += d * d;
    }
  }
  double mse = sse / static_cast<double>(count);
  return std::isfinite(mse) ? std::min(mse, kPairPenalty) : kPairPenalty;
}

double PairEvaluator::lookup(const std::string& key, const Expr& f,
                             const Expr& g) {
  ++logical_;
  auto it = cache_.find(key);
  if (it != cache_.end()) return it->second;
  ++simulations_;
  double err = evaluate(f, g);
  cache_.emplace(key, err);
  return err;
}

double PairEvaluator::pair_error(const Expr& f, const Expr& g) {
  return lookup(canonical_key(f) + "|" + canonical_key(g), f, g);
}

std::vector<double> PairEvaluator::error_matrix(const std::vector<Expr>& fs,
                                                const std::vector<Expr>& gs) {
  std::vector<std::string> fkeys, gkeys;
  fkeys.reserve(fs.size());
  gkeys.reserve(gs.size());
  for (const Expr& f : fs) fkeys.push_back(canonical_key(f));
  for (const Expr& g : gs) gkeys.push_back(canonical_key(g));

  std::vector<double> errors(fs.size() * gs.size());
  for (std::size_t i = 0; i < fs.size(); ++i)
    for (std::size_t j = 0; j < gs.size(); ++j)
      errors[i * gs.size() + j] =
          lookup(fkeys[i] + "|" + gkeys[j], fs[i], gs[j]);
  return errors;
}

double pair_fitness(const Expr& f, const Expr& g, const Graph& graph,
                    const Trajectory& interp, int substeps, int stride) {
  PairEvaluator eval(graph, interp, substeps, stride);
  return -eval.pair_error(f, g);
}

double bigk_mean(std::vector<double> scores, int k) {
  if (scores.empty()) throw std::invalid_argument("no scores");
  k = std::min<int>(std::max(k, 1), static_cast<int>(scores.size()));
  std::partial_sort(scores.begin(), scores.begin() + k, scores.end(),
                    std::greater<double>());
  double acc = 0.0;
  for (int i = 0; i < k; ++i) acc += scores[i];
  return acc / k;
}

Population evolve_step(const Population& pop,
                       const std::vector<double>& fitness,
                       const GpConfig& cfg, std::uint64_t seed) {
  const int p = static_cast<int>(pop.members.size());
  if (static_cast<int>(fitness.size()) != p)
    throw std::invalid_argument("fitness size mismatch");
  auto fns = function_set(cfg);
  auto terms = terminal_set(pop.role, cfg);
  auto rng = make_rng(seed, 0xe701);

  std::vector<double> adjusted(p);
  int elite = 0;
  for (int i = 0; i < p; ++i) {
    adjusted[i] = fitness[i] - cfg.parsimony * pop.members[i].size();
    if (fitness[i] > fitness[elite]) elite = i;
  }

  Population next;
  next.role = pop.role;
  next.members.reserve(p);
  next.members.push_back(pop.members[elite]);

  std::uniform_real_distribution<double> u(0.0, 1.0);
  while (static_cast<int>(next.members.size()) < p) {
    const Expr& parent =
        pop.members[tournament_pick(adjusted, cfg.tournament, rng)];
    double r = u(rng);
    Expr child;
    if (r < cfg.p_crossover) {
      const Expr& donor =
          pop.members[tournament_pick(adjusted, cfg.tournament, rng)];
      child = crossover(parent, donor, rng);
    } else if (r < cfg.p_crossover + cfg.p_subtree) {
      child = subtree_mutate(parent, fns, terms, cfg, rng);
    } else if (r < cfg.p_crossover + cfg.p_subtree + cfg.p_hoist) {
      child = hoist_mutate(parent, rng);
    } else if (r < cfg.p_crossover + cfg.p_subtree + cfg.p_hoist +
                       cfg.p_point) {
      child = point_mutate(parent, fns, terms, cfg, rng);
    } else {
      child = parent;
    }
    if (child.size() > cfg.max_size) child = parent;
    next.members.push_back(std::move(child));
  }
  return next;
}

std::string history_to_csv(const std::vector<GenRecord>& history) {
  std::string out =
      "generation,evolved_population,d_F,d_G,best_error,best_F,best_G\n";
  for (const GenRecord& r : history) {
    out += std::to_string(r.generation);
    out += ',';
    out += r.evolved;
    out += ',';
    out += fmt_double(r.d_f);
    out += ',';
    out += fmt_double(r.d_g);
    out += ',';
    out += fmt_double(r.best_error);
    out += ',';
    out += r.best_f;
    out += ',';
    out += r.best_g;
    out += '\n';
  }
  return out;
}

namespace {

// Fitness of every member on one side: mean of the big_k best pair scores
// against all partners, read off the shared error matrix.
std::vector<double> side_fitness(const std::vector<double>& errors,
                                 std::size_t rows, std::size_t cols,
                                 bool row_side, int big_k) {
  std::vector<double> fit(row_side ? rows : cols);
  std::vector<double> scores(row_side ? cols : rows);
  for (std::size_t a = 0; a < fit.size(); ++a) {
    for (std::size_t b = 0; b < scores.size(); ++b)
      scores[b] = -(row_side ? errors[a * cols + b] : errors[b * cols + a]);
    fit[a] = bigk_mean(scores, big_k);
  }
  return fit;
}

struct MatrixBest {
  std::size_t i = 0, j = 0;
  double error = std::numeric_limits<double>::infinity();
};

MatrixBest matrix_best(const std::vector<double>& errors, std::size_t rows,
                       std::size_t cols) {
  MatrixBest best;
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j)
      if (errors[i * cols + j] < best.error)
        best = {i, j, errors[i * cols + j]};
  return best;
}

} // namespace

SearchResult coordinated_search(const BatchRef& f_ref, const BatchRef& g_ref,
                                const Trajectory& interp, const Graph& graph,
                                const GpConfig& cfg, bool joint_mode) {
  auto t_start = std::chrono::steady_clock::now();
  Population fpop =
      init_population(Role::kNodeDynamics, cfg, mix_seed(cfg.seed, 0xf));
  Population gpop =
      init_population(Role::kEdgeDynamics, cfg, mix_seed(cfg.seed, 0x9));
  for (std::size_t i = 0;
       i < cfg.inject_f.size() && i < fpop.members.size(); ++i)
    fpop.members[i] = cfg.inject_f[i];
  for (std::size_t i = 0;
       i < cfg.inject_g.size() && i < gpop.members.size(); ++i)
    gpop.members[i] = cfg.inject_g[i];

  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : interp.data) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }

  PairEvaluator eval(graph, interp, cfg.fitness_substeps, cfg.fitness_stride);
  SearchResult res;
  res.best_f = fpop.members[0];
  res.best_g = gpop.members[0];

  const std::size_t p = fpop.members.size();
  std::vector<double> errors;
  bool matrix_current = false;  // errors matches the live populations

  for (int gen = 1; gen <= cfg.max_generations; ++gen) {
    res.generations = gen;
    double d_f = population_distance(
        fpop, f_ref,
        draw_distance_samples(Role::kNodeDynamics, lo, hi,
                              cfg.distance_samples,
                              mix_seed(cfg.seed, 0xdf00 + gen)));
    double d_g = population_distance(
        gpop, g_ref,
        draw_distance_samples(Role::kEdgeDynamics, lo, hi,
                              cfg.distance_samples,
                              mix_seed(cfg.seed, 0xd900 + gen)));
    bool evolve_f = d_f > d_g;

    errors = eval.error_matrix(fpop.members, gpop.members);
    matrix_current = true;
    MatrixBest best = matrix_best(errors, p, p);
    if (best.error < res.best_error) {
      res.best_error = best.error;
      res.best_f = fpop.members[best.i];
      res.best_g = gpop.members[best.j];
    }

    std::vector<double> fit_f, fit_g;
    if (joint_mode) {
      fit_f = side_fitness(errors, p, p, true, cfg.big_k);
      // Second pass over the same pairs; counted as requests, served from
      // the cache.
      std::vector<double> again = eval.error_matrix(fpop.members,
                                                    gpop.members);
      fit_g = side_fitness(again, p, p, false, cfg.big_k);
    } else if (evolve_f) {
      fit_f = side_fitness(errors, p, p, true, cfg.big_k);
    } else {
      fit_g = side_fitness(errors, p, p, false, cfg.big_k);
    }

    GenRecord rec;
    rec.generation = gen;
    rec.evolved = joint_mode ? "FG" : (evolve_f ? "F" : "G");
    rec.d_f = d_f;
    rec.d_g = d_g;
    rec.best_error = best.error;
    rec.best_f = fpop.members[best.i].str();
    rec.best_g = gpop.members[best.j].str();
    res.history.push_back(std::move(rec));

    if (best.error <= cfg.stop_eps) {
      res.converged = true;
      break;
    }

    if (joint_mode || evolve_f) {
      fpop = evolve_step(fpop, fit_f, cfg, mix_seed(cfg.seed, 0xef00 + gen));
      matrix_current = false;
    }
    if (joint_mode || !evolve_f) {
      gpop = evolve_step(gpop, fit_g, cfg, mix_seed(cfg.seed, 0xe900 + gen));
      matrix_current = false;
    }
  }

  // The returned pair is the argmin over the final populations; when the
  // last evolution step left them unevaluated, evaluate now.
  if (!matrix_current)
    errors = eval.error_matrix(fpop.members, gpop.members);
  MatrixBest final_best = matrix_best(errors, p, p);
  if (final_best.error <= res.best_error) {
    res.best_error = final_best.error;
    res.best_f = fpop.members[final_best.i];
    res.best_g = gpop.members[final_best.j];
  }

  res.logical_pairs = eval.logical_requests();
  res.simulated_pairs = eval.simulations();
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                    t_start)
          .count();
  return res;
}

} // namespace netsr

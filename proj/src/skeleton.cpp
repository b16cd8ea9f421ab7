#include "netsr/skeleton.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <set>

#include "netsr/canonical.hpp"
#include "netsr/rng.hpp"

namespace netsr {

namespace {

ExprPtr replace_with_slots(const ExprNode& n, int& next) {
  if (n.op == Op::kConst) return make_placeholder(next++);
  auto copy = std::make_shared<ExprNode>();
  copy->op = n.op;
  copy->value = n.value;
  if (n.left) copy->left = replace_with_slots(*n.left, next);
  if (n.right) copy->right = replace_with_slots(*n.right, next);
  return copy;
}

ExprPtr fill_slots(const ExprNode& n, const std::vector<double>& values) {
  if (n.op == Op::kPlaceholder)
    return make_const(values.at(static_cast<std::size_t>(n.value)));
  auto copy = std::make_shared<ExprNode>();
  copy->op = n.op;
  copy->value = n.value;
  if (n.left) copy->left = fill_slots(*n.left, values);
  if (n.right) copy->right = fill_slots(*n.right, values);
  return copy;
}

} // namespace

Skeleton Skeleton::from(const Expr& e) {
  Skeleton s;
  int next = 0;
  s.tree_ = Expr(replace_with_slots(*canonicalize(e).root(), next));
  s.slots_ = next;
  return s;
}

Expr Skeleton::substitute(const std::vector<double>& values) const {
  if (static_cast<int>(values.size()) != slots_)
    throw std::invalid_argument("slot count mismatch");
  return Expr(fill_slots(*tree_.root(), values));
}

bool Skeleton::same_shape(const Skeleton& other) const {
  return cmp_shape(*tree_.root(), *other.tree_.root()) == 0;
}

namespace {

struct SamplePlan {
  std::vector<double> xi;
  std::vector<double> xj;
  std::vector<double> target;
  double ref_rms = 0.0;
};

// Draws points where the reference evaluates cleanly; fails (nullopt-like
// empty plan) if the reference is unevaluable almost everywhere.
bool draw_samples(const Expr& reference, const EquivOptions& opt,
                  std::uint64_t stream, SamplePlan& plan) {
  std::mt19937_64 rng = make_rng(opt.seed, 0x5e11 + stream);
  std::uniform_real_distribution<double> di(opt.lo_i, opt.hi_i);
  std::uniform_real_distribution<double> dj(opt.lo_j, opt.hi_j);
  plan.xi.clear();
  plan.xj.clear();
  plan.target.clear();
  int tries = 0;
  const int max_tries = opt.n_points * 16;
  while (static_cast<int>(plan.xi.size()) < opt.n_points &&
         tries++ < max_tries) {
    double a = di(rng);
    double b = opt.edge ? dj(rng) : 0.0;
    auto v = opt.edge ? reference.try_eval(a, b, 0.0) : reference.try_eval(a);
    if (!v) continue;
    plan.xi.push_back(a);
    plan.xj.push_back(b);
    plan.target.push_back(*v);
  }
  if (static_cast<int>(plan.xi.size()) < opt.n_points) return false;
  double s = 0.0;
  for (double v : plan.target) s += v * v;
  plan.ref_rms = std::sqrt(s / plan.target.size());
  return true;
}

// Residual RMS of candidate(theta) against the plan's targets; unevaluable
// points contribute a large finite penalty so the optimizer steers away.
double fit_rms(const Skeleton& skel, const std::vector<double>& theta,
               const SamplePlan& plan, bool edge, Eigen::VectorXd* out_r) {
  Expr cand = skel.substitute(theta);
  const int m = static_cast<int>(plan.xi.size());
  double acc = 0.0;
  for (int p = 0; p < m; ++p) {
    auto v = edge ? cand.try_eval(plan.xi[p], plan.xj[p], 0.0)
                  : cand.try_eval(plan.xi[p]);
    double r = v ? (*v - plan.target[p]) : 1e6;
    if (out_r) (*out_r)(p) = r;
    acc += r * r;
  }
  return std::sqrt(acc / m);
}

bool lm_fit(const Skeleton& skel, std::vector<double> theta,
            const SamplePlan& plan, bool edge, double tol) {
  const int k = skel.slot_count();
  const int m = static_cast<int>(plan.xi.size());
  Eigen::VectorXd r(m), r_try(m);
  double rms = fit_rms(skel, theta, plan, edge, &r);
  if (rms < tol) return true;
  double lambda = 1e-3;
  Eigen::MatrixXd jac(m, k);
  for (int iter = 0; iter < 60; ++iter) {
    for (int c = 0; c < k; ++c) {
      double h = 1e-6 * (1.0 + std::abs(theta[c]));
      std::vector<double> th = theta;
      th[c] += h;
      Eigen::VectorXd rc(m);
      fit_rms(skel, th, plan, edge, &rc);
      jac.col(c) = (rc - r) / h;
    }
    Eigen::MatrixXd jtj = jac.transpose() * jac;
    Eigen::VectorXd jtr = jac.transpose() * r;
    bool accepted = false;
    for (int attempt = 0; attempt < 8; ++attempt) {
      Eigen::MatrixXd damped = jtj;
      for (int c = 0; c < k; ++c)
        damped(c, c) += lambda * std::max(jtj(c, c), 1e-12);
      Eigen::VectorXd delta = damped.ldlt().solve(-jtr);
      std::vector<double> th = theta;
      bool ok = true;
      for (int c = 0; c < k; ++c) {
        th[c] += delta(c);
        ok = ok && std::isfinite(th[c]);
      }
      double rms_try = ok ? fit_rms(skel, th, plan, edge, &r_try)
                          : std::numeric_limits<double>::infinity();
      if (rms_try < rms) {
        theta = std::move(th);
        r = r_try;
        double gain = rms - rms_try;
        rms = rms_try;
        lambda = std::max(lambda * 0.25, 1e-12);
        accepted = true;
        if (rms < tol) return true;
        if (gain < 1e-15) return rms < tol;
        break;
      }
      lambda *= 10.0;
    }
    if (!accepted) break;
  }
  return rms < tol;
}

// --- structural guard for the numeric fallback ------------------------
// A formula is reduced to the set of shapes of its additive terms after
// full distribution of products over sums. Constant multipliers are
// wildcards (dropped); additive structure is not: a candidate whose fit
// could only match the reference by zeroing out an entire term (or that
// lacks one of the reference's terms) is a different skeleton. Without
// this guard, any fit whose basis merely spans the reference (typical for
// sparse-regression output on noisy data) would count as recovered.

constexpr std::size_t kMaxTerms = 512;

// One term is a sorted factor list; a pure-constant term has no factors.
using Terms = std::vector<std::vector<std::string>>;

bool expand_terms(const ExprNode& n, Terms& out);

// Deduplicated term shapes of a subexpression. Duplicated shapes merge:
// c1*T + c2*T is the same skeleton class as c*T.
bool term_shapes(const ExprNode& n, std::set<std::string>& shapes) {
  Terms terms;
  if (!expand_terms(n, terms)) return false;
  shapes.clear();
  for (auto& t : terms) {
    std::sort(t.begin(), t.end());
    std::string s;
    for (const auto& f : t) {
      if (!s.empty()) s += '*';
      s += f;
    }
    shapes.insert(s.empty() ? "1" : s);
  }
  return true;
}

// Canonical string form (used inside nonlinear factors).
bool shape_string(const ExprNode& n, std::string& out) {
  std::set<std::string> shapes;
  if (!term_shapes(n, shapes)) return false;
  out.clear();
  for (const auto& s : shapes) {
    if (!out.empty()) out += '+';
    out += s;
  }
  return true;
}

bool term_has_variables(const std::vector<std::string>& t) {
  return !t.empty();
}

bool expand_terms(const ExprNode& n, Terms& out) {
  switch (n.op) {
    case Op::kConst:
    case Op::kPlaceholder:
      out.push_back({});
      return true;
    case Op::kVarXi:
      out.push_back({"x_i"});
      return true;
    case Op::kVarXj:
      out.push_back({"x_j"});
      return true;
    case Op::kVarT:
      out.push_back({"t"});
      return true;
    case Op::kNeg:
      return expand_terms(*n.left, out);
    case Op::kAdd:
    case Op::kSub: {
      if (!expand_terms(*n.left, out) || !expand_terms(*n.right, out))
        return false;
      return out.size() <= kMaxTerms;
    }
    case Op::kMul: {
      Terms a, b;
      if (!expand_terms(*n.left, a) || !expand_terms(*n.right, b))
        return false;
      if (a.size() * b.size() > kMaxTerms) return false;
      for (const auto& ta : a)
        for (const auto& tb : b) {
          std::vector<std::string> t = ta;
          t.insert(t.end(), tb.begin(), tb.end());
          out.push_back(std::move(t));
        }
      return true;
    }
    case Op::kDiv: {
      Terms a, b;
      if (!expand_terms(*n.left, a) || !expand_terms(*n.right, b))
        return false;
      bool const_denom = true;
      for (const auto& t : b) const_denom = const_denom && !term_has_variables(t);
      if (const_denom) {
        // Dividing by a constant is just another wildcard multiplier.
        out.insert(out.end(), a.begin(), a.end());
        return true;
      }
      std::string denom;
      if (!shape_string(*n.right, denom)) return false;
      for (auto t : a) {
        t.push_back("inv(" + denom + ")");
        out.push_back(std::move(t));
      }
      return true;
    }
    case Op::kSin:
    case Op::kCos:
    case Op::kExp:
    case Op::kSigmoid: {
      std::string arg;
      if (!shape_string(*n.left, arg)) return false;
      out.push_back({std::string(op_name(n.op)) + "(" + arg + ")"});
      return true;
    }
  }
  return false;
}

bool term_shape_set(const Expr& e, std::set<std::string>& out) {
  return term_shapes(*canonicalize(e).root(), out);
}

} // namespace

bool skeleton_equiv(const Expr& candidate, const Expr& reference,
                    const EquivOptions& opt) {
  Skeleton skel_c = Skeleton::from(candidate);
  Skeleton skel_r = Skeleton::from(reference);
  if (skel_c.same_shape(skel_r)) return true;

  std::set<std::string> sig_c, sig_r;
  if (!term_shape_set(candidate, sig_c) || !term_shape_set(reference, sig_r))
    return false;
  if (sig_c != sig_r) return false;

  const int k = skel_c.slot_count();
  std::vector<double> init = canonicalize(candidate).constants();

  for (int rs = 0; rs < opt.n_resample; ++rs) {
    SamplePlan plan;
    if (!draw_samples(reference, opt, static_cast<std::uint64_t>(rs), plan))
      return false;
    double tol = opt.rel_tol * std::max(plan.ref_rms, 1e-12);

    if (k == 0) {
      if (fit_rms(skel_c, {}, plan, opt.edge, nullptr) >= tol) return false;
      continue;
    }

    std::vector<std::vector<double>> starts;
    starts.push_back(init);
    std::mt19937_64 rng = make_rng(opt.seed, 0x57a7 + rs);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    for (int s = 0; s < 6; ++s) {
      std::vector<double> th(k);
      for (double& v : th) v = u(rng);
      starts.push_back(std::move(th));
    }
    bool ok = false;
    for (const auto& th : starts) {
      if (lm_fit(skel_c, th, plan, opt.edge, tol)) {
        ok = true;
        break;
      }
    }
    if (!ok) return false;
  }
  return true;
}

Expr refine_constants(const Expr& e,
                      const std::function<double(const Expr&)>& objective,
                      int budget) {
  std::vector<double> consts = e.constants();
  if (consts.empty() || budget <= 0) return e;

  auto score = [&](const std::vector<double>& c) {
    double v = objective(e.with_constants(c));
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  int evals = 0;
  double best = score(consts);
  ++evals;
  std::vector<double> step(consts.size());
  for (std::size_t i = 0; i < consts.size(); ++i)
    step[i] = 0.25 * (1.0 + std::abs(consts[i]));

  while (evals < budget) {
    bool improved = false;
    for (std::size_t i = 0; i < consts.size() && evals < budget; ++i) {
      for (double sign : {1.0, -1.0}) {
        if (evals >= budget) break;
        std::vector<double> trial = consts;
        trial[i] += sign * step[i];
        double v = score(trial);
        ++evals;
        if (v < best) {
          best = v;
          consts = std::move(trial);
          improved = true;
          break;  // keep moving this coordinate next sweep
        }
      }
    }
    if (!improved) {
      double widest = 0.0;
      for (double& s : step) {
        s *= 0.5;
        widest = std::max(widest, s);
      }
      if (widest < 1e-8) break;
    }
  }
  return e.with_constants(consts);
}

} // namespace netsr

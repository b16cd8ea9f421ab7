#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "netsr/expr.hpp"

namespace netsr {

// Canonicalized formula with every constant replaced by an indexed slot
// (printed c1, c2, ... in traversal order).
class Skeleton {
public:
  Skeleton() = default;

  static Skeleton from(const Expr& e);

  const Expr& tree() const { return tree_; }
  int slot_count() const { return slots_; }
  std::string str() const { return tree_.str(); }

  // Rebuilds a concrete formula from slot values (traversal order).
  Expr substitute(const std::vector<double>& values) const;

  // Structural match; slot indices and the constants they replaced are
  // irrelevant.
  bool same_shape(const Skeleton& other) const;

private:
  Expr tree_{};
  int slots_ = 0;
};

struct EquivOptions {
  double lo_i = 0.0;
  double hi_i = 1.0;
  double lo_j = 0.0;
  double hi_j = 1.0;
  bool edge = false;  // sample x_j too and evaluate as a two-variable formula
  std::uint64_t seed = 0;
  int n_points = 256;
  int n_resample = 3;
  double rel_tol = 1e-6;
};

// Two-stage test that `candidate` has the same functional form as
// `reference` up to constant values. Stage 1 matches skeletons exactly.
// Stage 2 falls back to fitting the candidate's slots to the reference by
// least squares over random sample points; the forms match when the fit
// residual is negligible next to the reference's own scale on every one of
// `n_resample` independent point sets.
bool skeleton_equiv(const Expr& candidate, const Expr& reference,
                    const EquivOptions& opt);

// Constant polish: greedy coordinate pattern search over the constants of
// `e`, minimizing `objective` (lower is better) within `budget` objective
// evaluations. The result never scores worse than the input; expressions
// without constants come back unchanged.
Expr refine_constants(const Expr& e,
                      const std::function<double(const Expr&)>& objective,
                      int budget = 200);

} // namespace netsr

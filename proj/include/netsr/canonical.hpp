#pragma once

#include "netsr/expr.hpp"

namespace netsr {

// Normal form used for caching and skeleton comparison:
//   - constants folded with the protected operator semantics
//   - x - y and unary minus rewritten into + and * with -1 coefficients
//   - associative +/* chains flattened, commutative operands sorted
//   - identity elements dropped (x+0, x*1, x*0)
//   - division kept as written apart from constant/constant folding
// Operand order depends only on tree shape, never on constant values, so
// formulas differing only in constants canonicalize to the same shape.
Expr canonicalize(const Expr& e);

// Three-way structural order that ignores constant values and placeholder
// indices (a constant and a placeholder count as the same shape).
int cmp_shape(const ExprNode& a, const ExprNode& b);

// Total order: shape first, then payloads in traversal order.
int cmp_expr(const ExprNode& a, const ExprNode& b);

bool same_shape(const Expr& a, const Expr& b);

// Stable key for cache maps: canonical print string.
std::string canonical_key(const Expr& e);

} // namespace netsr

#include "netsr/canonical.hpp"

#include <algorithm>
#include <cmath>

namespace netsr {

namespace {

int op_rank(Op op) {
  switch (op) {
    case Op::kConst:
    case Op::kPlaceholder: return 0;
    case Op::kVarXi: return 1;
    case Op::kVarXj: return 2;
    case Op::kVarT: return 3;
    case Op::kMul: return 4;
    case Op::kDiv: return 5;
    case Op::kAdd: return 6;
    case Op::kSub: return 7;
    case Op::kNeg: return 8;
    case Op::kSin: return 9;
    case Op::kCos: return 10;
    case Op::kExp: return 11;
    case Op::kSigmoid: return 12;
  }
  return 13;
}

int cmp_payload(const ExprNode& a, const ExprNode& b) {
  if (a.op != b.op) return op_rank(a.op) < op_rank(b.op) ? -1 : 1;
  if (a.op == Op::kConst || a.op == Op::kPlaceholder) {
    if (a.value < b.value) return -1;
    if (a.value > b.value) return 1;
  }
  if (a.left) {
    if (int c = cmp_payload(*a.left, *b.left)) return c;
  }
  if (a.right) {
    if (int c = cmp_payload(*a.right, *b.right)) return c;
  }
  return 0;
}

// Large folded constants are clamped to keep every canonical tree printable
// and re-parseable.
double sanitize(double v) {
  if (std::isnan(v)) return 0.0;
  if (std::isinf(v)) return std::copysign(1.7976931348623157e308, v);
  return v;
}

ExprPtr canon(const ExprPtr& n);

void flatten(Op op, const ExprPtr& n, std::vector<ExprPtr>& out) {
  if (n->op == op) {
    flatten(op, n->left, out);
    flatten(op, n->right, out);
  } else {
    out.push_back(n);
  }
}

ExprPtr chain(Op op, const std::vector<ExprPtr>& parts) {
  ExprPtr acc = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i)
    acc = make_binary(op, acc, parts[i]);
  return acc;
}

bool operand_less(const ExprPtr& a, const ExprPtr& b) {
  if (int c = cmp_shape(*a, *b)) return c < 0;
  return cmp_payload(*a, *b) < 0;
}

ExprPtr assemble_add(std::vector<ExprPtr> terms) {
  double c = 0.0;
  std::vector<ExprPtr> rest;
  rest.reserve(terms.size());
  for (auto& t : terms) {
    if (t->op == Op::kConst) c += t->value;
    else rest.push_back(std::move(t));
  }
  c = sanitize(c);
  std::sort(rest.begin(), rest.end(), operand_less);
  if (c != 0.0) rest.insert(rest.begin(), make_const(c));
  if (rest.empty()) return make_const(0.0);
  if (rest.size() == 1) return rest.front();
  return chain(Op::kAdd, rest);
}

ExprPtr assemble_mul(std::vector<ExprPtr> factors) {
  double c = 1.0;
  std::vector<ExprPtr> rest;
  rest.reserve(factors.size());
  for (auto& f : factors) {
    if (f->op == Op::kConst) c *= f->value;
    else rest.push_back(std::move(f));
  }
  c = sanitize(c);
  if (c == 0.0) return make_const(0.0);
  std::sort(rest.begin(), rest.end(), operand_less);
  if (c != 1.0) rest.insert(rest.begin(), make_const(c));
  if (rest.empty()) return make_const(c);
  if (rest.size() == 1) return rest.front();
  return chain(Op::kMul, rest);
}

ExprPtr canon_sum(const ExprPtr& a, const ExprPtr& b, bool negate_b) {
  std::vector<ExprPtr> terms;
  flatten(Op::kAdd, a, terms);
  std::vector<ExprPtr> bt;
  flatten(Op::kAdd, b, bt);
  for (auto& t : bt) {
    if (negate_b) {
      std::vector<ExprPtr> factors;
      flatten(Op::kMul, t, factors);
      factors.push_back(make_const(-1.0));
      terms.push_back(assemble_mul(std::move(factors)));
    } else {
      terms.push_back(std::move(t));
    }
  }
  return assemble_add(std::move(terms));
}

ExprPtr canon(const ExprPtr& n) {
  switch (n->op) {
    case Op::kConst:
    case Op::kPlaceholder:
    case Op::kVarXi:
    case Op::kVarXj:
    case Op::kVarT:
      return n;
    case Op::kNeg: {
      ExprPtr c = canon(n->left);
      std::vector<ExprPtr> factors;
      flatten(Op::kMul, c, factors);
      factors.push_back(make_const(-1.0));
      return assemble_mul(std::move(factors));
    }
    case Op::kAdd:
      return canon_sum(canon(n->left), canon(n->right), false);
    case Op::kSub:
      return canon_sum(canon(n->left), canon(n->right), true);
    case Op::kMul: {
      std::vector<ExprPtr> factors;
      flatten(Op::kMul, canon(n->left), factors);
      flatten(Op::kMul, canon(n->right), factors);
      return assemble_mul(std::move(factors));
    }
    case Op::kDiv: {
      ExprPtr a = canon(n->left);
      ExprPtr b = canon(n->right);
      if (a->op == Op::kConst && b->op == Op::kConst)
        return make_const(sanitize(protected_div(a->value, b->value)));
      return make_binary(Op::kDiv, a, b);
    }
    case Op::kSin:
    case Op::kCos:
    case Op::kExp:
    case Op::kSigmoid: {
      ExprPtr c = canon(n->left);
      if (c->op == Op::kConst) {
        double v = c->value;
        switch (n->op) {
          case Op::kSin: v = std::sin(v); break;
          case Op::kCos: v = std::cos(v); break;
          case Op::kExp: v = protected_exp(v); break;
          default: v = sigmoid(v); break;
        }
        return make_const(sanitize(v));
      }
      return make_unary(n->op, c);
    }
  }
  return n;
}

} // namespace

int cmp_shape(const ExprNode& a, const ExprNode& b) {
  int ra = op_rank(a.op), rb = op_rank(b.op);
  if (ra != rb) return ra < rb ? -1 : 1;
  int ca = (a.left ? 1 : 0) + (a.right ? 1 : 0);
  int cb = (b.left ? 1 : 0) + (b.right ? 1 : 0);
  if (ca != cb) return ca < cb ? -1 : 1;
  if (a.left) {
    if (int c = cmp_shape(*a.left, *b.left)) return c;
  }
  if (a.right) {
    if (int c = cmp_shape(*a.right, *b.right)) return c;
  }
  return 0;
}

int cmp_expr(const ExprNode& a, const ExprNode& b) {
  if (int c = cmp_shape(a, b)) return c;
  return cmp_payload(a, b);
}

bool same_shape(const Expr& a, const Expr& b) {
  return cmp_shape(*a.root(), *b.root()) == 0;
}

Expr canonicalize(const Expr& e) {
  return Expr(canon(e.root()));
}

std::string canonical_key(const Expr& e) {
  return canonicalize(e).str();
}

} // namespace netsr

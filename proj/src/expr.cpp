#include "netsr/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstring>
#include <limits>

namespace netsr {

bool is_leaf(Op op) {
  return op == Op::kConst || op == Op::kPlaceholder || op == Op::kVarXi ||
         op == Op::kVarXj || op == Op::kVarT;
}

bool is_unary(Op op) {
  return op == Op::kNeg || op == Op::kSin || op == Op::kCos ||
         op == Op::kExp || op == Op::kSigmoid;
}

bool is_binary(Op op) {
  return op == Op::kAdd || op == Op::kSub || op == Op::kMul || op == Op::kDiv;
}

const char* op_name(Op op) {
  switch (op) {
    case Op::kConst: return "const";
    case Op::kPlaceholder: return "placeholder";
    case Op::kVarXi: return "x_i";
    case Op::kVarXj: return "x_j";
    case Op::kVarT: return "t";
    case Op::kAdd: return "+";
    case Op::kSub: return "-";
    case Op::kMul: return "*";
    case Op::kDiv: return "/";
    case Op::kNeg: return "neg";
    case Op::kSin: return "sin";
    case Op::kCos: return "cos";
    case Op::kExp: return "exp";
    case Op::kSigmoid: return "sigmoid";
  }
  return "?";
}

double protected_div(double a, double b) {
  if (std::abs(b) < kDivGuard) return 1.0;
  return a / b;
}

double protected_exp(double x) {
  return std::exp(std::clamp(x, -kExpClamp, kExpClamp));
}

double sigmoid(double x) {
  return 1.0 / (1.0 + protected_exp(-x));
}

ExprPtr make_const(double v) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::kConst;
  n->value = v;
  return n;
}

ExprPtr make_placeholder(int index) {
  auto n = std::make_shared<ExprNode>();
  n->op = Op::kPlaceholder;
  n->value = static_cast<double>(index);
  return n;
}

ExprPtr make_var(Op var) {
  auto n = std::make_shared<ExprNode>();
  n->op = var;
  return n;
}

ExprPtr make_neg(ExprPtr child) {
  if (child->op == Op::kConst) return make_const(-child->value);
  auto n = std::make_shared<ExprNode>();
  n->op = Op::kNeg;
  n->left = std::move(child);
  return n;
}

ExprPtr make_unary(Op op, ExprPtr child) {
  if (op == Op::kNeg) return make_neg(std::move(child));
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->left = std::move(child);
  return n;
}

ExprPtr make_binary(Op op, ExprPtr left, ExprPtr right) {
  auto n = std::make_shared<ExprNode>();
  n->op = op;
  n->left = std::move(left);
  n->right = std::move(right);
  return n;
}

namespace {

class Parser {
public:
  explicit Parser(const std::string& text) : text_(text) {}

  ExprPtr run() {
    ExprPtr e = parse_sum();
    skip_ws();
    if (pos_ != text_.size())
      throw ParseError("unexpected trailing input", pos_);
    return e;
  }

private:
  ExprPtr parse_sum() {
    ExprPtr left = parse_product();
    for (;;) {
      skip_ws();
      if (peek() == '+') {
        ++pos_;
        left = make_binary(Op::kAdd, left, parse_product());
      } else if (peek() == '-') {
        ++pos_;
        left = make_binary(Op::kSub, left, parse_product());
      } else {
        return left;
      }
    }
  }

  ExprPtr parse_product() {
    ExprPtr left = parse_unary();
    for (;;) {
      skip_ws();
      if (peek() == '*') {
        ++pos_;
        left = make_binary(Op::kMul, left, parse_unary());
      } else if (peek() == '/') {
        ++pos_;
        left = make_binary(Op::kDiv, left, parse_unary());
      } else {
        return left;
      }
    }
  }

  ExprPtr parse_unary() {
    skip_ws();
    if (peek() == '-') {
      ++pos_;
      return make_neg(parse_unary());
    }
    return parse_primary();
  }

  ExprPtr parse_primary() {
    skip_ws();
    char c = peek();
    if (c == '(') {
      std::size_t open = pos_++;
      ExprPtr e = parse_sum();
      skip_ws();
      if (peek() != ')') throw ParseError("unmatched '('", open);
      ++pos_;
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
      return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
      return parse_ident();
    if (c == '\0') throw ParseError("unexpected end of input", pos_);
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  ExprPtr parse_number() {
    double v = 0.0;
    const char* begin = text_.data() + pos_;
    const char* end = text_.data() + text_.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc()) throw ParseError("bad number", pos_);
    pos_ += static_cast<std::size_t>(ptr - begin);
    return make_const(v);
  }

  ExprPtr parse_ident() {
    std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
            text_[pos_] == '_'))
      ++pos_;
    std::string name = text_.substr(start, pos_ - start);
    if (name == "x_i") return make_var(Op::kVarXi);
    if (name == "x_j") return make_var(Op::kVarXj);
    if (name == "t") return make_var(Op::kVarT);
    if (name == "sin") return parse_call(Op::kSin, start);
    if (name == "cos") return parse_call(Op::kCos, start);
    if (name == "exp") return parse_call(Op::kExp, start);
    if (name == "sigmoid") return parse_call(Op::kSigmoid, start);
    if (name.size() >= 2 && name[0] == 'c' &&
        std::all_of(name.begin() + 1, name.end(), [](char ch) {
          return std::isdigit(static_cast<unsigned char>(ch));
        })) {
      int idx = std::stoi(name.substr(1));
      if (idx < 1) throw ParseError("placeholder index starts at 1", start);
      return make_placeholder(idx - 1);
    }
    throw ParseError("unknown identifier '" + name + "'", start);
  }

  ExprPtr parse_call(Op op, std::size_t name_pos) {
    skip_ws();
    if (peek() != '(')
      throw ParseError("expected '(' after function name", name_pos);
    std::size_t open = pos_++;
    ExprPtr arg = parse_sum();
    skip_ws();
    if (peek() != ')') throw ParseError("unmatched '('", open);
    ++pos_;
    return make_unary(op, arg);
  }

  void skip_ws() {
    while (pos_ < text_.size() &&
           std::isspace(static_cast<unsigned char>(text_[pos_])))
      ++pos_;
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  const std::string& text_;
  std::size_t pos_ = 0;
};

std::string format_double(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

// Precedence: sum 1, product 2, unary minus 3, atoms 4. A right operand at
// the same level gets parentheses so left-associative parsing rebuilds the
// exact tree.
int precedence(Op op) {
  switch (op) {
    case Op::kAdd:
    case Op::kSub: return 1;
    case Op::kMul:
    case Op::kDiv: return 2;
    case Op::kNeg: return 3;
    default: return 4;
  }
}

void print_node(const ExprNode& n, int min_prec, std::string& out) {
  int prec = precedence(n.op);
  bool parens = prec < min_prec;
  if (parens) out += '(';
  switch (n.op) {
    case Op::kConst:
      out += format_double(n.value);
      break;
    case Op::kPlaceholder:
      out += 'c';
      out += std::to_string(static_cast<int>(n.value) + 1);
      break;
    case Op::kVarXi: out += "x_i"; break;
    case Op::kVarXj: out += "x_j"; break;
    case Op::kVarT: out += 't'; break;
    case Op::kAdd:
      print_node(*n.left, 1, out);
      out += " + ";
      print_node(*n.right, 2, out);
      break;
    case Op::kSub:
      print_node(*n.left, 1, out);
      out += " - ";
      print_node(*n.right, 2, out);
      break;
    case Op::kMul:
      print_node(*n.left, 2, out);
      out += '*';
      print_node(*n.right, 3, out);
      break;
    case Op::kDiv:
      print_node(*n.left, 2, out);
      out += '/';
      print_node(*n.right, 3, out);
      break;
    case Op::kNeg:
      out += '-';
      print_node(*n.left, 3, out);
      break;
    case Op::kSin:
    case Op::kCos:
    case Op::kExp:
    case Op::kSigmoid:
      out += op_name(n.op);
      out += '(';
      print_node(*n.left, 1, out);
      out += ')';
      break;
  }
  if (parens) out += ')';
}

int node_size(const ExprNode& n) {
  int s = 1;
  if (n.left) s += node_size(*n.left);
  if (n.right) s += node_size(*n.right);
  return s;
}

int node_depth(const ExprNode& n) {
  int d = 0;
  if (n.left) d = std::max(d, node_depth(*n.left));
  if (n.right) d = std::max(d, node_depth(*n.right));
  return d + 1;
}

bool node_uses(const ExprNode& n, Op var) {
  if (n.op == var) return true;
  if (n.left && node_uses(*n.left, var)) return true;
  if (n.right && node_uses(*n.right, var)) return true;
  return false;
}

int count_op(const ExprNode& n, Op op) {
  int c = n.op == op ? 1 : 0;
  if (n.left) c += count_op(*n.left, op);
  if (n.right) c += count_op(*n.right, op);
  return c;
}

void collect_constants(const ExprNode& n, std::vector<double>& out) {
  if (n.op == Op::kConst) out.push_back(n.value);
  if (n.left) collect_constants(*n.left, out);
  if (n.right) collect_constants(*n.right, out);
}

ExprPtr replace_constants(const ExprNode& n, const std::vector<double>& vals,
                          std::size_t& next) {
  if (n.op == Op::kConst) return make_const(vals.at(next++));
  auto copy = std::make_shared<ExprNode>();
  copy->op = n.op;
  copy->value = n.value;
  if (n.left) copy->left = replace_constants(*n.left, vals, next);
  if (n.right) copy->right = replace_constants(*n.right, vals, next);
  return copy;
}

struct EvalVars {
  double x_i;
  double x_j;
  double t;
  bool has_xj;
};

bool eval_node(const ExprNode& n, const EvalVars& v, double& out) {
  double a = 0.0, b = 0.0;
  if (n.left && !eval_node(*n.left, v, a)) return false;
  if (n.right && !eval_node(*n.right, v, b)) return false;
  switch (n.op) {
    case Op::kConst: out = n.value; break;
    case Op::kPlaceholder: return false;  // skeletons are not evaluable
    case Op::kVarXi: out = v.x_i; break;
    case Op::kVarXj:
      if (!v.has_xj) return false;
      out = v.x_j;
      break;
    case Op::kVarT: out = v.t; break;
    case Op::kAdd: out = a + b; break;
    case Op::kSub: out = a - b; break;
    case Op::kMul: out = a * b; break;
    case Op::kDiv: out = protected_div(a, b); break;
    case Op::kNeg: out = -a; break;
    case Op::kSin: out = std::sin(a); break;
    case Op::kCos: out = std::cos(a); break;
    case Op::kExp: out = protected_exp(a); break;
    case Op::kSigmoid: out = sigmoid(a); break;
  }
  return std::isfinite(out);
}

bool node_identical(const ExprNode& a, const ExprNode& b) {
  if (a.op != b.op) return false;
  if (a.op == Op::kConst || a.op == Op::kPlaceholder) {
    if (a.value != b.value) return false;
  }
  if (static_cast<bool>(a.left) != static_cast<bool>(b.left)) return false;
  if (static_cast<bool>(a.right) != static_cast<bool>(b.right)) return false;
  if (a.left && !node_identical(*a.left, *b.left)) return false;
  if (a.right && !node_identical(*a.right, *b.right)) return false;
  return true;
}

} // namespace

Expr Expr::parse(const std::string& text) {
  return Expr(Parser(text).run());
}

std::string Expr::str() const {
  std::string out;
  print_node(*root_, 1, out);
  return out;
}

int Expr::size() const { return node_size(*root_); }
int Expr::depth() const { return node_depth(*root_); }
bool Expr::uses(Op var) const { return node_uses(*root_, var); }
int Expr::placeholder_count() const { return count_op(*root_, Op::kPlaceholder); }

std::vector<double> Expr::constants() const {
  std::vector<double> out;
  collect_constants(*root_, out);
  return out;
}

Expr Expr::with_constants(const std::vector<double>& values) const {
  std::size_t next = 0;
  ExprPtr r = replace_constants(*root_, values, next);
  if (next != values.size())
    throw std::invalid_argument("constant count mismatch");
  return Expr(r);
}

std::optional<double> Expr::try_eval(double x_i, double x_j, double t) const {
  EvalVars v{x_i, x_j, t, true};
  double out = 0.0;
  if (!eval_node(*root_, v, out)) return std::nullopt;
  return out;
}

std::optional<double> Expr::try_eval(double x_i) const {
  EvalVars v{x_i, 0.0, 0.0, false};
  double out = 0.0;
  if (!eval_node(*root_, v, out)) return std::nullopt;
  return out;
}

double Expr::eval(double x_i, double x_j, double t) const {
  auto r = try_eval(x_i, x_j, t);
  if (!r) throw EvalError("domain error evaluating '" + str() + "'");
  return *r;
}

bool Expr::identical(const Expr& other) const {
  return node_identical(*root_, *other.root_);
}

namespace {

void compile_node(const ExprNode& n, std::vector<std::pair<Op, double>>& prog) {
  if (n.left) compile_node(*n.left, prog);
  if (n.right) compile_node(*n.right, prog);
  prog.emplace_back(n.op, n.value);
}

} // namespace

CompiledExpr::CompiledExpr(const Expr& e) {
  std::vector<std::pair<Op, double>> prog;
  compile_node(*e.root(), prog);
  prog_.reserve(prog.size());
  int sp = 0;
  for (auto& [op, value] : prog) {
    if (is_leaf(op)) ++sp;
    else if (is_binary(op)) --sp;
    n_slots_ = std::max(n_slots_, sp);
    prog_.push_back({op, value});
  }
}

bool CompiledExpr::eval_lanes(const double* xi, const double* xj, double t,
                              double* out, int n,
                              std::vector<double>& scratch) const {
  scratch.resize(static_cast<std::size_t>(n_slots_) * n);
  double* stack = scratch.data();
  int sp = 0;  // number of occupied slots
  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const Instr& ins : prog_) {
    switch (ins.op) {
      case Op::kConst: {
        double* dst = stack + static_cast<std::size_t>(sp++) * n;
        std::fill(dst, dst + n, ins.value);
        break;
      }
      case Op::kPlaceholder: {
        double* dst = stack + static_cast<std::size_t>(sp++) * n;
        std::fill(dst, dst + n, nan);
        break;
      }
      case Op::kVarXi: {
        double* dst = stack + static_cast<std::size_t>(sp++) * n;
        std::memcpy(dst, xi, sizeof(double) * n);
        break;
      }
      case Op::kVarXj: {
        double* dst = stack + static_cast<std::size_t>(sp++) * n;
        if (xj) std::memcpy(dst, xj, sizeof(double) * n);
        else std::fill(dst, dst + n, nan);
        break;
      }
      case Op::kVarT: {
        double* dst = stack + static_cast<std::size_t>(sp++) * n;
        std::fill(dst, dst + n, t);
        break;
      }
      case Op::kAdd: {
        double* a = stack + static_cast<std::size_t>(sp - 2) * n;
        const double* b = stack + static_cast<std::size_t>(sp - 1) * n;
        for (int k = 0; k < n; ++k) a[k] += b[k];
        --sp;
        break;
      }
      case Op::kSub: {
        double* a = stack + static_cast<std::size_t>(sp - 2) * n;
        const double* b = stack + static_cast<std::size_t>(sp - 1) * n;
        for (int k = 0; k < n; ++k) a[k] -= b[k];
        --sp;
        break;
      }
      case Op::kMul: {
        double* a = stack + static_cast<std::size_t>(sp - 2) * n;
        const double* b = stack + static_cast<std::size_t>(sp - 1) * n;
        for (int k = 0; k < n; ++k) a[k] *= b[k];
        --sp;
        break;
      }
      case Op::kDiv: {
        double* a = stack + static_cast<std::size_t>(sp - 2) * n;
        const double* b = stack + static_cast<std::size_t>(sp - 1) * n;
        for (int k = 0; k < n; ++k) a[k] = protected_div(a[k], b[k]);
        --sp;
        break;
      }
      case Op::kNeg: {
        double* a = stack + static_cast<std::size_t>(sp - 1) * n;
        for (int k = 0; k < n; ++k) a[k] = -a[k];
        break;
      }
      case Op::kSin: {
        double* a = stack + static_cast<std::size_t>(sp - 1) * n;
        for (int k = 0; k < n; ++k) a[k] = std::sin(a[k]);
        break;
      }
      case Op::kCos: {
        double* a = stack + static_cast<std::size_t>(sp - 1) * n;
        for (int k = 0; k < n; ++k) a[k] = std::cos(a[k]);
        break;
      }
      case Op::kExp: {
        double* a = stack + static_cast<std::size_t>(sp - 1) * n;
        for (int k = 0; k < n; ++k) a[k] = protected_exp(a[k]);
        break;
      }
      case Op::kSigmoid: {
        double* a = stack + static_cast<std::size_t>(sp - 1) * n;
        for (int k = 0; k < n; ++k) a[k] = sigmoid(a[k]);
        break;
      }
    }
  }
  std::memcpy(out, stack, sizeof(double) * n);
  bool finite = true;
  for (int k = 0; k < n; ++k) finite = finite && std::isfinite(out[k]);
  return finite;
}

} // namespace netsr

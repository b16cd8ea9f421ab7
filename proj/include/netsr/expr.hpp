#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace netsr {

// Node/edge formulas are trees over {x_i, x_j, t}, real constants and the
// operator set below. Placeholder appears only in skeletons (constants
// replaced by indexed slots c1..ck).
enum class Op : std::uint8_t {
  kConst,
  kPlaceholder,
  kVarXi,
  kVarXj,
  kVarT,
  kAdd,
  kSub,
  kMul,
  kDiv,
  kNeg,
  kSin,
  kCos,
  kExp,
  kSigmoid,
};

bool is_leaf(Op op);
bool is_unary(Op op);
bool is_binary(Op op);
const char* op_name(Op op);

// Protected evaluation: division by a near-zero denominator yields 1.0 and
// exp/sigmoid clamp their argument, so candidate formulas stay finite on
// ordinary inputs.
inline constexpr double kDivGuard = 1e-9;
inline constexpr double kExpClamp = 50.0;

double protected_div(double a, double b);
double protected_exp(double x);
double sigmoid(double x);

struct ExprNode;
using ExprPtr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  Op op = Op::kConst;
  double value = 0.0;  // constant value, or placeholder index
  ExprPtr left;
  ExprPtr right;
};

ExprPtr make_const(double v);
ExprPtr make_placeholder(int index);
ExprPtr make_var(Op var);
// Folds neg(const) into a negative constant so printing round-trips.
ExprPtr make_neg(ExprPtr child);
ExprPtr make_unary(Op op, ExprPtr child);
ExprPtr make_binary(Op op, ExprPtr left, ExprPtr right);

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& msg, std::size_t position)
      : std::runtime_error(msg + " at position " + std::to_string(position)),
        position_(position) {}
  std::size_t position() const { return position_; }

private:
  std::size_t position_;
};

class EvalError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Immutable formula value. Copies share structure.
class Expr {
public:
  Expr() : root_(make_const(0.0)) {}
  explicit Expr(ExprPtr root) : root_(std::move(root)) {}

  // Infix grammar with function calls, e.g. "sin(x_i - x_j)" or
  // "(1 - x_i)*x_j". Throws ParseError with position on bad input.
  static Expr parse(const std::string& text);

  const ExprPtr& root() const { return root_; }

  // print() re-parses to an identical tree.
  std::string str() const;

  int size() const;
  int depth() const;
  bool uses(Op var) const;
  int placeholder_count() const;

  // Constants in depth-first traversal order.
  std::vector<double> constants() const;
  Expr with_constants(const std::vector<double>& values) const;

  // Protected evaluation; nullopt flags a domain error (non-finite result
  // or an unbound variable).
  std::optional<double> try_eval(double x_i, double x_j, double t) const;
  std::optional<double> try_eval(double x_i) const;

  // Like try_eval but throws EvalError on domain error; for call sites
  // with known-good inputs.
  double eval(double x_i, double x_j = 0.0, double t = 0.0) const;

  bool identical(const Expr& other) const;

private:
  ExprPtr root_;
};

// Postfix compilation of an Expr for batch evaluation across lanes; used by
// the fitness simulator where the same formula runs over every node or edge.
class CompiledExpr {
public:
  CompiledExpr() = default;
  explicit CompiledExpr(const Expr& e);

  // Evaluates lane k with x_i = xi[k] and x_j = xj[k], shared t. A null xj
  // (or a placeholder in the program) reads as NaN, so formulas that need
  // it fail the finiteness check. Returns false if any lane produced a
  // non-finite value (outputs are still written).
  bool eval_lanes(const double* xi, const double* xj, double t, double* out,
                  int n, std::vector<double>& scratch) const;

  bool valid() const { return !prog_.empty(); }
  int stack_slots() const { return n_slots_; }

private:
  struct Instr {
    Op op;
    double value;
  };
  std::vector<Instr> prog_;
  int n_slots_ = 0;
};

} // namespace netsr

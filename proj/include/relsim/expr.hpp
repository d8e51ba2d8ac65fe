#pragma once

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "relsim/dual.hpp"
#include "relsim/error.hpp"

namespace relsim {

// Scalar expressions over the space-time coordinates q1..q4, the named
// constants c and pi, and user-declared parameters.
//
// Grammar (whitespace-insensitive):
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?            right-associative
//   atom   := number | name | func '(' expr ')' | '(' expr ')'
//   number := decimal digits with optional fraction and exponent
//   func   := sin cos tan exp log sqrt sinh cosh tanh abs
//
// '^' binds tighter than unary minus, so -q1^2 is -(q1^2). An expression is
// immutable after parse and may be evaluated concurrently.
class Expr {
 public:
  Expr() { root_ = add_node(Node::make_lit(0.0)); }

  static Expr parse(std::string_view source,
                    std::span<const std::string> params = {});

  static Expr literal(double v) {
    Expr e;
    e.nodes_.clear();
    e.root_ = e.add_node(Node::make_lit(v));
    return e;
  }

  // The tree k * e (or the literal 0 when k == 0).
  static Expr scaled(double k, const Expr& e);

  // Pointwise evaluation with plain double arithmetic.
  double value(const std::array<double, 4>& q, double c,
               std::span<const double> params = {}) const;

  // Evaluation together with exact partials d/dq^1..d/dq^4.
  Dual4 dual(const std::array<double, 4>& q, double c,
             std::span<const double> params = {}) const;

  // Deterministic printing; parse(str()) reproduces the same tree.
  std::string str() const;

  const std::vector<std::string>& params() const { return param_names_; }

  bool operator==(const Expr& other) const { return str() == other.str(); }

 private:
  enum class Op : unsigned char {
    Lit, Var, LightSpeed, Param, Neg, Add, Sub, Mul, Div, Pow, Fun
  };
  enum class Fn : unsigned char {
    Sin, Cos, Tan, Exp, Log, Sqrt, Sinh, Cosh, Tanh, Abs
  };

  struct Node {
    Op op = Op::Lit;
    int a = -1, b = -1;   // child indices
    double lit = 0.0;     // Op::Lit
    int slot = 0;         // Op::Var coordinate index, Op::Param slot
    Fn fn = Fn::Sin;      // Op::Fun

    static Node make_lit(double v) {
      Node n;
      n.op = Op::Lit;
      n.lit = v;
      return n;
    }
  };

  int add_node(Node n) {
    nodes_.push_back(n);
    return static_cast<int>(nodes_.size()) - 1;
  }

  double value_node(int idx, const std::array<double, 4>& q, double c,
                    std::span<const double> params) const;
  Dual4 dual_node(int idx, const std::array<double, 4>& q, double c,
                  std::span<const double> params) const;
  void print_node(int idx, int parent_prec, std::string& out) const;
  [[noreturn]] void domain_error(int idx, const std::string& reason) const;

  std::vector<Node> nodes_;
  int root_ = -1;
  std::vector<std::string> param_names_;

  friend class ExprParser;
};

// Shortest decimal representation that round-trips to the same double.
std::string format_double(double v);

}  // namespace relsim

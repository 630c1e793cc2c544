#pragma once

// Closed-form arithmetic expressions in the two coordinates x1, x2.
//
// Grammar (whitespace-insensitive):
//
//   expr    ::= term { ("+" | "-") term }
//   term    ::= unary { ("*" | "/") unary }
//   unary   ::= ("-" | "+") unary | power
//   power   ::= primary [ "^" unary ]          (right associative)
//   primary ::= number | "x1" | "x2" | "pi"
//             | func "(" expr ")" | "pow" "(" expr "," expr ")"
//             | "(" expr ")"
//   func    ::= "exp" | "log" | "sqrt" | "abs" | "sin" | "cos"
//
// "^" binds tighter than unary minus, so "-x1^2" is "-(x1^2)".  A negative
// base raised to a literal fraction p/q with odd q is the real odd root,
// e.g. "(x2-0.5)^(1/3)" is defined for x2 < 0.5.

#include <memory>
#include <string>
#include <string_view>

#include "stransport/error.hpp"

namespace stransport {

enum class Var { X1, X2 };

enum class EvalFault { DivisionByZero, Domain, NonFinite, NonSmooth };

/// Evaluation left the domain of definition of some subexpression.
class EvalError : public NumericError {
 public:
  EvalError(EvalFault fault, std::string subexpression, const std::string& what)
      : NumericError(what), fault_(fault), subexpression_(std::move(subexpression)) {}

  EvalFault fault() const noexcept { return fault_; }
  const std::string& subexpression() const noexcept { return subexpression_; }

 private:
  EvalFault fault_;
  std::string subexpression_;
};

class Expr {
 public:
  struct Node;
  struct Program;

  /// The constant 0.
  Expr();
  Expr(double value);  // NOLINT(google-explicit-constructor)

  static Expr variable(Var v);
  static Expr parse(std::string_view text);

  /// Throws EvalError instead of returning a non-finite value.
  double operator()(double x1, double x2) const;

  /// Exact symbolic derivative. Constant subtrees are folded, nothing more.
  Expr derivative(Var v) const;

  /// Fully parenthesized text that parses back to the same tree.
  std::string str() const;

  bool depends_on(Var v) const;
  bool is_constant() const { return !depends_on(Var::X1) && !depends_on(Var::X2); }

  friend Expr operator+(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a, const Expr& b);
  friend Expr operator*(const Expr& a, const Expr& b);
  friend Expr operator/(const Expr& a, const Expr& b);
  friend Expr operator-(const Expr& a);
  friend Expr pow(const Expr& base, const Expr& exponent);
  friend Expr exp(const Expr& a);

  const Node& root() const { return *root_; }

 private:
  explicit Expr(std::shared_ptr<const Node> root);

  std::shared_ptr<const Node> root_;
  std::shared_ptr<const Program> program_;
};

inline Expr parse(std::string_view text) { return Expr::parse(text); }
inline double evaluate(const Expr& e, double x1, double x2) { return e(x1, x2); }
inline Expr differentiate(const Expr& e, Var v) { return e.derivative(v); }

}  // namespace stransport

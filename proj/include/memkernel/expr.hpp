#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace memkernel {

// Immutable expression tree in a single variable.
// Grammar: + - * / ^ (integer constant exponent), unary minus,
// sin cos exp, numeric literals, the constant pi.
class Expr {
 public:
  enum class Kind { Constant, Variable, Sin, Cos, Exp, Neg, Add, Sub, Mul, Div, Pow };

  Expr();  // the constant 0 in variable "x"

  static Expr constant(double v, std::string var = "x");
  static Expr variable(std::string var = "x");

  Kind kind() const;
  double value() const;       // Constant only
  int exponent() const;       // Pow only
  Expr lhs() const;           // unary operand or left operand
  Expr rhs() const;
  const std::string& var() const { return var_; }

  double eval(double at) const;
  Expr derivative() const;
  Expr derivative(int order) const;

  // Fully parenthesized, shortest round-trip literals.
  std::string str() const;

  bool structurally_equal(const Expr& other) const;
  bool is_constant() const;
  bool depends_on_var() const;

  // Coefficients c0 + c1 v + ... when the tree is a polynomial.
  std::optional<std::vector<double>> polynomial() const;

  struct Node;
  Expr(std::shared_ptr<const Node> n, std::string var);
  const std::shared_ptr<const Node>& node() const { return node_; }

 private:
  std::shared_ptr<const Node> node_;
  std::string var_;
};

Expr parse_expr(std::string_view text, std::string_view var = "x");

// Builders with light constant folding, used by derivative().
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& a, int n);
Expr sin(const Expr& a);
Expr cos(const Expr& a);
Expr exp(const Expr& a);

}  // namespace memkernel

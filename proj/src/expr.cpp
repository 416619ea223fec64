#include "memkernel/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numbers>

#include "memkernel/errors.hpp"
#include "memkernel/io.hpp"

namespace memkernel {

struct Expr::Node {
  Kind kind;
  double value = 0.0;
  int exponent = 0;
  std::shared_ptr<const Node> a, b;
};

namespace {

using NodePtr = std::shared_ptr<const Expr::Node>;

NodePtr make_node(Expr::Kind k, NodePtr a = nullptr, NodePtr b = nullptr, double v = 0.0,
                  int e = 0) {
  auto n = std::make_shared<Expr::Node>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  n->value = v;
  n->exponent = e;
  return n;
}

NodePtr const_node(double v) { return make_node(Expr::Kind::Constant, nullptr, nullptr, v); }

bool is_const(const NodePtr& n, double v) {
  return n->kind == Expr::Kind::Constant && n->value == v;
}

bool has_var(const NodePtr& n) {
  if (!n) return false;
  if (n->kind == Expr::Kind::Variable) return true;
  return has_var(n->a) || has_var(n->b);
}

double eval_node(const NodePtr& n, double x) {
  using K = Expr::Kind;
  switch (n->kind) {
    case K::Constant: return n->value;
    case K::Variable: return x;
    case K::Sin: return std::sin(eval_node(n->a, x));
    case K::Cos: return std::cos(eval_node(n->a, x));
    case K::Exp: return std::exp(eval_node(n->a, x));
    case K::Neg: return -eval_node(n->a, x);
    case K::Add: return eval_node(n->a, x) + eval_node(n->b, x);
    case K::Sub: return eval_node(n->a, x) - eval_node(n->b, x);
    case K::Mul: return eval_node(n->a, x) * eval_node(n->b, x);
    case K::Div: {
      double d = eval_node(n->b, x);
      if (d == 0.0) throw EvalError("division by zero");
      return eval_node(n->a, x) / d;
    }
    case K::Pow: {
      double base = eval_node(n->a, x);
      int e = n->exponent;
      if (e < 0 && base == 0.0) throw EvalError("division by zero");
      double r = 1.0;
      double b = e < 0 ? 1.0 / base : base;
      for (int i = 0; i < std::abs(e); ++i) r *= b;
      return r;
    }
  }
  return 0.0;
}

void print_node(const NodePtr& n, const std::string& var, std::string& out) {
  using K = Expr::Kind;
  switch (n->kind) {
    case K::Constant:
      if (n->value < 0 || (n->value == 0 && std::signbit(n->value)))
        out += "(" + format_double(n->value) + ")";
      else
        out += format_double(n->value);
      return;
    case K::Variable: out += var; return;
    case K::Sin:
    case K::Cos:
    case K::Exp:
      out += n->kind == K::Sin ? "sin(" : n->kind == K::Cos ? "cos(" : "exp(";
      print_node(n->a, var, out);
      out += ")";
      return;
    case K::Neg:
      out += "(-";
      print_node(n->a, var, out);
      out += ")";
      return;
    case K::Pow:
      out += "(";
      print_node(n->a, var, out);
      out += "^";
      if (n->exponent < 0)
        out += "(" + std::to_string(n->exponent) + ")";
      else
        out += std::to_string(n->exponent);
      out += ")";
      return;
    default: {
      const char* op = n->kind == K::Add ? "+" : n->kind == K::Sub ? "-" : n->kind == K::Mul ? "*" : "/";
      out += "(";
      print_node(n->a, var, out);
      out += op;
      print_node(n->b, var, out);
      out += ")";
    }
  }
}

bool equal_nodes(const NodePtr& x, const NodePtr& y) {
  if (x == y) return true;
  if (!x || !y) return false;
  if (x->kind != y->kind) return false;
  if (x->kind == Expr::Kind::Constant) {
    double a = x->value, b = y->value;
    return a == b || (std::isnan(a) && std::isnan(b));
  }
  if (x->kind == Expr::Kind::Pow && x->exponent != y->exponent) return false;
  return equal_nodes(x->a, y->a) && equal_nodes(x->b, y->b);
}

// folding builders on nodes

NodePtr n_add(const NodePtr& a, const NodePtr& b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  if (a->kind == Expr::Kind::Constant && b->kind == Expr::Kind::Constant)
    return const_node(a->value + b->value);
  return make_node(Expr::Kind::Add, a, b);
}

NodePtr n_neg(const NodePtr& a) {
  if (a->kind == Expr::Kind::Constant) return const_node(-a->value);
  if (a->kind == Expr::Kind::Neg) return a->a;
  return make_node(Expr::Kind::Neg, a);
}

NodePtr n_sub(const NodePtr& a, const NodePtr& b) {
  if (is_const(b, 0.0)) return a;
  if (is_const(a, 0.0)) return n_neg(b);
  if (a->kind == Expr::Kind::Constant && b->kind == Expr::Kind::Constant)
    return const_node(a->value - b->value);
  return make_node(Expr::Kind::Sub, a, b);
}

NodePtr n_mul(const NodePtr& a, const NodePtr& b) {
  if (is_const(a, 0.0) || is_const(b, 0.0)) return const_node(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (a->kind == Expr::Kind::Constant && b->kind == Expr::Kind::Constant)
    return const_node(a->value * b->value);
  return make_node(Expr::Kind::Mul, a, b);
}

NodePtr n_div(const NodePtr& a, const NodePtr& b) {
  if (is_const(b, 1.0)) return a;
  if (is_const(a, 0.0) && !is_const(b, 0.0)) return const_node(0.0);
  return make_node(Expr::Kind::Div, a, b);
}

NodePtr n_pow(const NodePtr& a, int e) {
  if (e == 0) return const_node(1.0);
  if (e == 1) return a;
  if (a->kind == Expr::Kind::Constant) {
    double r = eval_node(make_node(Expr::Kind::Pow, a, nullptr, 0.0, e), 0.0);
    return const_node(r);
  }
  return make_node(Expr::Kind::Pow, a, nullptr, 0.0, e);
}

NodePtr diff_node(const NodePtr& n) {
  using K = Expr::Kind;
  switch (n->kind) {
    case K::Constant: return const_node(0.0);
    case K::Variable: return const_node(1.0);
    case K::Sin: return n_mul(make_node(K::Cos, n->a), diff_node(n->a));
    case K::Cos: return n_neg(n_mul(make_node(K::Sin, n->a), diff_node(n->a)));
    case K::Exp: return n_mul(n, diff_node(n->a));
    case K::Neg: return n_neg(diff_node(n->a));
    case K::Add: return n_add(diff_node(n->a), diff_node(n->b));
    case K::Sub: return n_sub(diff_node(n->a), diff_node(n->b));
    case K::Mul:
      return n_add(n_mul(diff_node(n->a), n->b), n_mul(n->a, diff_node(n->b)));
    case K::Div: {
      if (!has_var(n->b)) return n_div(diff_node(n->a), n->b);
      NodePtr num = n_sub(n_mul(diff_node(n->a), n->b), n_mul(n->a, diff_node(n->b)));
      return n_div(num, n_pow(n->b, 2));
    }
    case K::Pow:
      return n_mul(n_mul(const_node(n->exponent), n_pow(n->a, n->exponent - 1)),
                   diff_node(n->a));
  }
  return const_node(0.0);
}

using Poly = std::vector<double>;

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly r(a.size() + b.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  return r;
}

Poly poly_add(const Poly& a, const Poly& b, double sb) {
  Poly r(std::max(a.size(), b.size()), 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) r[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) r[i] += sb * b[i];
  return r;
}

constexpr std::size_t kMaxDegree = 128;

std::optional<Poly> to_poly(const NodePtr& n) {
  using K = Expr::Kind;
  switch (n->kind) {
    case K::Constant: return Poly{n->value};
    case K::Variable: return Poly{0.0, 1.0};
    case K::Neg: {
      auto a = to_poly(n->a);
      if (!a) return std::nullopt;
      for (double& c : *a) c = -c;
      return a;
    }
    case K::Add:
    case K::Sub: {
      auto a = to_poly(n->a), b = to_poly(n->b);
      if (!a || !b) return std::nullopt;
      return poly_add(*a, *b, n->kind == K::Add ? 1.0 : -1.0);
    }
    case K::Mul: {
      auto a = to_poly(n->a), b = to_poly(n->b);
      if (!a || !b || a->size() + b->size() > kMaxDegree) return std::nullopt;
      return poly_mul(*a, *b);
    }
    case K::Div: {
      if (has_var(n->b)) return std::nullopt;
      auto a = to_poly(n->a);
      if (!a) return std::nullopt;
      double d = eval_node(n->b, 0.0);
      if (d == 0.0) return std::nullopt;
      for (double& c : *a) c /= d;
      return a;
    }
    case K::Pow: {
      if (n->exponent < 0) return std::nullopt;
      auto a = to_poly(n->a);
      if (!a || a->size() * static_cast<std::size_t>(n->exponent) > kMaxDegree)
        return std::nullopt;
      Poly r{1.0};
      for (int i = 0; i < n->exponent; ++i) r = poly_mul(r, *a);
      return r;
    }
    default: {
      if (has_var(n)) return std::nullopt;
      return Poly{eval_node(n, 0.0)};
    }
  }
}

class Parser {
 public:
  Parser(std::string_view s, std::string_view var) : s_(s), var_(var) {}

  NodePtr parse() {
    NodePtr e = expr();
    skip_ws();
    if (pos_ != s_.size()) throw ParseError("unexpected character '" + std::string(1, s_[pos_]) + "'", pos_);
    return e;
  }

 private:
  std::string_view s_;
  std::string_view var_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < s_.size() && (s_[pos_] == ' ' || s_[pos_] == '\t')) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= s_.size())
        throw ParseError(std::string("expected '") + c + "' but reached end of input", pos_);
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  NodePtr expr() {
    NodePtr a = term();
    for (;;) {
      if (accept('+'))
        a = make_node(Expr::Kind::Add, a, term());
      else if (accept('-'))
        a = make_node(Expr::Kind::Sub, a, term());
      else
        return a;
    }
  }

  NodePtr term() {
    NodePtr a = unary();
    for (;;) {
      if (accept('*'))
        a = make_node(Expr::Kind::Mul, a, unary());
      else if (accept('/'))
        a = make_node(Expr::Kind::Div, a, unary());
      else
        return a;
    }
  }

  NodePtr unary() {
    if (accept('-')) {
      NodePtr a = unary();
      if (a->kind == Expr::Kind::Constant) return const_node(-a->value);
      return make_node(Expr::Kind::Neg, a);
    }
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    NodePtr base = primary();
    if (accept('^')) {
      skip_ws();
      std::size_t eat = pos_;
      NodePtr e = unary();
      if (has_var(e)) throw ParseError("non-integer exponent", eat);
      double v = eval_node(e, 0.0);
      if (!std::isfinite(v) || v != std::nearbyint(v) || std::abs(v) > 1e6)
        throw ParseError("non-integer exponent", eat);
      return make_node(Expr::Kind::Pow, base, nullptr, 0.0, static_cast<int>(v));
    }
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError("unexpected end of input", pos_);
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr e = expr();
      expect(')');
      return e;
    }
    if ((c >= '0' && c <= '9') || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = pos_;
      while (pos_ < s_.size() &&
             (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
        ++pos_;
      std::string_view id = s_.substr(start, pos_ - start);
      if (id == "sin" || id == "cos" || id == "exp") {
        expect('(');
        NodePtr a = expr();
        expect(')');
        Expr::Kind k = id == "sin" ? Expr::Kind::Sin : id == "cos" ? Expr::Kind::Cos : Expr::Kind::Exp;
        return make_node(k, a);
      }
      if (id == var_) return make_node(Expr::Kind::Variable);
      if (id == "pi") return const_node(std::numbers::pi);
      throw ParseError("unknown identifier '" + std::string(id) + "'", start);
    }
    throw ParseError("unexpected character '" + std::string(1, c) + "'", pos_);
  }

  NodePtr number() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isdigit(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '.'))
      ++pos_;
    if (pos_ < s_.size() && (s_[pos_] == 'e' || s_[pos_] == 'E')) {
      std::size_t save = pos_;
      ++pos_;
      if (pos_ < s_.size() && (s_[pos_] == '+' || s_[pos_] == '-')) ++pos_;
      if (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) {
        while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (ec != std::errc() || ptr != s_.data() + pos_) throw ParseError("malformed number", start);
    return const_node(v);
  }
};

}  // namespace

Expr::Expr() : node_(const_node(0.0)), var_("x") {}
Expr::Expr(std::shared_ptr<const Node> n, std::string var) : node_(std::move(n)), var_(std::move(var)) {}

Expr Expr::constant(double v, std::string var) { return Expr(const_node(v), std::move(var)); }
Expr Expr::variable(std::string var) { return Expr(make_node(Kind::Variable), std::move(var)); }

Expr::Kind Expr::kind() const { return node_->kind; }
double Expr::value() const { return node_->value; }
int Expr::exponent() const { return node_->exponent; }
Expr Expr::lhs() const { return Expr(node_->a, var_); }
Expr Expr::rhs() const { return Expr(node_->b, var_); }

double Expr::eval(double at) const {
  double r = eval_node(node_, at);
  if (!std::isfinite(r)) throw EvalError("non-finite value of " + str() + " at " + format_double(at));
  return r;
}

Expr Expr::derivative() const { return Expr(diff_node(node_), var_); }

Expr Expr::derivative(int order) const {
  Expr e = *this;
  for (int i = 0; i < order; ++i) e = e.derivative();
  return e;
}

std::string Expr::str() const {
  std::string out;
  print_node(node_, var_, out);
  return out;
}

bool Expr::structurally_equal(const Expr& other) const { return equal_nodes(node_, other.node_); }
bool Expr::is_constant() const { return node_->kind == Kind::Constant; }
bool Expr::depends_on_var() const { return has_var(node_); }

std::optional<std::vector<double>> Expr::polynomial() const { return to_poly(node_); }

Expr parse_expr(std::string_view text, std::string_view var) {
  Parser p(text, var);
  return Expr(p.parse(), std::string(var));
}

Expr operator+(const Expr& a, const Expr& b) { return Expr(n_add(a.node(), b.node()), a.var()); }
Expr operator-(const Expr& a, const Expr& b) { return Expr(n_sub(a.node(), b.node()), a.var()); }
Expr operator*(const Expr& a, const Expr& b) { return Expr(n_mul(a.node(), b.node()), a.var()); }
Expr operator/(const Expr& a, const Expr& b) { return Expr(n_div(a.node(), b.node()), a.var()); }
Expr operator-(const Expr& a) { return Expr(n_neg(a.node()), a.var()); }
Expr pow(const Expr& a, int n) { return Expr(n_pow(a.node(), n), a.var()); }
Expr sin(const Expr& a) { return Expr(make_node(Expr::Kind::Sin, a.node()), a.var()); }
Expr cos(const Expr& a) { return Expr(make_node(Expr::Kind::Cos, a.node()), a.var()); }
Expr exp(const Expr& a) { return Expr(make_node(Expr::Kind::Exp, a.node()), a.var()); }

}  // namespace memkernel

#pragma once

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <memory>
#include <string>
#include <string_view>

#include "csteer/errors.hpp"
#include "csteer/geometry.hpp"

namespace csteer {

/// Expression trees over the variables x, y, z with literals, + - * /, unary
/// minus, sin, cos, exp, tanh and power by an integer constant. The grammar is
/// deliberately tiny so that symbolic differentiation is total; see the EBNF
/// in the README.
enum class ExprKind { Const, Var, Add, Sub, Mul, Div, Neg, Sin, Cos, Exp, Tanh, Pow };

struct ExprNode;
using Expr = std::shared_ptr<const ExprNode>;

struct ExprNode {
  ExprKind kind;
  double value = 0.0;   // Const
  int var = 0;          // Var: 0=x, 1=y, 2=z
  int exponent = 0;     // Pow
  Expr a, b;            // children
};

inline Expr make_const(double v) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Const;
  n->value = v;
  return n;
}

inline Expr make_var(int var) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Var;
  n->var = var;
  return n;
}

inline Expr make_node(ExprKind k, Expr a, Expr b = nullptr) {
  auto n = std::make_shared<ExprNode>();
  n->kind = k;
  n->a = std::move(a);
  n->b = std::move(b);
  return n;
}

inline Expr make_pow(Expr base, int exponent) {
  auto n = std::make_shared<ExprNode>();
  n->kind = ExprKind::Pow;
  n->a = std::move(base);
  n->exponent = exponent;
  return n;
}

inline bool is_const(const Expr& e, double v) {
  return e->kind == ExprKind::Const && e->value == v;
}

// Light algebraic cleanup so derivative trees stay small and printable.
inline Expr simplified(ExprKind k, Expr a, Expr b) {
  const bool ac = a && a->kind == ExprKind::Const;
  const bool bc = b && b->kind == ExprKind::Const;
  switch (k) {
    case ExprKind::Add:
      if (ac && bc) return make_const(a->value + b->value);
      if (is_const(a, 0.0)) return b;
      if (is_const(b, 0.0)) return a;
      break;
    case ExprKind::Sub:
      if (ac && bc) return make_const(a->value - b->value);
      if (is_const(b, 0.0)) return a;
      if (is_const(a, 0.0)) return make_node(ExprKind::Neg, b);
      break;
    case ExprKind::Mul:
      if (ac && bc) return make_const(a->value * b->value);
      if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
      if (is_const(a, 1.0)) return b;
      if (is_const(b, 1.0)) return a;
      break;
    case ExprKind::Div:
      if (is_const(a, 0.0)) return make_const(0.0);
      if (is_const(b, 1.0)) return a;
      if (ac && bc && b->value != 0.0) return make_const(a->value / b->value);
      break;
    case ExprKind::Neg:
      if (ac) return make_const(-a->value);
      break;
    default: break;
  }
  return make_node(k, std::move(a), std::move(b));
}

inline double ipow(double base, int k) {
  if (k < 0) return 1.0 / ipow(base, -k);
  double r = 1.0, b = base;
  unsigned n = static_cast<unsigned>(k);
  while (n) {
    if (n & 1u) r *= b;
    b *= b;
    n >>= 1;
  }
  return r;
}

inline double expr_eval(const Expr& e, const Point& p) {
  switch (e->kind) {
    case ExprKind::Const: return e->value;
    case ExprKind::Var: return e->var == 0 ? p.x : (e->var == 1 ? p.y : p.z);
    case ExprKind::Add: return expr_eval(e->a, p) + expr_eval(e->b, p);
    case ExprKind::Sub: return expr_eval(e->a, p) - expr_eval(e->b, p);
    case ExprKind::Mul: return expr_eval(e->a, p) * expr_eval(e->b, p);
    case ExprKind::Div: return expr_eval(e->a, p) / expr_eval(e->b, p);
    case ExprKind::Neg: return -expr_eval(e->a, p);
    case ExprKind::Sin: return std::sin(expr_eval(e->a, p));
    case ExprKind::Cos: return std::cos(expr_eval(e->a, p));
    case ExprKind::Exp: return std::exp(expr_eval(e->a, p));
    case ExprKind::Tanh: return std::tanh(expr_eval(e->a, p));
    case ExprKind::Pow: return ipow(expr_eval(e->a, p), e->exponent);
  }
  return 0.0;
}

/// Exact symbolic partial derivative with respect to variable `var`.
inline Expr expr_diff(const Expr& e, int var) {
  switch (e->kind) {
    case ExprKind::Const: return make_const(0.0);
    case ExprKind::Var: return make_const(e->var == var ? 1.0 : 0.0);
    case ExprKind::Add: return simplified(ExprKind::Add, expr_diff(e->a, var), expr_diff(e->b, var));
    case ExprKind::Sub: return simplified(ExprKind::Sub, expr_diff(e->a, var), expr_diff(e->b, var));
    case ExprKind::Mul:
      return simplified(ExprKind::Add, simplified(ExprKind::Mul, expr_diff(e->a, var), e->b),
                        simplified(ExprKind::Mul, e->a, expr_diff(e->b, var)));
    case ExprKind::Div:
      // (a'b - a b') / b^2
      return simplified(
          ExprKind::Div,
          simplified(ExprKind::Sub, simplified(ExprKind::Mul, expr_diff(e->a, var), e->b),
                     simplified(ExprKind::Mul, e->a, expr_diff(e->b, var))),
          make_pow(e->b, 2));
    case ExprKind::Neg: return simplified(ExprKind::Neg, expr_diff(e->a, var), nullptr);
    case ExprKind::Sin:
      return simplified(ExprKind::Mul, make_node(ExprKind::Cos, e->a), expr_diff(e->a, var));
    case ExprKind::Cos:
      return simplified(ExprKind::Neg,
                        simplified(ExprKind::Mul, make_node(ExprKind::Sin, e->a), expr_diff(e->a, var)),
                        nullptr);
    case ExprKind::Exp:
      return simplified(ExprKind::Mul, make_node(ExprKind::Exp, e->a), expr_diff(e->a, var));
    case ExprKind::Tanh:
      // 1 - tanh^2
      return simplified(ExprKind::Mul,
                        simplified(ExprKind::Sub, make_const(1.0), make_pow(make_node(ExprKind::Tanh, e->a), 2)),
                        expr_diff(e->a, var));
    case ExprKind::Pow: {
      if (e->exponent == 0) return make_const(0.0);
      return simplified(ExprKind::Mul,
                        simplified(ExprKind::Mul, make_const(static_cast<double>(e->exponent)),
                                   make_pow(e->a, e->exponent - 1)),
                        expr_diff(e->a, var));
    }
  }
  return make_const(0.0);
}

namespace detail {

inline int precedence(ExprKind k) {
  switch (k) {
    case ExprKind::Add:
    case ExprKind::Sub: return 1;
    case ExprKind::Mul:
    case ExprKind::Div: return 2;
    case ExprKind::Neg: return 3;
    case ExprKind::Pow: return 4;
    default: return 5;
  }
}

inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline void print_expr(const Expr& e, std::string& out, int parent_prec) {
  const int prec = precedence(e->kind);
  const bool need_paren = prec < parent_prec;
  if (need_paren) out += '(';
  switch (e->kind) {
    case ExprKind::Const:
      if (e->value < 0.0) {
        out += '(';
        out += format_number(e->value);
        out += ')';
      } else {
        out += format_number(e->value);
      }
      break;
    case ExprKind::Var: out += (e->var == 0 ? 'x' : (e->var == 1 ? 'y' : 'z')); break;
    case ExprKind::Add:
      print_expr(e->a, out, prec);
      out += " + ";
      print_expr(e->b, out, prec + 1);
      break;
    case ExprKind::Sub:
      print_expr(e->a, out, prec);
      out += " - ";
      print_expr(e->b, out, prec + 1);
      break;
    case ExprKind::Mul:
      print_expr(e->a, out, prec);
      out += " * ";
      print_expr(e->b, out, prec + 1);
      break;
    case ExprKind::Div:
      print_expr(e->a, out, prec);
      out += " / ";
      print_expr(e->b, out, prec + 1);
      break;
    case ExprKind::Neg:
      out += '-';
      print_expr(e->a, out, prec + 1);
      break;
    case ExprKind::Sin:
      out += "sin(";
      print_expr(e->a, out, 0);
      out += ')';
      break;
    case ExprKind::Cos:
      out += "cos(";
      print_expr(e->a, out, 0);
      out += ')';
      break;
    case ExprKind::Exp:
      out += "exp(";
      print_expr(e->a, out, 0);
      out += ')';
      break;
    case ExprKind::Tanh:
      out += "tanh(";
      print_expr(e->a, out, 0);
      out += ')';
      break;
    case ExprKind::Pow:
      print_expr(e->a, out, prec + 1);
      out += '^';
      out += std::to_string(e->exponent);
      break;
  }
  if (need_paren) out += ')';
}

struct Parser {
  std::string_view src;
  std::size_t pos = 0;
  std::string_view allowed;  // subset of "xyz"

  void skip_ws() {
    while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
  }

  bool peek_char(char c) {
    skip_ws();
    return pos < src.size() && src[pos] == c;
  }

  bool accept(char c) {
    if (peek_char(c)) {
      ++pos;
      return true;
    }
    return false;
  }

  void expect(char c, const char* what) {
    if (!accept(c)) throw ParseError(std::string("expected '") + c + "' " + what, pos);
  }

  [[noreturn]] void fail(const std::string& msg, std::size_t at) { throw ParseError(msg, at); }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      if (accept('+')) {
        lhs = simplified(ExprKind::Add, lhs, parse_term());
      } else if (accept('-')) {
        lhs = simplified(ExprKind::Sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_term() {
    Expr lhs = parse_factor();
    for (;;) {
      if (accept('*')) {
        lhs = simplified(ExprKind::Mul, lhs, parse_factor());
      } else if (accept('/')) {
        lhs = simplified(ExprKind::Div, lhs, parse_factor());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_factor() {
    if (accept('-')) return simplified(ExprKind::Neg, parse_factor(), nullptr);
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (accept('^')) {
      skip_ws();
      const std::size_t at = pos;
      bool neg = false;
      if (accept('-')) neg = true;
      skip_ws();
      std::size_t start = pos;
      while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
      if (pos == start) fail("power requires an integer constant exponent", at);
      int k = 0;
      std::from_chars(src.data() + start, src.data() + pos, k);
      return make_pow(base, neg ? -k : k);
    }
    return base;
  }

  Expr parse_atom() {
    skip_ws();
    if (pos >= src.size()) fail("unexpected end of input", pos);
    const char c = src[pos];
    if (c == '(') {
      ++pos;
      Expr e = parse_expr();
      expect(')', "to close subexpression");
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::size_t start = pos;
      double v = 0.0;
      auto res = std::from_chars(src.data() + start, src.data() + src.size(), v);
      if (res.ec != std::errc{}) fail("malformed number", start);
      pos = static_cast<std::size_t>(res.ptr - src.data());
      return make_const(v);
    }
    if (std::isalpha(static_cast<unsigned char>(c))) {
      const std::size_t start = pos;
      while (pos < src.size() && std::isalpha(static_cast<unsigned char>(src[pos]))) ++pos;
      const std::string_view word = src.substr(start, pos - start);
      if (word == "sin" || word == "cos" || word == "exp" || word == "tanh") {
        expect('(', "after function name");
        Expr arg = parse_expr();
        expect(')', "to close function argument");
        if (word == "sin") return make_node(ExprKind::Sin, arg);
        if (word == "cos") return make_node(ExprKind::Cos, arg);
        if (word == "exp") return make_node(ExprKind::Exp, arg);
        return make_node(ExprKind::Tanh, arg);
      }
      if (word.size() == 1 && (word[0] == 'x' || word[0] == 'y' || word[0] == 'z')) {
        if (allowed.find(word[0]) == std::string_view::npos)
          fail("variable '" + std::string(word) + "' is not allowed here", start);
        return make_var(word[0] == 'x' ? 0 : (word[0] == 'y' ? 1 : 2));
      }
      fail("unknown identifier '" + std::string(word) + "'", start);
    }
    fail(std::string("unexpected character '") + c + "'", pos);
  }
};

}  // namespace detail

inline std::string expr_to_string(const Expr& e) {
  std::string out;
  detail::print_expr(e, out, 0);
  return out;
}

/// Parse a single expression over the given variable subset (default "xyz").
inline Expr parse_expression(std::string_view src, std::string_view allowed_vars = "xyz") {
  detail::Parser p{src, 0, allowed_vars};
  Expr e = p.parse_expr();
  p.skip_ws();
  if (p.pos != src.size()) p.fail("trailing input after expression", p.pos);
  return e;
}

/// Parse a map source "(ex, ey, ez)": a parenthesized comma-separated triple.
inline std::array<Expr, 3> parse_map_source(std::string_view src) {
  detail::Parser p{src, 0, "xyz"};
  p.expect('(', "to open the component triple");
  std::array<Expr, 3> out;
  out[0] = p.parse_expr();
  for (int i = 1; i < 3; ++i) {
    if (!p.accept(',')) p.fail("expected 3 components, found fewer", p.pos);
    out[i] = p.parse_expr();
  }
  if (p.accept(',')) p.fail("expected exactly 3 components, found more", p.pos);
  p.expect(')', "to close the component triple");
  p.skip_ws();
  if (p.pos != src.size()) p.fail("trailing input after map", p.pos);
  return out;
}

}  // namespace csteer

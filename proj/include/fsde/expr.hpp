// Arithmetic expression AST over the variables t, x1..xd: parser, printer
// and evaluator for coefficient fields given as text.
//
// Grammar (binary operators are left-associative, power binds tighter than
// unary minus, the exponent slot admits a leading minus):
//   expr    := term (('+'|'-') term)*
//   term    := unary (('*'|'/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' ['-'] primary)*
//   primary := number | 't' | 'x'<k> | fn '(' expr [',' expr] ')' | '(' expr ')'
//   fn      := sin | cos | exp | tanh | abs | min | max
#pragma once

#include <cctype>
#include <cmath>
#include <cstddef>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fsde {

enum class ExprKind {
  constant, var_t, var_x,
  add, sub, mul, div, pow, neg,
  sin, cos, exp, tanh, abs, min, max,
};

struct Expr {
  ExprKind kind = ExprKind::constant;
  double value = 0.0;   // constant
  int var_index = 0;    // var_x: zero-based component
  std::vector<Expr> kids;

  static Expr constant(double v) { return {ExprKind::constant, v, 0, {}}; }
  static Expr t() { return {ExprKind::var_t, 0.0, 0, {}}; }
  static Expr x(int i) { return {ExprKind::var_x, 0.0, i, {}}; }
  static Expr unary(ExprKind k, Expr a) { return {k, 0.0, 0, {std::move(a)}}; }
  static Expr binary(ExprKind k, Expr a, Expr b) {
    return {k, 0.0, 0, {std::move(a), std::move(b)}};
  }

  bool operator==(const Expr& o) const {
    if (kind != o.kind || kids.size() != o.kids.size()) return false;
    if (kind == ExprKind::constant && value != o.value) return false;
    if (kind == ExprKind::var_x && var_index != o.var_index) return false;
    for (std::size_t i = 0; i < kids.size(); ++i)
      if (!(kids[i] == o.kids[i])) return false;
    return true;
  }
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t offset, const std::string& expected, const std::string& found)
      : std::runtime_error("syntax error at offset " + std::to_string(offset) + ": expected " +
                           expected + ", found " + found),
        offset(offset), expected(expected) {}
  std::size_t offset;
  std::string expected;
};

class EvalError : public std::runtime_error {
 public:
  explicit EvalError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

class ExprParser {
 public:
  explicit ExprParser(const std::string& text) : s_(text) {}

  Expr parse() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError(pos_, "an expression", "end of input");
    Expr e = parse_expr();
    skip_ws();
    if (pos_ < s_.size()) throw ParseError(pos_, "end of input", token_preview());
    return e;
  }

 private:
  Expr parse_expr() {
    Expr lhs = parse_term();
    while (true) {
      skip_ws();
      if (accept('+')) lhs = Expr::binary(ExprKind::add, std::move(lhs), parse_term());
      else if (accept('-')) lhs = Expr::binary(ExprKind::sub, std::move(lhs), parse_term());
      else return lhs;
    }
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    while (true) {
      skip_ws();
      if (accept('*')) lhs = Expr::binary(ExprKind::mul, std::move(lhs), parse_unary());
      else if (accept('/')) lhs = Expr::binary(ExprKind::div, std::move(lhs), parse_unary());
      else return lhs;
    }
  }

  Expr parse_unary() {
    skip_ws();
    if (accept('-')) return Expr::unary(ExprKind::neg, parse_unary());
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_primary();
    while (true) {
      skip_ws();
      if (!accept('^')) return base;
      skip_ws();
      bool negexp = accept('-');
      Expr e = parse_primary();
      if (negexp) e = Expr::unary(ExprKind::neg, std::move(e));
      base = Expr::binary(ExprKind::pow, std::move(base), std::move(e));
    }
  }

  Expr parse_primary() {
    skip_ws();
    if (pos_ >= s_.size()) throw ParseError(pos_, "a number, variable, function or '('", "end of input");
    char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      Expr e = parse_expr();
      expect(')');
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c))) return parse_word();
    throw ParseError(pos_, "a number, variable, function or '('", token_preview());
  }

  Expr parse_number() {
    const char* begin = s_.c_str() + pos_;
    char* end = nullptr;
    double v = std::strtod(begin, &end);
    if (end == begin) throw ParseError(pos_, "a number", token_preview());
    pos_ += static_cast<std::size_t>(end - begin);
    return Expr::constant(v);
  }

  Expr parse_word() {
    std::size_t start = pos_;
    while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
      ++pos_;
    std::string w = s_.substr(start, pos_ - start);
    if (w == "t") return Expr::t();
    if (w.size() >= 2 && w[0] == 'x') {
      bool digits = true;
      for (std::size_t i = 1; i < w.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(w[i]))) digits = false;
      if (digits) {
        int idx = std::stoi(w.substr(1));
        if (idx < 1) throw ParseError(start, "variable index >= 1", w);
        return Expr::x(idx - 1);
      }
    }
    auto fn1 = [&](ExprKind k) {
      expect('(');
      Expr a = parse_expr();
      expect(')');
      return Expr::unary(k, std::move(a));
    };
    auto fn2 = [&](ExprKind k) {
      expect('(');
      Expr a = parse_expr();
      expect(',');
      Expr b = parse_expr();
      expect(')');
      return Expr::binary(k, std::move(a), std::move(b));
    };
    if (w == "sin") return fn1(ExprKind::sin);
    if (w == "cos") return fn1(ExprKind::cos);
    if (w == "exp") return fn1(ExprKind::exp);
    if (w == "tanh") return fn1(ExprKind::tanh);
    if (w == "abs") return fn1(ExprKind::abs);
    if (w == "min") return fn2(ExprKind::min);
    if (w == "max") return fn2(ExprKind::max);
    throw ParseError(start, "a variable (t, x1..xd) or function name", w);
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    if (pos_ < s_.size() && s_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    skip_ws();
    if (!accept(c)) throw ParseError(pos_, std::string("'") + c + "'", token_preview());
  }

  std::string token_preview() const {
    if (pos_ >= s_.size()) return "end of input";
    return "'" + s_.substr(pos_, std::min<std::size_t>(8, s_.size() - pos_)) + "'";
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

inline int precedence(ExprKind k) {
  switch (k) {
    case ExprKind::add: case ExprKind::sub: return 1;
    case ExprKind::mul: case ExprKind::div: return 2;
    case ExprKind::neg: return 3;
    case ExprKind::pow: return 4;
    default: return 5;
  }
}

inline void print_expr(std::ostream& os, const Expr& e, int parent_prec, bool right_side) {
  const int prec = precedence(e.kind);
  const bool needs_paren =
      prec < parent_prec || (prec == parent_prec && right_side && prec >= 1 && prec <= 4);
  if (needs_paren) os << "(";
  switch (e.kind) {
    case ExprKind::constant: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.17g", e.value);
      os << buf;
      break;
    }
    case ExprKind::var_t: os << "t"; break;
    case ExprKind::var_x: os << "x" << (e.var_index + 1); break;
    case ExprKind::neg:
      os << "-";
      print_expr(os, e.kids[0], precedence(ExprKind::neg), true);
      break;
    case ExprKind::add: case ExprKind::sub: case ExprKind::mul:
    case ExprKind::div: case ExprKind::pow: {
      const char* op = e.kind == ExprKind::add   ? " + "
                       : e.kind == ExprKind::sub ? " - "
                       : e.kind == ExprKind::mul ? "*"
                       : e.kind == ExprKind::div ? "/"
                                                 : "^";
      print_expr(os, e.kids[0], prec, false);
      os << op;
      print_expr(os, e.kids[1], prec, true);
      break;
    }
    case ExprKind::sin: case ExprKind::cos: case ExprKind::exp:
    case ExprKind::tanh: case ExprKind::abs: {
      const char* fn = e.kind == ExprKind::sin    ? "sin"
                       : e.kind == ExprKind::cos  ? "cos"
                       : e.kind == ExprKind::exp  ? "exp"
                       : e.kind == ExprKind::tanh ? "tanh"
                                                  : "abs";
      os << fn << "(";
      print_expr(os, e.kids[0], 0, false);
      os << ")";
      break;
    }
    case ExprKind::min: case ExprKind::max:
      os << (e.kind == ExprKind::min ? "min(" : "max(");
      print_expr(os, e.kids[0], 0, false);
      os << ", ";
      print_expr(os, e.kids[1], 0, false);
      os << ")";
      break;
  }
  if (needs_paren) os << ")";
}

}  // namespace detail

inline Expr parse_expression(const std::string& text) {
  if (text.empty()) throw std::invalid_argument("parse_expression: empty input");
  return detail::ExprParser(text).parse();
}

inline std::string print_expression(const Expr& e) {
  std::ostringstream os;
  detail::print_expr(os, e, 0, false);
  return os.str();
}

// Evaluate at (t, x). Division by zero and non-finite results abort with
// EvalError rather than propagating NaN.
inline double eval_expression(const Expr& e, double t, std::span<const double> x) {
  auto ev = [&](const Expr& sub) { return eval_expression(sub, t, x); };
  double v = 0.0;
  switch (e.kind) {
    case ExprKind::constant: v = e.value; break;
    case ExprKind::var_t: v = t; break;
    case ExprKind::var_x:
      if (e.var_index < 0 || static_cast<std::size_t>(e.var_index) >= x.size())
        throw EvalError("variable x" + std::to_string(e.var_index + 1) +
                        " out of range for dimension " + std::to_string(x.size()));
      v = x[e.var_index];
      break;
    case ExprKind::add: v = ev(e.kids[0]) + ev(e.kids[1]); break;
    case ExprKind::sub: v = ev(e.kids[0]) - ev(e.kids[1]); break;
    case ExprKind::mul: v = ev(e.kids[0]) * ev(e.kids[1]); break;
    case ExprKind::div: {
      double num = ev(e.kids[0]), den = ev(e.kids[1]);
      if (den == 0.0) throw EvalError("division by zero in '" + print_expression(e) + "'");
      v = num / den;
      break;
    }
    case ExprKind::pow: v = std::pow(ev(e.kids[0]), ev(e.kids[1])); break;
    case ExprKind::neg: v = -ev(e.kids[0]); break;
    case ExprKind::sin: v = std::sin(ev(e.kids[0])); break;
    case ExprKind::cos: v = std::cos(ev(e.kids[0])); break;
    case ExprKind::exp: v = std::exp(ev(e.kids[0])); break;
    case ExprKind::tanh: v = std::tanh(ev(e.kids[0])); break;
    case ExprKind::abs: v = std::abs(ev(e.kids[0])); break;
    case ExprKind::min: v = std::min(ev(e.kids[0]), ev(e.kids[1])); break;
    case ExprKind::max: v = std::max(ev(e.kids[0]), ev(e.kids[1])); break;
  }
  if (!std::isfinite(v))
    throw EvalError("non-finite value from '" + print_expression(e) + "'");
  return v;
}

}  // namespace fsde

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "fsde/expr.hpp"
#include "fsde/rng.hpp"

using namespace fsde;
using Catch::Approx;

namespace {

double ev(const std::string& text, double t, std::vector<double> x) {
  return eval_expression(parse_expression(text), t, x);
}

// random AST generator for the round-trip property
Expr random_expr(Rng& rng, int depth, int d) {
  const double pick = rng.uniform01();
  if (depth <= 0 || pick < 0.25) {
    const double leaf = rng.uniform01();
    if (leaf < 0.4) return Expr::constant(std::round(rng.uniform01() * 200.0 - 100.0) / 8.0);
    if (leaf < 0.55) return Expr::t();
    return Expr::x(static_cast<int>(rng.uniform01() * d));
  }
  const double op = rng.uniform01();
  if (op < 0.15) return Expr::unary(ExprKind::neg, random_expr(rng, depth - 1, d));
  if (op < 0.25) {
    static const ExprKind fns[] = {ExprKind::sin, ExprKind::cos, ExprKind::exp, ExprKind::tanh,
                                   ExprKind::abs};
    return Expr::unary(fns[static_cast<int>(rng.uniform01() * 5)], random_expr(rng, depth - 1, d));
  }
  if (op < 0.35) {
    return Expr::binary(rng.uniform01() < 0.5 ? ExprKind::min : ExprKind::max,
                        random_expr(rng, depth - 1, d), random_expr(rng, depth - 1, d));
  }
  static const ExprKind bins[] = {ExprKind::add, ExprKind::sub, ExprKind::mul, ExprKind::div,
                                  ExprKind::pow};
  return Expr::binary(bins[static_cast<int>(rng.uniform01() * 5)], random_expr(rng, depth - 1, d),
                      random_expr(rng, depth - 1, d));
}

}  // namespace

TEST_CASE("parse basic structures") {
  Expr e = parse_expression("1 - x1");
  REQUIRE(e.kind == ExprKind::sub);
  CHECK(e.kids[0].kind == ExprKind::constant);
  CHECK(e.kids[0].value == 1.0);
  CHECK(e.kids[1].kind == ExprKind::var_x);
  CHECK(e.kids[1].var_index == 0);

  // sin(0)*3 + 2^2 = 4
  CHECK(ev("sin(t)*x1 + x2^2", 0.0, {3.0, 2.0}) == Approx(4.0));
}

TEST_CASE("syntax errors carry byte offsets") {
  try {
    parse_expression("x1 +");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset == 4);
  }
  try {
    parse_expression("sin(x1");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset == 6);
    CHECK(e.expected.find(")") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_expression("foo(x1)"), ParseError);
  CHECK_THROWS_AS(parse_expression(""), std::invalid_argument);
  CHECK_THROWS_AS(parse_expression("1 + * 2"), ParseError);
}

TEST_CASE("precedence and associativity") {
  CHECK(ev("2 + 3*4", 0, {}) == Approx(14.0));
  CHECK(ev("2*3 + 4", 0, {}) == Approx(10.0));
  CHECK(ev("2 - 3 - 4", 0, {}) == Approx(-5.0));      // left assoc
  CHECK(ev("16/4/2", 0, {}) == Approx(2.0));          // left assoc
  CHECK(ev("2^3^2", 0, {}) == Approx(64.0));          // left assoc power
  CHECK(ev("-x1^2", 0, {3.0}) == Approx(-9.0));       // power binds before unary minus
  CHECK(ev("(-x1)^2", 0, {3.0}) == Approx(9.0));
  CHECK(ev("2^-2", 0, {}) == Approx(0.25));           // signed exponent
  CHECK(ev("min(3, max(1, 2))", 0, {}) == Approx(2.0));
  CHECK(ev("abs(-4.5)", 0, {}) == Approx(4.5));
  CHECK(ev("tanh(0)", 0, {}) == Approx(0.0));
  CHECK(ev("exp(1)", 0, {}) == Approx(std::exp(1.0)));
}

TEST_CASE("evaluation errors") {
  CHECK_THROWS_AS(ev("1/x1", 0.0, {0.0}), EvalError);
  CHECK_THROWS_AS(ev("exp(x1)", 0.0, {1e9}), EvalError);       // overflow to inf
  CHECK_THROWS_AS(ev("x3", 0.0, {1.0, 2.0}), EvalError);       // out of dimension
  CHECK(ev("x1/abs(x1)", 0.0, {-2.0}) == Approx(-1.0));        // sign via abs
  CHECK_THROWS_AS(ev("x1/abs(x1)", 0.0, {0.0}), EvalError);
}

TEST_CASE("print/parse round trip is the identity on random ASTs") {
  Rng rng(2718);
  int checked = 0;
  for (int i = 0; i < 1000; ++i) {
    Expr e = random_expr(rng, 6, 3);
    const std::string text = print_expression(e);
    Expr back = parse_expression(text);
    if (!(back == e)) {
      INFO("printed: " << text);
      REQUIRE(back == e);
    }
    ++checked;
  }
  CHECK(checked == 1000);
}

TEST_CASE("printed text evaluates identically") {
  Rng rng(577);
  for (int i = 0; i < 200; ++i) {
    Expr e = random_expr(rng, 5, 2);
    const std::string text = print_expression(e);
    Expr back = parse_expression(text);
    const double t = rng.uniform01();
    const std::vector<double> x{rng.uniform01() * 2.0 - 1.0, rng.uniform01() * 2.0 - 1.0};
    double v1 = 0, v2 = 0;
    bool err1 = false, err2 = false;
    try { v1 = eval_expression(e, t, x); } catch (const EvalError&) { err1 = true; }
    try { v2 = eval_expression(back, t, x); } catch (const EvalError&) { err2 = true; }
    CHECK(err1 == err2);
    if (!err1) {
      if (v1 == 0.0) CHECK(std::abs(v2) < 1e-300);
      else CHECK(v2 == Approx(v1).epsilon(1e-12));
    }
  }
}

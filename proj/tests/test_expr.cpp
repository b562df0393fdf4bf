#include <catch2/catch_amalgamated.hpp>

#include "csteer/expr.hpp"
#include "csteer/scalar_field.hpp"
#include "support/oracles.hpp"

using namespace csteer;

TEST_CASE("map triple parsing") {
  const auto m = parse_map_source("(x, y, z + 0.2)");
  const Point p{1.5, -2.0, 0.25};
  CHECK(expr_eval(m[0], p) == 1.5);
  CHECK(expr_eval(m[1], p) == -2.0);
  CHECK(expr_eval(m[2], p) == 0.45);
}

TEST_CASE("arity and identifier errors carry positions") {
  CHECK_THROWS_AS(parse_map_source("(x, y)"), ParseError);
  try {
    parse_map_source("(x, y + w, z)");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find('w') != std::string::npos);
    CHECK(e.position == 8);
  }
  CHECK_THROWS_AS(parse_expression("x +"), ParseError);
  CHECK_THROWS_AS(parse_expression("foo(x)"), ParseError);
  CHECK_THROWS_AS(parse_expression("x ^ y"), ParseError);   // exponent must be an integer constant
  CHECK_THROWS_AS(parse_expression("(x"), ParseError);
  CHECK_THROWS_AS(parse_expression("x y"), ParseError);
  CHECK_THROWS_AS(parse_expression("x", "y"), ParseError);  // variable not allowed here
}

TEST_CASE("print-parse is idempotent") {
  const char* sources[] = {
      "x + y * z",         "(x + y) * z",        "-x^2 + 3.5 / (y - 1)",
      "sin(cos(x * y))",   "tanh(z)^3 - exp(x)", "x^-2 * y",
      "1 / (1 + x^2)",     "-(x + y)",           "0.1 * x + 0.25",
  };
  for (const char* s : sources) {
    const Expr e1 = parse_expression(s);
    const std::string p1 = expr_to_string(e1);
    const Expr e2 = parse_expression(p1);
    const std::string p2 = expr_to_string(e2);
    CHECK(p1 == p2);
    for (const Point& p : oracles::random_box_points(10, 1.5, 3))
      CHECK(expr_eval(e1, p) == expr_eval(e2, p));
  }
}

TEST_CASE("symbolic derivatives match finite differences") {
  const char* sources[] = {"sin(x) * z + y^2", "exp(x * y) - tanh(z)", "x^3 / (2 + cos(y))",
                           "x * y * z + x^-1"};
  for (const char* s : sources) {
    const ScalarField f = field_from_source(s);
    for (const Point& p : oracles::random_box_points(15, 0.8, 17)) {
      Point q = p;
      q.x += 1.5;  // keep x^-1 away from the pole
      const Vec3 fd = oracles::fd_gradient(f, q);
      const Vec3 g = f.gradient(q);
      CHECK((g - fd).norm() < 1e-6 * (1.0 + g.norm()));
    }
  }
}

TEST_CASE("power rules") {
  const Expr e = parse_expression("x^0");
  CHECK(expr_eval(e, {7, 0, 0}) == 1.0);
  const Expr d = expr_diff(parse_expression("x^3"), 0);
  CHECK(expr_eval(d, {2, 0, 0}) == 12.0);
  const Expr n = parse_expression("x^-2");
  CHECK(expr_eval(n, {2, 0, 0}) == 0.25);
}

TEST_CASE("one-variable jet generators") {
  const ScalarField1D u = parse_field1d("y^2 / 2");
  CHECK(u.value(3.0) == 4.5);
  CHECK(u.d1(3.0) == 3.0);
  CHECK(u.d2(3.0) == 1.0);
  CHECK_THROWS_AS(parse_field1d("x + y"), ParseError);
}

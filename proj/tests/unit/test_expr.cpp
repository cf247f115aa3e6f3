#include <doctest.h>

#include "bbo/expr.hpp"
#include "test_util.hpp"

using bbo::Expr;
using bbo::Point;

TEST_CASE("arithmetic and precedence") {
  const std::vector<std::string> vars = {"x", "y"};
  Point p = Point::real({2.0, 3.0});
  CHECK(Expr::parse("x + y * 2", vars).eval_numeric(p) == doctest::Approx(8.0));
  CHECK(Expr::parse("(x + y) * 2", vars).eval_numeric(p) == doctest::Approx(10.0));
  CHECK(Expr::parse("x^2 + y^2", vars).eval_numeric(p) == doctest::Approx(13.0));
  CHECK(Expr::parse("2^3^2", vars).eval_numeric(p) == doctest::Approx(512.0));
  CHECK(Expr::parse("-x^2", vars).eval_numeric(p) == doctest::Approx(-4.0));
  CHECK(Expr::parse("max(x, y) - min(x, y)", vars).eval_numeric(p) == doctest::Approx(1.0));
  CHECK(Expr::parse("sqrt(x^2 + y^2)", vars).eval_numeric(p) ==
        doctest::Approx(std::sqrt(13.0)));
}

TEST_CASE("boolean connectives and comparisons") {
  const std::vector<std::string> vars = {"x", "y"};
  Point p = Point::real({0.5, 0.25});
  CHECK(Expr::parse("x^2 + y^2 <= 0.5", vars).eval_bool(p));
  CHECK_FALSE(Expr::parse("x > 1 and y > 0", vars).eval_bool(p));
  CHECK(Expr::parse("x > 1 or y > 0", vars).eval_bool(p));
  CHECK(Expr::parse("not (x > 1)", vars).eval_bool(p));
  CHECK(Expr::parse("x != y && x >= y", vars).eval_bool(p));
}

TEST_CASE("label comparisons") {
  const std::vector<std::string> vars = {"kind", "x"};
  Point p;
  p.coords = {std::string("rbf"), 2.0};
  CHECK(Expr::parse("kind == 'rbf'", vars).eval_bool(p));
  CHECK(Expr::parse("kind != \"poly\"", vars).eval_bool(p));
  CHECK(Expr::parse("kind == 'rbf' and x < 3", vars).eval_bool(p));
  CHECK_FALSE(Expr::parse("kind == 3", vars).eval_bool(p));
}

TEST_CASE("parse errors and unknown variables") {
  const std::vector<std::string> vars = {"x"};
  auto code = [&](const std::string& s) {
    return bbo_test::error_code_of([&] { Expr::parse(s, vars); });
  };
  CHECK(code("x +") == bbo::ErrorCode::MalformedConfig);
  CHECK(code("x + unknown_var") == bbo::ErrorCode::MalformedConfig);
  CHECK(code("frobnicate(x)") == bbo::ErrorCode::MalformedConfig);
  CHECK(code("(x") == bbo::ErrorCode::MalformedConfig);
  CHECK(code("x 1") == bbo::ErrorCode::MalformedConfig);
}

TEST_CASE("evaluation is pure") {
  const std::vector<std::string> vars = {"x"};
  Expr e = Expr::parse("sin(x) * exp(x) + 1", vars);
  Point p = Point::real({0.7});
  const double first = e.eval_numeric(p);
  for (int i = 0; i < 10; ++i) CHECK(e.eval_numeric(p) == first);
}

#include <doctest.h>

#include <cmath>
#include <random>

#include "dimsr/error.hpp"
#include "dimsr/expr.hpp"

using namespace dimsr;

TEST_CASE("parse and print round trip") {
  for (const char* text : {"((s + (v * t)) - (((g * t) * t) / 2))", "(-(G * (m1 / (r * r))))",
                           "sqrt(((2 * m) / (rho * A)))", "(n0 / exp(inv(x)))",
                           "(sin(theta) * ((gamma * cos(theta)) - 1))", "(x^3)", "({2.5} * x)"}) {
    CAPTURE(text);
    Expr e = parse_expr(text);
    CHECK(to_string(e) == text);
    CHECK(parse_expr(to_string(e)) == e);
  }
  CHECK(to_string(parse_expr("a + b * c")) == "(a + (b * c))");
  CHECK(to_string(parse_expr("a - b - c")) == "((a - b) - c)");
  CHECK_THROWS_AS(parse_expr("(a + "), ParseError);
  CHECK_THROWS_AS(parse_expr("foo(x)"), ParseError);
}

TEST_CASE("evaluation and domain errors") {
  Expr e = parse_expr("((s + (v * t)) - (((g * t) * t) / 2))");
  CHECK(eval(e, {{"s", 1.0}, {"v", 2.0}, {"t", 3.0}, {"g", 4.0}}) == doctest::Approx(-11.0));
  CHECK_THROWS_AS(eval(parse_expr("sqrt(x)"), {{"x", -1.0}}), DomainError);
  CHECK_THROWS_AS(eval(parse_expr("(1 / x)"), {{"x", 0.0}}), DomainError);
  CHECK_THROWS_AS(eval(parse_expr("y"), {{"x", 0.0}}), Error);
}

TEST_CASE("compiled programs agree with tree evaluation") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.2, 2.0);
  for (const char* text : {"((a * b) - (c / a))", "(sin(a) * cos((b + c)))", "exp((-(a * a)))",
                           "sqrt(((a * b) + c))", "((a^2) - inv(b))", "log((a + b))",
                           "arcsin((c / 3))", "tan((a / 4))"}) {
    Expr e = parse_expr(text);
    CompiledExpr p(e, {"a", "b", "c"});
    for (int i = 0; i < 20; ++i) {
      double v[3] = {u(gen), u(gen), u(gen)};
      double want = eval(e, {{"a", v[0]}, {"b", v[1]}, {"c", v[2]}});
      CAPTURE(text);
      CHECK(p.eval(v) == doctest::Approx(want).epsilon(1e-14));
      Dual d;
      REQUIRE(p.try_eval_dual(v, 1, d));
      CHECK(d.value == doctest::Approx(want).epsilon(1e-14));
      CHECK(d.deriv == doctest::Approx(eval_dual(e, {{"a", v[0]}, {"b", v[1]}, {"c", v[2]}}, "b").deriv)
                           .epsilon(1e-12));
    }
  }
}

TEST_CASE("forward-mode derivatives match central differences") {
  Expr e = parse_expr("((sin(x) * exp((x / 3))) + (sqrt(x) / ((x^2) + 1)))");
  for (double x : {0.3, 1.0, 2.7}) {
    const double h = 1e-6;
    double fd = (eval(e, {{"x", x + h}}) - eval(e, {{"x", x - h}})) / (2 * h);
    CHECK(eval_dual(e, {{"x", x}}, "x").deriv == doctest::Approx(fd).epsilon(1e-7));
  }
}

TEST_CASE("dimension inference") {
  DimensionMap dims{{"m", parse_dimension("M")}, {"g", parse_dimension("L T^-2")},
                    {"x", parse_dimension("L")}, {"theta", {}}};
  CHECK(infer_dimension(parse_expr("((m * g) * x)"), dims) == parse_dimension("M L^2 T^-2"));
  CHECK(infer_dimension(parse_expr("sqrt((g * x))"), dims) == parse_dimension("L T^-1"));
  CHECK(infer_dimension(parse_expr("(x^-2)"), dims) == parse_dimension("L^-2"));
  CHECK(infer_dimension(parse_expr("(sin(theta) * 2)"), dims).dimensionless());
  CHECK_THROWS_AS(infer_dimension(parse_expr("(m + x)"), dims), DimensionError);
  CHECK_THROWS_AS(infer_dimension(parse_expr("sin(m)"), dims), DimensionError);
}

TEST_CASE("structure helpers") {
  Expr e = parse_expr("(({1} * x) + ({2} * y))");
  CHECK(count_fitted(e) == 2);
  CHECK(free_variables(e) == std::vector<std::string>{"x", "y"});
  std::vector<double> c{3.0, 4.0};
  CHECK(to_string(with_fitted_constants(e, c)) == "(({3} * x) + ({4} * y))");
  CHECK(complexity(parse_expr("(x + 1)")) == 4.0);
  CHECK(complexity(parse_expr("(-x)")) == 3.0);
  CHECK(complexity(parse_expr("({1} * x)")) == 6.0);
  CHECK(node_count(parse_expr("sin((x * y))")) == 4);
  Expr s = substitute(parse_expr("(alpha * alpha)"), {{"alpha", parse_expr("(N / B)")}});
  CHECK(to_string(s) == "((N / B) * (N / B))");
}

TEST_CASE("simplification preserves value") {
  for (const char* text : {"((x * 1) + 0)", "(-(-x))", "((2 * x) * 3)", "((x / x) * y)"}) {
    Expr e = parse_expr(text);
    Expr s = simplify(e);
    CAPTURE(text);
    CHECK(node_count(s) <= node_count(e));
    CHECK(numeric_equivalence(e, s, {{"x", {0.5, 2.0}}, {"y", {0.5, 2.0}}}));
  }
}

TEST_CASE("numeric equivalence") {
  Domain d{{"x", {0.1, 3.0}}, {"y", {0.1, 3.0}}};
  CHECK(numeric_equivalence(parse_expr("((x * x) / ((x * x) + 1))"),
                            parse_expr("(x / (x + inv(x)))"), d));
  CHECK_FALSE(numeric_equivalence(parse_expr("(x * y)"), parse_expr("(x + y)"), d));
  CHECK_FALSE(numeric_equivalence(parse_expr("x"), parse_expr("(x + 1e-3)"), d));
  CHECK_THROWS_AS(numeric_equivalence(parse_expr("z"), parse_expr("z"), d), Error);
}

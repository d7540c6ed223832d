#include <doctest.h>

#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "fronttrack/expr.hpp"
#include "support.hpp"

using namespace fronttrack::dsl;
using fronttrack::CounterRng;

namespace {

bool same_bits(double a, double b) {
  if (std::isnan(a) && std::isnan(b)) return true;
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

std::string random_expr(CounterRng& rng, int depth) {
  if (depth == 0 || rng.uniform() < 0.2) {
    switch (rng.integer(0, 3)) {
      case 0: return "x";
      case 1: return "u";
      case 2: return std::to_string(rng.integer(1, 9));
      default: return std::to_string(rng.uniform(0.1, 3.0));
    }
  }
  const std::string a = random_expr(rng, depth - 1);
  switch (rng.integer(0, 10)) {
    case 0: return "(" + a + ")+(" + random_expr(rng, depth - 1) + ")";
    case 1: return "(" + a + ")-(" + random_expr(rng, depth - 1) + ")";
    case 2: return "(" + a + ")*(" + random_expr(rng, depth - 1) + ")";
    case 3: return "(" + a + ")/(" + random_expr(rng, depth - 1) + ")";
    case 4: return "(" + a + ")^" + std::to_string(rng.integer(0, 4));
    case 5: return "-(" + a + ")";
    case 6: return "sin(" + a + ")";
    case 7: return "cos(" + a + ")";
    case 8: return "tanh(" + a + ")";
    case 9: return "exp(" + a + "/10)";
    default: return "sqrt(" + a + ")";
  }
}

const char* const kCorpus[] = {
    "u^2/2",
    "(1+0.5*sin(x))*u^2/2",
    "(1 + 0.3*cos(2*x)) * (u^2/2 + u^4/12)",
    "exp(0.2*x)*u^2",
    "u^2/2 + tanh(x)*u^4",
    "sqrt(2 + sin(x)) * u^2 / (3 - cos(x))",
    "u^2/(1 + x^2) + u^6",
    "-(-u)^2 * (2 + cos(x*u))",
};

}  // namespace

TEST_CASE("parse builds the expected tree") {
  const FluxExpr e = parse("u^2/2");
  REQUIRE(e.root()->op == Op::div);
  CHECK(e.root()->lhs->op == Op::pow);
  CHECK(e.root()->lhs->exponent == 2);
  CHECK(e.root()->lhs->lhs->op == Op::var_u);
  CHECK(e.root()->rhs->op == Op::constant);
  CHECK(e.root()->rhs->value == 2.0);

  const FluxExpr m = parse("(1+0.5*sin(x))*u^2/2");
  CHECK(m.well_formed());
  CHECK(m.free_variables() == std::set<Variable>{Variable::x, Variable::u});
}

TEST_CASE("parse errors carry offset and expectation") {
  try {
    parse("u +");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.position() == 3);
    CHECK_FALSE(e.expected().empty());
  }
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_AS(parse("u^x"), ParseError);
  CHECK_THROWS_AS(parse("u^1.5"), ParseError);
  CHECK_THROWS_AS(parse("sin u"), ParseError);
  CHECK_THROWS_AS(parse("y*u"), ParseError);
  CHECK_THROWS_AS(parse("(u"), ParseError);
  CHECK_THROWS_AS(parse("u)"), ParseError);
  for (const char* bad : {"u +", "(u", "u)", "2**u", "sin()", "u^"}) {
    try {
      parse(bad);
    } catch (const ParseError& e) {
      CHECK(e.position() <= std::string(bad).size());
    }
  }
}

TEST_CASE("precedence and associativity") {
  CHECK(parse("-u^2").evaluate(0, 3) == -9.0);
  CHECK(parse("2^3^1").evaluate(0, 0) == 8.0);
  CHECK(parse("8/2/2").evaluate(0, 0) == 2.0);
  CHECK(parse("8-2-2").evaluate(0, 0) == 4.0);
  CHECK(parse("2+3*4").evaluate(0, 0) == 14.0);
  CHECK(parse(" ( 2 + 3 ) * 4 ").evaluate(0, 0) == 20.0);
}

TEST_CASE("evaluate examples") {
  CHECK(parse("u^2/2").evaluate(0, 3) == 4.5);
  CHECK(parse("(1+0.5*sin(x))*u^2/2").evaluate(std::numbers::pi / 2, 2) == doctest::Approx(3.0).epsilon(1e-15));
  const EvalResult r = parse("sqrt(u)").evaluate_checked(0, -1);
  CHECK_FALSE(r.ok());
  CHECK(*r.domain_error_node == 0);
  const EvalResult inner = parse("1 + sqrt(u)").evaluate_checked(0, -1);
  REQUIRE_FALSE(inner.ok());
  CHECK(*inner.domain_error_node == 2);
  CHECK(parse("sqrt(u)").evaluate_checked(0, 4).ok());
}

TEST_CASE("differentiate examples") {
  const FluxExpr du = differentiate(parse("u^2/2"), Variable::u);
  for (double u : {-2.0, 0.0, 0.7, 3.0}) CHECK(du.evaluate(0.3, u) == doctest::Approx(u).epsilon(1e-15));

  const FluxExpr dx = differentiate(parse("(1+0.5*sin(x))*u^2/2"), Variable::x);
  for (double x : {-1.0, 0.0, 0.4, 2.0}) {
    for (double u : {-1.5, 0.5, 2.0}) {
      CHECK(dx.evaluate(x, u) == doctest::Approx(0.5 * std::cos(x) * u * u / 2).epsilon(1e-14));
    }
  }
  const FluxExpr zero = differentiate(parse("sin(x)"), Variable::u);
  CHECK(zero.evaluate(1.0, 2.0) == 0.0);
  CHECK(zero.node_count() == 1);
}

TEST_CASE("property: printed form reparses to an identically evaluating tree") {
  CounterRng rng(20261016, 1);
  for (int n = 0; n < 60; ++n) {
    const std::string src = random_expr(rng, 4);
    const FluxExpr e = parse(src);
    const FluxExpr back = parse(e.to_string());
    INFO(src, " -> ", e.to_string());
    for (int i = 0; i < 100; ++i) {
      const double x = rng.uniform(-2, 2);
      const double u = rng.uniform(-2, 2);
      CHECK(same_bits(e.evaluate(x, u), back.evaluate(x, u)));
    }
  }
}

TEST_CASE("property: symbolic derivatives match central differences on the corpus") {
  CounterRng rng(7, 2);
  for (const char* src : kCorpus) {
    const FluxExpr e = parse(src);
    const FluxExpr fu = e.differentiate(Variable::u);
    const FluxExpr fx = e.differentiate(Variable::x);
    const FluxExpr fuu = fu.differentiate(Variable::u);
    INFO(src);
    for (int i = 0; i < 50; ++i) {
      const double x = rng.uniform(-2, 2);
      const double u = rng.uniform(-2, 2);
      const double h = 1e-5;
      CHECK(std::abs(fu.evaluate(x, u) - ft_test::central_difference([&](double v) { return e.evaluate(x, v); }, u, h)) <=
            1e-6);
      CHECK(std::abs(fx.evaluate(x, u) - ft_test::central_difference([&](double v) { return e.evaluate(v, u); }, x, h)) <=
            1e-6);
      CHECK(std::abs(fuu.evaluate(x, u) -
                     ft_test::central_difference([&](double v) { return fu.evaluate(x, v); }, u, h)) <= 1e-6);
    }
  }
}

TEST_CASE("property: random trees differentiate consistently") {
  CounterRng rng(99, 3);
  int compared = 0;
  for (int n = 0; n < 80; ++n) {
    const FluxExpr e = parse(random_expr(rng, 3));
    const FluxExpr fu = e.differentiate(Variable::u);
    for (int i = 0; i < 10; ++i) {
      const double x = rng.uniform(-1, 1);
      const double u = rng.uniform(-1, 1);
      const double h = 1e-6;
      const double fd = ft_test::central_difference([&](double v) { return e.evaluate(x, v); }, u, h);
      const double d = fu.evaluate(x, u);
      // Skip points near singularities (division by ~0, sqrt near 0).
      if (!std::isfinite(fd) || !std::isfinite(d) || std::abs(d) > 1e3) continue;
      const double fd2 = ft_test::central_difference([&](double v) { return e.evaluate(x, v); }, u, 2 * h);
      if (std::abs(fd - fd2) > 1e-6 * (1 + std::abs(fd))) continue;
      CHECK(d == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
      ++compared;
    }
  }
  CHECK(compared > 300);
}

TEST_CASE("constant folding keeps only finite results") {
  CHECK(parse("2*3+1").node_count() == 1);
  CHECK(parse("1/0 + u").evaluate(0, 1) == INFINITY);
  CHECK(parse("u*0").node_count() == 3);
}

#include <doctest.h>

#include <random>
#include <thread>

#include "oracles.hpp"
#include "stransport/expr.hpp"

using namespace stransport;

TEST_CASE("parse and evaluate examples") {
  CHECK(parse("x1^2 + exp(-x2)")(1, 0) == doctest::Approx(2.0));
  CHECK(parse("x1*x2")(3, 2) == 6.0);
  CHECK(parse("exp(x1)")(1, 0) == doctest::Approx(std::exp(1.0)));
  CHECK(parse("x2^(1/2)")(0, 4) == doctest::Approx(2.0));
  for (double x : {-3.0, 0.0, 0.7, 12.5}) CHECK(parse("2*x1 - x1")(x, 1.0) == parse("x1")(x, 1.0));
}

TEST_CASE("precedence and associativity") {
  CHECK(parse("-x1^2")(3, 0) == -9.0);
  CHECK(parse("2^3^2")(0, 0) == 512.0);
  CHECK(parse("8/4/2")(0, 0) == 1.0);
  CHECK(parse("10-4-3")(0, 0) == 3.0);
  CHECK(parse("1+2*3")(0, 0) == 7.0);
  CHECK(parse("pow(x1, 3)")(2, 0) == 8.0);
  CHECK(parse("pi")(0, 0) == doctest::Approx(M_PI));
  CHECK(parse("(x2-0.5)^(1/3)")(0, 0.5 - 0.125) == doctest::Approx(-0.5));
}

TEST_CASE("parse errors carry positions") {
  try {
    parse("x1 + * 2");
    FAIL("no error");
  } catch (const ParseError& e) {
    CHECK(e.position() == 5);
  }
  CHECK_THROWS_AS(parse("foo(x1)"), ParseError);
  CHECK_THROWS_AS(parse("x3"), ParseError);
  CHECK_THROWS_AS(parse(""), ParseError);
  CHECK_THROWS_AS(parse("(x1"), ParseError);
  CHECK_THROWS_AS(parse("x1 x2"), ParseError);
}

TEST_CASE("evaluation faults are errors, never NaN") {
  auto fault = [](const char* text, double x1, double x2) {
    try {
      parse(text)(x1, x2);
    } catch (const EvalError& e) {
      return e.fault();
    }
    FAIL("no error for " << text);
    return EvalFault::NonFinite;
  };
  CHECK(fault("1/x1", 0, 0) == EvalFault::DivisionByZero);
  CHECK(fault("log(x1)", 0, 0) == EvalFault::Domain);
  CHECK(fault("log(x1)", -1, 0) == EvalFault::Domain);
  CHECK(fault("sqrt(x1)", -1, 0) == EvalFault::Domain);
  CHECK(fault("exp(x1)", 1000, 0) == EvalFault::NonFinite);
  try {
    parse("1 + 1/(x1 - x2)")(1, 1);
  } catch (const EvalError& e) {
    CHECK(e.subexpression().find("x1") != std::string::npos);
  }
}

TEST_CASE("derivative examples") {
  const Expr d = parse("x1*x2").derivative(Var::X1);
  for (double x2 : {-1.0, 0.0, 2.5}) CHECK(d(7.0, x2) == x2);
  CHECK(d.str() == "x2");
  CHECK(parse("exp(-x2)").derivative(Var::X2)(0, 0) == doctest::Approx(-1.0));
  const Expr c = parse("x1^3");
  const double fd = oracle::central_difference([&](double t) { return c(t, 0); }, 2.0);
  CHECK(c.derivative(Var::X1)(2, 0) == doctest::Approx(12.0));
  CHECK(std::abs(c.derivative(Var::X1)(2, 0) - fd) < 1e-6);
}

TEST_CASE("abs derivative at 0 is flagged non-smooth") {
  const Expr d = parse("abs(x1)").derivative(Var::X1);
  CHECK(d(2, 0) == 1.0);
  CHECK(d(-2, 0) == -1.0);
  try {
    d(0, 0);
    FAIL("no error");
  } catch (const EvalError& e) {
    CHECK(e.fault() == EvalFault::NonSmooth);
  }
}

namespace {

const char* kCorpus[] = {
    "x1^2 + exp(-x2)",
    "sin(x1)*cos(x2) + x1/(1 + x2^2)",
    "sqrt(1 + x1^2 + x2^2) - log(2 + sin(x1*x2))",
    "exp(0.3*x1 - 0.2*x2)*(x1 - 2*x2)^3",
    "abs(x1 - 0.5) + (x2 + 3)^(1/3)",
    "-x1^2/(3 + cos(x2)) - pow(x2, 2)",
    "2^x1 + x2^-1",
    "(x1*x2 - 1)^(2/3)",
};

}  // namespace

TEST_CASE("symbolic derivatives match central differences at 100 random points") {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> dist(0.6, 1.9);
  for (const char* text : kCorpus) {
    const Expr e = parse(text);
    for (Var v : {Var::X1, Var::X2}) {
      const Expr d = e.derivative(v);
      for (int k = 0; k < 100; ++k) {
        const double x1 = dist(gen);
        const double x2 = dist(gen);
        const double fd = oracle::central_difference(
            [&](double t) { return v == Var::X1 ? e(t, x2) : e(x1, t); }, v == Var::X1 ? x1 : x2);
        INFO(text << " at (" << x1 << ", " << x2 << ")");
        CHECK(std::abs(d(x1, x2) - fd) <= 1e-6 * (1.0 + std::abs(fd)));
      }
    }
  }
}

TEST_CASE("print then parse round trip at 100 random points") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> dist(0.6, 1.9);
  for (const char* text : kCorpus) {
    const Expr e = parse(text);
    const Expr back = parse(e.str());
    CHECK(parse(back.str()).str() == back.str());
    for (int k = 0; k < 100; ++k) {
      const double x1 = dist(gen);
      const double x2 = dist(gen);
      CHECK(back(x1, x2) == e(x1, x2));
    }
  }
}

TEST_CASE("building expressions with operators") {
  const Expr x1 = Expr::variable(Var::X1);
  const Expr x2 = Expr::variable(Var::X2);
  const Expr e = 2.0 * x1 * x2 - exp(x1) / (1.0 + x2) + pow(x2, Expr(2.0));
  CHECK(e(1, 2) == doctest::Approx(4.0 - std::exp(1.0) / 3.0 + 4.0));
  CHECK(parse(e.str())(1, 2) == e(1, 2));
  CHECK(Expr(3.0).is_constant());
  CHECK(!e.is_constant());
  CHECK(parse("x2*0 + 1").depends_on(Var::X2));
}

TEST_CASE("concurrent evaluation of a shared expression") {
  const Expr e = parse("sin(x1)*exp(x2)");
  std::vector<double> out(8);
  std::vector<std::thread> ts;
  for (std::size_t k = 0; k < out.size(); ++k)
    ts.emplace_back([&, k] {
      double acc = 0.0;
      for (int i = 0; i < 1000; ++i) acc += e(0.001 * i, 0.5);
      out[k] = acc;
    });
  for (auto& t : ts) t.join();
  for (double v : out) CHECK(v == out[0]);
}

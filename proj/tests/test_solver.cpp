#include <doctest.h>

#include "oracles.hpp"
#include "stransport/fixtures.hpp"
#include "stransport/norm.hpp"
#include "stransport/solver.hpp"

using namespace stransport;

namespace {

double max_node_error(const GridField& f, const std::function<double(double, double)>& exact) {
  const SliceGrid& g = f.grid();
  double e = 0.0;
  for (int j = 0; j < g.N(); ++j)
    for (int i = 0; i < g.M(); ++i) e = std::max(e, std::abs(f.node(j, i) - exact(g.x1(j, i), g.x2(j))));
  return e;
}

}  // namespace

TEST_CASE("compute_potential examples") {
  const DomainSpec sq = fixtures::unit_square();
  const GridField v1 = compute_potential(certify_velocity(Expr(1.0), sq), sq, 8, 9);
  CHECK(max_node_error(v1, [](double x1, double) { return x1; }) < 1e-15);
  const GridField v2 = compute_potential(certify_velocity(Expr(2.0), sq), sq, 8, 9);
  CHECK(max_node_error(v2, [](double x1, double) { return x1 / 2; }) < 1e-15);

  const DomainSpec lens = fixtures::lens();
  const GridField vl = compute_potential(certify_velocity(Expr(1.0), lens), lens, 16, 17);
  CHECK(max_node_error(vl, [&](double x1, double x2) { return x1 - lens.ux(x2); }) < 1e-14);
  CHECK(vl(0.0, 0.5) == doctest::Approx(0.5).epsilon(1e-3));
  for (int j = 0; j < 16; ++j) CHECK(vl.node(j, 0) == 0.0);
}

TEST_CASE("reduce examples") {
  const DomainSpec sq = fixtures::unit_square();
  const VelocityField one = certify_velocity(Expr(1.0), sq);
  const GridField V1 = compute_potential(one, sq, 8, 33);
  const Reduced zero = reduce(Expr(0.0), one, V1);
  for (double v : zero.H_tilde.values()) CHECK(v == 0.0);
  const Reduced e = reduce(Expr(1.0), one, V1);
  CHECK(max_node_error(e.H_tilde, [](double x1, double) { return std::exp(x1); }) < 1e-14);
  CHECK(e.m1 == 1.0);
  CHECK(e.m2 == doctest::Approx(std::exp(1.0)));

  const VelocityField two = certify_velocity(Expr(2.0), sq);
  const Reduced r = reduce(Expr::parse("x1"), two, compute_potential(two, sq, 8, 33));
  CHECK(max_node_error(r.H_tilde, [](double x1, double) { return x1 / 2 * std::exp(x1 / 2); }) < 1e-14);
}

TEST_CASE("solve: constant solution") {
  for (const DomainSpec& d : {fixtures::lens(), fixtures::quartic_lens(), fixtures::unit_square()}) {
    const VelocityField u = certify_velocity(Expr::parse("2 + sin(x1 + x2)"), d);
    const SolveResult r = solve(Expr(1.5), inflow_data(Expr(1.5), d), u, d, 64, 128);
    CHECK(max_node_error(r.sigma, [](double, double) { return 1.5; }) < 1e-5);
    CHECK(r.m1 > 0.0);
    CHECK(r.m1 <= r.m2);
  }
}

TEST_CASE("solve: closed-form fixtures on the unit square") {
  const DomainSpec sq = fixtures::unit_square();
  const SolveResult a = solve(Expr(0.0), inflow_data(Expr(1.0), sq), certify_velocity(Expr(1.0), sq), sq, 256, 256);
  CHECK(max_node_error(a.sigma, [](double x1, double) { return std::exp(-x1); }) <= 1e-6);
  const SolveResult b = solve(Expr::parse("x1"), inflow_data(Expr(0.0), sq), certify_velocity(Expr(2.0), sq), sq, 256, 256);
  const double err = max_node_error(b.sigma, [](double x1, double) { return oracle::manufactured(x1); });
  CHECK(err <= 1e-6);
  CHECK(b.max_slice_error() == doctest::Approx(err).epsilon(0.2));
}

TEST_CASE("solve: inflow trace, potential and bounds") {
  const DomainSpec lens = fixtures::lens();
  const VelocityField u = certify_velocity(Expr::parse("1 + x1^2/2"), lens);
  const CurveField g = inflow_data(Expr::parse("cos(3*x2)"), lens);
  const SolveResult r = solve(Expr::parse("exp(x2)*cos(x1)"), g, u, lens, 32, 40);
  const SliceGrid& grid = *r.grid;
  double lo = 1e300;
  double hi = 0.0;
  for (int j = 0; j < grid.N(); ++j) {
    CHECK(r.sigma.node(j, 0) == g(grid.x2(j)));
    CHECK(r.sigma_tilde.node(j, 0) == g(grid.x2(j)));
    CHECK(r.V.node(j, 0) == 0.0);
    for (int i = 0; i < grid.M(); ++i) {
      const double w = std::exp(r.V.node(j, i)) / u(grid.x1(j, i), grid.x2(j));
      lo = std::min(lo, w);
      hi = std::max(hi, w);
    }
  }
  CHECK(r.m1 == lo);
  CHECK(r.m2 == hi);
}

TEST_CASE("solve is linear in the data") {
  const DomainSpec d = fixtures::quartic_lens();
  const VelocityField u = certify_velocity(Expr::parse("2 + x1*x2"), d);
  const Expr H1 = Expr::parse("x1^2 + x2");
  const Expr H2 = Expr::parse("exp(-x1)");
  const Expr g1 = Expr::parse("x2");
  const Expr g2 = Expr::parse("1 - x2^2");
  const SolveResult a = solve(H1, inflow_data(g1, d), u, d, 16, 24);
  const SolveResult b = solve(H2, inflow_data(g2, d), u, d, 16, 24);
  const SolveResult c = solve(H1 + H2, inflow_data(g1 + g2, d), u, d, 16, 24);
  for (std::size_t k = 0; k < c.sigma.values().size(); ++k)
    CHECK(std::abs(c.sigma.values()[k] - a.sigma.values()[k] - b.sigma.values()[k]) < 1e-14);
}

TEST_CASE("test functions vanish on the outflow curve") {
  for (const DomainSpec& d : {fixtures::lens(), fixtures::quartic_lens(), fixtures::unit_square()}) {
    const auto phis = default_test_functions(d);
    CHECK(phis.size() == 6);
    for (const TestFunction& t : phis) CHECK(t.vanishes_on_outflow());
  }
  const TestFunction bad = TestFunction::certify(Expr::parse("x1*x2 + 1"), fixtures::unit_square());
  CHECK(!bad.vanishes_on_outflow());
  const DomainSpec sq = fixtures::unit_square();
  const VelocityField u = certify_velocity(Expr(1.0), sq);
  const SolveResult r = solve(Expr(0.0), inflow_data(Expr(1.0), sq), u, sq, 8, 8);
  CHECK_THROWS_AS(weak_residual(r, Expr(0.0), inflow_data(Expr(1.0), sq), u, {bad}), AssumptionError);
}

TEST_CASE("weak residual examples") {
  const DomainSpec sq = fixtures::unit_square();
  const VelocityField u2 = certify_velocity(Expr(2.0), sq);
  const Expr H = Expr::parse("x1");
  const CurveField g = inflow_data(Expr(0.0), sq);
  const std::vector<TestFunction> phi{TestFunction::certify(Expr::parse("(1 - x1)*x2"), sq)};
  const SolveResult r = solve(H, g, u2, sq, 256, 256);
  const WeakResidual w = weak_residual(r, H, g, u2, phi);
  CHECK(w.max_residual <= 1e-4);

  // sigma + 0.1 leaves 0.1 int (phi - 2 phi_x1) = 0.1 int (3 - x1) x2 = 0.125.
  const GridField shifted = map_grid(r.grid, [&](int j, int i, double, double) { return r.sigma.node(j, i) + 0.1; });
  const WeakResidual off = weak_residual(shifted, H, g, u2, phi);
  CHECK(std::abs(off.lhs[0] - off.rhs[0]) == doctest::Approx(0.125).epsilon(1e-3));

  const DomainSpec lens = fixtures::lens();
  const VelocityField u = certify_velocity(Expr(1.7), lens);
  const CurveField c = inflow_data(Expr(0.8), lens);
  const SolveResult k = solve(Expr(0.8), c, u, lens, 64, 64);
  CHECK(weak_residual(k, Expr(0.8), c, u, default_test_functions(lens)).max_residual <= 1e-4);
}

TEST_CASE("weak residual falls under refinement") {
  const DomainSpec lens = fixtures::lens();
  const VelocityField u = certify_velocity(Expr::parse("1 + x1^2/2"), lens);
  const Expr H = Expr::parse("exp(x2)*cos(x1)");
  const CurveField g = inflow_data(Expr::parse("1 + x2"), lens);
  const auto phis = default_test_functions(lens);
  double prev = 1e300;
  for (int n : {32, 64, 128}) {
    const double w = weak_residual(solve(H, g, u, lens, n, n), H, g, u, phis).max_residual;
    CHECK(w < prev / 3.0);
    prev = w;
  }
}

TEST_CASE("norm equivalence under the reduction weight") {
  const DomainSpec lens = fixtures::lens();
  const VelocityField u = certify_velocity(Expr::parse("1 + x1^2/2"), lens);
  const FracParams fp(0.45, 5);
  QuadratureConfig q;
  q.N = 24;
  q.M = 24;
  const SolveResult r = solve(Expr(1.0), inflow_data(Expr(0.0), lens), u, lens, 24, 24);
  for (const char* text : {"1", "x1 + x2", "exp(x1)*sin(3*x2)", "x2^2 - x1*x2"}) {
    const Expr f = Expr::parse(text);
    const GridField weighted = map_grid(r.grid, [&](int j, int i, double x1, double x2) {
      return std::exp(r.V.node(j, i)) / u(x1, x2) * f(x1, x2);
    });
    const GridField plain = map_grid(r.grid, [&](int, int, double x1, double x2) { return f(x1, x2); });
    const double ratio = norm_star(weighted, lens, fp, q) / norm_star(plain, lens, fp, q);
    INFO(text);
    CHECK(ratio >= r.m1 / 2);
    CHECK(ratio <= 2 * r.m2 * (1 + u.lipschitz()));
  }
}

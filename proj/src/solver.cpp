#include "stransport/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stransport/parallel.hpp"

namespace stransport {

double SolveResult::max_slice_error() const {
  double m = 0.0;
  for (double e : slice_error) m = std::max(m, e);
  return m;
}

namespace {

// Running trapezoid sum of f over the nodes x[0..n).
void cumulative_trapezoid(const double* x, const double* f, double* out, int n) {
  out[0] = 0.0;
  for (int i = 1; i < n; ++i) out[i] = out[i - 1] + 0.5 * (x[i] - x[i - 1]) * (f[i] + f[i - 1]);
}

// Trapezoid at step 2h over the even nodes up to the last even index.
double coarse_trapezoid(const double* x, const double* f, int last) {
  double s = 0.0;
  for (int i = 2; i <= last; i += 2) s += (x[i] - x[i - 2]) * (f[i] + f[i - 2]);
  return 0.5 * s;
}

}  // namespace

GridField compute_potential(const VelocityField& u, const std::shared_ptr<const SliceGrid>& grid) {
  const SliceGrid& g = *grid;
  std::vector<double> v(g.size());
  parallel_for(static_cast<std::size_t>(g.N()), [&](std::size_t js) {
    const int j = static_cast<int>(js);
    std::vector<double> x(static_cast<std::size_t>(g.M())), w(x.size());
    for (int i = 0; i < g.M(); ++i) {
      x[static_cast<std::size_t>(i)] = g.x1(j, i);
      w[static_cast<std::size_t>(i)] = 1.0 / u(g.x1(j, i), g.x2(j));
    }
    cumulative_trapezoid(x.data(), w.data(), &v[g.index(j, 0)], g.M());
  });
  return GridField(grid, std::move(v));
}

GridField compute_potential(const VelocityField& u, const DomainSpec& dom, int N, int M) {
  return compute_potential(u, std::make_shared<const SliceGrid>(dom, N, M));
}

Reduced reduce(const ScalarField& H, const VelocityField& u, const GridField& V) {
  const SliceGrid& g = V.grid();
  std::vector<double> ht(g.size());
  std::vector<double> lo(static_cast<std::size_t>(g.N()), std::numeric_limits<double>::infinity());
  std::vector<double> hi(lo.size(), 0.0);
  parallel_for(static_cast<std::size_t>(g.N()), [&](std::size_t js) {
    const int j = static_cast<int>(js);
    for (int i = 0; i < g.M(); ++i) {
      const double x1 = g.x1(j, i);
      const double x2 = g.x2(j);
      const double w = std::exp(V.node(j, i)) / u(x1, x2);
      lo[js] = std::min(lo[js], w);
      hi[js] = std::max(hi[js], w);
      ht[g.index(j, i)] = H(x1, x2) * w;
    }
  });
  return {GridField(V.grid_ptr(), std::move(ht)), *std::min_element(lo.begin(), lo.end()),
          *std::max_element(hi.begin(), hi.end())};
}

SolveResult solve(const ScalarField& H, const CurveField& sigma_in, const VelocityField& u,
                  const DomainSpec& dom, int N, int M) {
  auto grid = std::make_shared<const SliceGrid>(dom, N, M);
  const SliceGrid& g = *grid;
  GridField V = compute_potential(u, grid);
  Reduced red = reduce(H, u, V);

  std::vector<double> st(g.size()), sg(g.size());
  std::vector<double> err(static_cast<std::size_t>(g.N()));
  parallel_for(static_cast<std::size_t>(g.N()), [&](std::size_t js) {
    const int j = static_cast<int>(js);
    const std::size_t base = g.index(j, 0);
    std::vector<double> x(static_cast<std::size_t>(g.M()));
    for (int i = 0; i < g.M(); ++i) x[static_cast<std::size_t>(i)] = g.x1(j, i);
    const double* h = &red.H_tilde.values()[base];
    cumulative_trapezoid(x.data(), h, &st[base], g.M());

    const double g_in = sigma_in(g.x2(j));
    for (int i = 0; i < g.M(); ++i) {
      st[base + static_cast<std::size_t>(i)] += g_in;
      sg[base + static_cast<std::size_t>(i)] =
          i == 0 ? g_in : std::exp(-V.node(j, i)) * st[base + static_cast<std::size_t>(i)];
    }

    const int last = (g.M() - 1) % 2 == 0 ? g.M() - 1 : g.M() - 2;
    if (last >= 2) {
      const double fine = st[base + static_cast<std::size_t>(last)] - g_in;
      const double coarse = coarse_trapezoid(x.data(), h, last);
      err[js] = std::exp(-V.node(j, last)) * std::abs(fine - coarse) / 3.0;
    }
  });

  SolveResult out{grid,
                  GridField(grid, std::move(sg)),
                  std::move(V),
                  GridField(grid, std::move(st)),
                  std::move(red.H_tilde),
                  red.m1,
                  red.m2,
                  std::move(err)};
  return out;
}

TestFunction TestFunction::certify(const Expr& phi, const DomainSpec& dom, int nsamples, double tol) {
  if (nsamples < 2) throw AssumptionError("test function certification needs at least 2 samples");
  double m = 0.0;
  for (int k = 0; k < nsamples; ++k) {
    const double x2 = dom.a() + (dom.b() - dom.a()) * k / (nsamples - 1);
    m = std::max(m, std::abs(phi(dom.ox(x2), x2)));
  }
  return TestFunction(phi, m <= tol, m);
}

std::vector<TestFunction> default_test_functions(const DomainSpec& dom) {
  const Expr x1 = Expr::variable(Var::X1);
  const Expr x2 = Expr::variable(Var::X2);
  const Expr ox(dom.outflow().x1_of_x2());
  const Expr base = ox - x1;
  std::vector<TestFunction> out;
  for (const Expr& q : {Expr(1.0), x1, x2, x1 * x1, x1 * x2, x2 * x2})
    out.push_back(TestFunction::certify(q.is_constant() ? base : base * q, dom));
  return out;
}

WeakResidual weak_residual(const GridField& sigma, const ScalarField& H, const CurveField& sigma_in,
                           const VelocityField& u, const std::vector<TestFunction>& phis) {
  const SliceGrid& g = sigma.grid();
  WeakResidual out;
  for (const TestFunction& tf : phis) {
    if (!tf.vanishes_on_outflow()) {
      std::ostringstream os;
      os << "test function " << tf.phi().str() << " does not vanish on the outflow curve (max "
         << tf.outflow_max() << ")";
      throw AssumptionError(os.str());
    }
    const Expr& phi = tf.phi();
    const Expr dphi = phi.derivative(Var::X1);
    std::vector<double> lrow(static_cast<std::size_t>(g.N())), rrow(lrow.size());
    parallel_for(lrow.size(), [&](std::size_t js) {
      const int j = static_cast<int>(js);
      const double x2 = g.x2(j);
      double l = 0.0;
      double r = 0.0;
      double px = 0.0;
      double pl = 0.0;
      double pr = 0.0;
      for (int i = 0; i < g.M(); ++i) {
        const double x1 = g.x1(j, i);
        const double ph = phi(x1, x2);
        const double lv = sigma.node(j, i) * (ph - u(x1, x2) * dphi(x1, x2) - ph * u.du_dx1()(x1, x2));
        const double rv = H(x1, x2) * ph;
        if (i > 0) {
          l += 0.5 * (x1 - px) * (lv + pl);
          r += 0.5 * (x1 - px) * (rv + pr);
        }
        px = x1;
        pl = lv;
        pr = rv;
      }
      const double xin = g.cut(j).lo;
      r += u(xin, x2) * phi(xin, x2) * sigma_in(x2);
      lrow[js] = l * g.dx2();
      rrow[js] = r * g.dx2();
    });
    double L = 0.0;
    double R = 0.0;
    for (std::size_t k = 0; k < lrow.size(); ++k) {
      L += lrow[k];
      R += rrow[k];
    }
    const double res = std::abs(L - R) / (std::abs(R) + 1.0);
    out.lhs.push_back(L);
    out.rhs.push_back(R);
    out.residual.push_back(res);
    out.max_residual = std::max(out.max_residual, res);
  }
  return out;
}

}  // namespace stransport

#include "stransport/harness.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss.hpp>
#include <cmath>
#include <random>
#include <sstream>

#include "stransport/parallel.hpp"
#include "stransport/solver.hpp"

namespace stransport {

namespace {

template <class F>
double gauss20(F&& f, double lo, double hi) {
  if (hi == lo) return 0.0;
  return boost::math::quadrature::gauss<double, 20>::integrate(f, lo, hi);
}

template <class F>
double gauss4(F&& f, double lo, double hi) {
  if (hi == lo) return 0.0;
  return boost::math::quadrature::gauss<double, 4>::integrate(f, lo, hi);
}

void require_inside(const DomainSpec& dom, double x2, const char* what) {
  if (!(x2 > dom.a() && x2 < dom.b())) {
    std::ostringstream os;
    os << what << " = " << x2 << " outside (" << dom.a() << ", " << dom.b() << ")";
    throw AssumptionError(os.str());
  }
}

}  // namespace

double reduced_value(const ScalarField& H, const CurveField& sigma_in, const DomainSpec& dom,
                     double x1, double x2) {
  return sigma_in(x2) + gauss20([&](double t) { return H(t, x2); }, dom.ux(x2), x1);
}

Decomposition decompose_I(const ScalarField& H, const CurveField& sigma_in, const DomainSpec& dom,
                          double x1, double x2, double h) {
  require_inside(dom, x2, "x2");
  require_inside(dom, x2 + h, "x2 + h");
  const double x2h = x2 + h;
  const double u0 = dom.ux(x2);
  const double uh = dom.ux(x2h);
  if (x1 < std::max(u0, uh) || x1 > std::min(dom.ox(x2), dom.ox(x2h))) {
    std::ostringstream os;
    os << "x1 = " << x1 << " is not inside both cuts at x2 = " << x2 << " and x2 + h = " << x2h;
    throw AssumptionError(os.str());
  }
  Decomposition d;
  d.I0 = sigma_in(x2h) - sigma_in(x2);
  d.interchanged = uh > u0;
  const double lo = std::max(u0, uh);
  d.I1 = gauss20([&](double t) { return H(t, x2h) - H(t, x2); }, lo, x1);
  if (d.interchanged)
    d.I2 = -gauss20([&](double t) { return H(t, x2); }, u0, uh);
  else
    d.I2 = gauss20([&](double t) { return H(t, x2h); }, uh, u0);
  return d;
}

namespace {

TermLevel term_level(const ScalarField& H, const CurveField& sigma_in, const DomainSpec& dom,
                     const FracParams& fp, const QuadratureConfig& quad, double delta) {
  const double p = fp.p();
  const double kexp = -(1.0 + fp.s() * p);
  const double dx2 = (dom.b() - dom.a()) / quad.N;
  std::vector<TermLevel> rows(static_cast<std::size_t>(quad.N));
  parallel_for(rows.size(), [&](std::size_t j) {
    const double x2 = dom.a() + (static_cast<double>(j) + 0.5) * dx2;
    const double u0 = dom.ux(x2);
    const double o0 = dom.ox(x2);
    const double g0 = sigma_in(x2);
    TermLevel& row = rows[j];
    std::vector<double> i1(static_cast<std::size_t>(quad.M));
    detail::for_each_increment(
        quad.h_min, std::min(delta, dom.b() - x2), quad.q, quad.subcells, [&](double h, double w) {
          const double x2h = x2 + h;
          const double uh = dom.ux(x2h);
          const double lo = std::max(u0, uh);
          const double hi = std::min(o0, dom.ox(x2h));
          if (!(hi > lo)) return;
          const double kw = w * dx2 * std::pow(h, kexp);
          const double width = hi - lo;

          const double I0 = sigma_in(x2h) - g0;
          const double I2 = uh > u0 ? -gauss20([&](double t) { return H(t, x2); }, u0, uh)
                                    : gauss20([&](double t) { return H(t, x2h); }, uh, u0);
          auto dH = [&](double t) { return H(t, x2h) - H(t, x2); };
          const double dx1 = width / quad.M;
          double acc = 0.0;
          double prev = lo;
          double sum1 = 0.0;
          for (int i = 0; i < quad.M; ++i) {
            const double x1 = lo + (i + 0.5) * dx1;
            acc += gauss4(dH, prev, x1);
            prev = x1;
            sum1 += detail::powp(std::abs(acc), p);
          }
          row.J0 += kw * width * detail::powp(std::abs(I0), p);
          row.J1 += kw * dx1 * sum1;
          row.J2 += kw * width * detail::powp(std::abs(I2), p);
        });
  });
  TermLevel out;
  out.quad = quad;
  for (const TermLevel& r : rows) {
    out.J0 += r.J0;
    out.J1 += r.J1;
    out.J2 += r.J2;
  }
  return out;
}

std::optional<double> implied(double J, double bound, double p) {
  const double b = detail::powp(bound, p);
  if (!(b > 0.0)) return std::nullopt;
  return J / b;
}

}  // namespace

TermReport term_integrals(const ScalarField& H, const CurveField& sigma_in, const DomainSpec& dom,
                          const FracParams& fp, const QuadratureConfig& quad, bool refine) {
  quad.validate();
  TermReport out;
  out.delta = quad.h_max * (dom.b() - dom.a());
  out.value = term_level(H, sigma_in, dom, fp, quad, out.delta);
  if (refine) out.refined = term_level(H, sigma_in, dom, fp, quad.refined(), out.delta);
  out.sigma_in_norm = boundary_norm(sigma_in, fp, quad, BoundaryMetric::Parameter).norm;
  out.H_seminorm_x2 = seminorm_x2(H, dom, fp, quad);
  out.H_norm_star = norm_star(H, dom, fp, quad);
  out.C0 = implied(out.value.J0, out.sigma_in_norm, fp.p());
  out.C1 = implied(out.value.J1, out.H_seminorm_x2, fp.p());
  out.C2 = implied(out.value.J2, out.H_norm_star, fp.p());
  return out;
}

std::vector<Sample> random_family(std::uint64_t seed, int count) {
  std::mt19937_64 gen(seed);
  auto coef = [&] {
    const double u = static_cast<double>(gen() >> 11) * 0x1.0p-53;
    return std::round((2.0 * u - 1.0) * 1000.0) / 1000.0;
  };
  const Expr x1 = Expr::variable(Var::X1);
  const Expr x2 = Expr::variable(Var::X2);
  std::vector<Sample> out;
  for (int k = 0; k < count; ++k) {
    for (;;) {
      double c[6];
      for (double& v : c) v = coef();
      double d[3];
      for (double& v : d) v = coef();
      const bool zero_h = k % 2 == 0 ? std::all_of(std::begin(c), std::end(c), [](double v) { return v == 0.0; })
                                     : c[0] == 0.0 && c[1] == 0.0;
      const bool zero_g = d[0] == 0.0 && d[1] == 0.0 && d[2] == 0.0;
      if (zero_h && zero_g) continue;
      Expr H = k % 2 == 0 ? Expr(c[0]) + c[1] * x1 + c[2] * x2 + c[3] * x1 * x2 + c[4] * x1 * x1 +
                                c[5] * x2 * x2
                          : Expr(c[0]) + c[1] * exp(c[2] * x1 + c[3] * x2);
      Expr g = Expr(d[0]) + d[1] * x2 + d[2] * x2 * x2;
      out.push_back({std::move(H), std::move(g)});
      break;
    }
  }
  return out;
}

namespace {

EstimateLevel estimate_level(const DomainSpec& dom, const VelocityField& u, const FracParams& fp,
                             const std::vector<Sample>& family, const QuadratureConfig& quad) {
  EstimateLevel out;
  out.N = quad.N;
  out.M = quad.M;
  for (const Sample& smp : family) {
    const CurveField g = inflow_data(smp.sigma_in, dom);
    const SolveResult res = solve(smp.H, g, u, dom, quad.N, quad.M);
    SampleRatio r;
    r.sigma_norm = norm_star(res.sigma, dom, fp, quad);
    r.H_norm = norm_star(smp.H, dom, fp, quad);
    r.sigma_in_norm = boundary_norm(g, fp, quad).norm;
    const double den = r.H_norm + r.sigma_in_norm;
    if (!(den > 0.0)) throw NumericError("estimate sample has zero data norm");
    r.ratio = r.sigma_norm / den;
    if (!std::isfinite(r.ratio)) throw NumericError("estimate ratio is not finite");
    out.C_emp = std::max(out.C_emp, r.ratio);
    out.samples.push_back(r);
  }
  return out;
}

}  // namespace

EstimateReport estimate_constant(const DomainSpec& dom, const VelocityField& u, const FracParams& fp,
                                 const std::vector<Sample>& family, const QuadratureConfig& quad,
                                 EstimateOptions options) {
  if (family.empty()) throw ConfigError("estimate needs a non-empty sample family");
  quad.validate();
  const double r = domain_flatness(analyze_singularities(dom, options.window, options.flatness_samples));
  const FracParams fpr = fp.with_r(r);
  EstimateReport out(fpr);
  out.r = r;
  out.theorem_valid = fpr.theorem_valid();
  if (!out.theorem_valid) {
    std::ostringstream os;
    os << "theorem regime violated: need 1/r > s > 2/p, have r = " << r << ", s = " << fp.s()
       << ", p = " << fp.p();
    if (!options.allow_out_of_regime) throw AssumptionError(os.str());
    out.override_used = true;
    out.warnings.push_back(os.str() + " (override)");
  }
  out.coarse = estimate_level(dom, u, fpr, family, quad);
  if (options.refine) {
    out.fine = estimate_level(dom, u, fpr, family, quad.refined());
    out.drift = std::abs(out.fine->C_emp - out.coarse.C_emp) / out.coarse.C_emp;
  }
  return out;
}

std::string to_string(Verdict v) { return v == Verdict::Convergent ? "convergent" : "divergent"; }

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  if (x.size() < 2) throw NumericError("slope fit needs at least two points");
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    mx += x[k];
    my += y[k];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
  }
  if (!(sxx > 0.0)) throw NumericError("slope fit on coincident abscissae");
  return sxy / sxx;
}

std::vector<double> default_h_min_grid(const DomainSpec& dom, int levels) {
  std::vector<double> out;
  for (int k = 0; k < levels; ++k) out.push_back(std::ldexp(1e-2 * (dom.b() - dom.a()), -k));
  return out;
}

namespace {

// int_lo^hi |ux(x2) - ux(x2 + dir h)|^p h^kexp dh on the graded increment mesh.
double kernel_integral(const DomainSpec& dom, double x2, double dir, double p, double kexp,
                       double lo, double hi, const QuadratureConfig& quad) {
  if (!(hi > lo)) return 0.0;
  const double base = dom.ux(x2);
  double acc = 0.0;
  detail::for_each_increment(lo, hi, quad.q, quad.subcells, [&](double h, double w) {
    acc += w * detail::powp(std::abs(base - dom.ux(x2 + dir * h)), p) * std::pow(h, kexp);
  });
  return acc;
}

}  // namespace

SweepReport sharpness_sweep(const DomainSpec& dom, double p, const std::vector<double>& s_grid,
                            const std::vector<double>& h_min_grid, const QuadratureConfig& quad,
                            double window, int flatness_samples) {
  quad.validate();
  std::vector<SingularityPoint> pts;
  for (const SingularityPoint& pt : analyze_singularities(dom, window, flatness_samples))
    if (pt.side == Side::Inflow) pts.push_back(pt);
  if (pts.empty()) throw AssumptionError("sharpness sweep: no singularity point on the inflow curve");

  SweepReport out;
  out.r = domain_flatness(pts);
  out.epsilon = 1.0 / out.r;
  out.p = p;
  out.delta = quad.h_max * (dom.b() - dom.a());
  out.h_min_grid = h_min_grid;
  std::sort(out.h_min_grid.begin(), out.h_min_grid.end(), std::greater<>());
  if (out.h_min_grid.size() < 3) throw ConfigError("sharpness sweep needs at least three h_min values");
  if (!(out.h_min_grid.back() > 0.0) || !(out.h_min_grid.front() < out.delta))
    throw ConfigError("sharpness sweep needs 0 < h_min < delta");

  const auto& hs = out.h_min_grid;
  out.rows.resize(s_grid.size());
  parallel_for(s_grid.size(), [&](std::size_t k) {
    const double s = s_grid[k];
    const FracParams fp(s, p);
    const double kexp = -(1.0 + s * p);
    SweepRow& row = out.rows[k];
    row.s = s;
    row.predicted = p * (out.epsilon - s);
    row.fitted_slope = std::numeric_limits<double>::infinity();
    for (const SingularityPoint& pt : pts) {
      SweepPoint sp;
      sp.x2 = pt.x2;
      sp.direction = pt.approach == Approach::FromBelow ? -1.0 : 1.0;
      std::vector<double> lx;
      std::vector<double> ly;
      double K = kernel_integral(dom, sp.x2, sp.direction, p, kexp, hs[0], out.delta, quad);
      sp.K.push_back(K);
      for (std::size_t j = 0; j + 1 < hs.size(); ++j) {
        const double D = kernel_integral(dom, sp.x2, sp.direction, p, kexp, hs[j + 1], hs[j], quad);
        K += D;
        sp.K.push_back(K);
        if (D > 0.0) {
          lx.push_back(0.5 * (std::log(hs[j]) + std::log(hs[j + 1])));
          ly.push_back(std::log(D));
        }
      }
      sp.fitted_slope = fit_slope(lx, ly);
      const double range = dom.b() - dom.a();
      for (double o : {0.0, 1e-4, 1e-3, 1e-2}) {
        const double x2 = sp.x2 + sp.direction * o * range;
        const double room = sp.direction > 0 ? dom.b() - x2 : x2 - dom.a();
        sp.offsets.emplace_back(o, kernel_integral(dom, x2, sp.direction, p, kexp, hs.back(),
                                                   std::min(out.delta, room), quad));
      }
      row.fitted_slope = std::min(row.fitted_slope, sp.fitted_slope);
      row.points.push_back(std::move(sp));
    }
    row.verdict = row.fitted_slope > 0.0 ? Verdict::Convergent : Verdict::Divergent;
    row.relative_error = row.predicted != 0.0
                             ? std::abs(row.fitted_slope - row.predicted) / std::abs(row.predicted)
                             : std::abs(row.fitted_slope);
  });
  return out;
}

namespace {

X1Level x1_level(const ScalarField& H, const CurveField& sigma_in, const VelocityField& u,
                 const DomainSpec& dom, const FracParams& fp, const QuadratureConfig& quad) {
  X1Level out;
  out.N = quad.N;
  out.M = quad.M;
  const SolveResult res = solve(H, sigma_in, u, dom, quad.N, quad.M);
  out.sigma_seminorm_x1 = seminorm_x1(res.sigma, dom, fp, quad);
  out.H_norm_star = norm_star(H, dom, fp, quad);
  out.sigma_in_norm = boundary_norm(sigma_in, fp, quad).norm;
  const double den = out.H_norm_star + out.sigma_in_norm;
  out.ratio = den > 0.0 ? out.sigma_seminorm_x1 / den : 0.0;
  return out;
}

}  // namespace

X1Report x1_direction_check(const ScalarField& H, const CurveField& sigma_in,
                            const VelocityField& u, const DomainSpec& dom, const FracParams& fp,
                            const QuadratureConfig& quad, bool refine) {
  quad.validate();
  X1Report out;
  out.coarse = x1_level(H, sigma_in, u, dom, fp, quad);
  if (refine) {
    out.fine = x1_level(H, sigma_in, u, dom, fp, quad.refined());
    if (out.coarse.ratio > 0.0)
      out.drift = std::abs(out.fine->ratio - out.coarse.ratio) / out.coarse.ratio;
  }
  out.finite = std::isfinite(out.coarse.ratio) && (!out.fine || std::isfinite(out.fine->ratio));
  out.homogeneous = out.coarse.H_norm_star == 0.0;
  if (out.homogeneous)
    out.notes.push_back("homogeneous case: H = 0, the denominator is the sigma_in norm alone");
  if (out.coarse.H_norm_star + out.coarse.sigma_in_norm == 0.0)
    out.notes.push_back("zero data: sigma = 0 and the ratio is reported as 0");
  return out;
}

}  // namespace stransport

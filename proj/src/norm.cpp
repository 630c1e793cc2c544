#include "stransport/norm.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <sstream>

#include "stransport/parallel.hpp"

namespace stransport {

FracParams::FracParams(double s, double p, std::optional<double> r) : s_(s), p_(p), r_(r) {
  if (!(s > 0.0 && s < 1.0)) throw ConfigError("fractional order s must lie in (0, 1)");
  if (!(p >= 1.0) || !std::isfinite(p)) throw ConfigError("integrability p must be >= 1");
  if (r && !(*r >= 1.0)) throw ConfigError("flatness exponent r must be >= 1");
}

QuadratureConfig QuadratureConfig::refined() const {
  QuadratureConfig out = *this;
  out.N *= 2;
  out.M *= 2;
  out.h_min *= 0.5;
  return out;
}

void QuadratureConfig::validate() const {
  if (N < 2 || M < 2) throw ConfigError("quadrature needs N >= 2 and M >= 2");
  if (!(h_min > 0.0 && h_min < h_max)) throw ConfigError("quadrature needs 0 < h_min < h_max");
  if (!(q > 0.0 && q < 1.0)) throw ConfigError("grading ratio q must lie in (0, 1)");
  if (subcells < 1) throw ConfigError("quadrature needs at least one sub-cell");
}

namespace detail {

double powp(double x, double p) {
  if (p == 2.0) return x * x;
  if (p == std::floor(p) && p >= 1.0 && p <= 16.0) {
    double r = 1.0;
    double b = x;
    for (auto n = static_cast<unsigned>(p); n != 0; n >>= 1) {
      if (n & 1u) r *= b;
      b *= b;
    }
    return r;
  }
  return std::pow(x, p);
}

}  // namespace detail

namespace {

double sum_in_order(const std::vector<double>& parts) {
  return std::accumulate(parts.begin(), parts.end(), 0.0);
}

}  // namespace

double lp_norm(const ScalarField& f, const DomainSpec& dom, double p, const QuadratureConfig& quad) {
  quad.validate();
  const double dx2 = (dom.b() - dom.a()) / quad.N;
  std::vector<double> rows(static_cast<std::size_t>(quad.N));
  parallel_for(rows.size(), [&](std::size_t j) {
    const double x2 = dom.a() + (static_cast<double>(j) + 0.5) * dx2;
    const Interval c = dom.cut(x2);
    const double dx1 = c.width() / quad.M;
    double acc = 0.0;
    for (int i = 0; i < quad.M; ++i) acc += detail::powp(std::abs(f(c.lo + (i + 0.5) * dx1, x2)), p);
    rows[j] = acc * dx1 * dx2;
  });
  return std::pow(sum_in_order(rows), 1.0 / p);
}

double seminorm_x1(const ScalarField& f, const DomainSpec& dom, const FracParams& fp,
                   const QuadratureConfig& quad) {
  quad.validate();
  const double dx2 = (dom.b() - dom.a()) / quad.N;
  const double sp = fp.s() * fp.p();
  std::vector<double> rows(static_cast<std::size_t>(quad.N));
  parallel_for(rows.size(), [&](std::size_t j) {
    const double x2 = dom.a() + (static_cast<double>(j) + 0.5) * dx2;
    const Interval c = dom.cut(x2);
    auto g = [&](double x1) { return f(x1, x2); };
    rows[j] = dx2 * detail::line_seminorm_p(g, c.lo, c.hi, quad.M, fp.p(), sp, quad);
  });
  return std::pow(sum_in_order(rows), 1.0 / fp.p());
}

double seminorm_x2(const ScalarField& f, const DomainSpec& dom, const FracParams& fp,
                   const QuadratureConfig& quad) {
  quad.validate();
  const double lo = dom.ux_star();
  const double dx1 = (dom.ox_star() - lo) / quad.N;
  const double sp = fp.s() * fp.p();
  std::vector<double> cols(static_cast<std::size_t>(quad.N));
  parallel_for(cols.size(), [&](std::size_t k) {
    const double x1 = lo + (static_cast<double>(k) + 0.5) * dx1;
    const auto cut = dom.vertical_cut(x1);
    if (!cut) {
      cols[k] = 0.0;
      return;
    }
    auto g = [&](double x2) { return f(x1, x2); };
    cols[k] = dx1 * detail::line_seminorm_p(g, cut->lo, cut->hi, quad.M, fp.p(), sp, quad);
  });
  return std::pow(sum_in_order(cols), 1.0 / fp.p());
}

double full_seminorm(const ScalarField& f, const DomainSpec& dom, const FracParams& fp,
                     const QuadratureConfig& quad, std::vector<std::string>* warnings) {
  quad.validate();
  const auto n = static_cast<std::size_t>(quad.N) * static_cast<std::size_t>(quad.M);
  if (n > quad.node_budget && warnings) {
    std::ostringstream os;
    os << "full seminorm uses " << n << " nodes, above the budget of " << quad.node_budget;
    warnings->push_back(os.str());
  }
  std::vector<double> xs(n), ys(n), ws(n), vs(n);
  const double dx2 = (dom.b() - dom.a()) / quad.N;
  for (int j = 0; j < quad.N; ++j) {
    const double x2 = dom.a() + (j + 0.5) * dx2;
    const Interval c = dom.cut(x2);
    const double dx1 = c.width() / quad.M;
    for (int i = 0; i < quad.M; ++i) {
      const auto k = static_cast<std::size_t>(j) * static_cast<std::size_t>(quad.M) +
                     static_cast<std::size_t>(i);
      xs[k] = c.lo + (i + 0.5) * dx1;
      ys[k] = x2;
      ws[k] = dx1 * dx2;
      vs[k] = f(xs[k], x2);
    }
  }
  const double kexp = -(2.0 + fp.s() * fp.p()) / 2.0;
  const double cutoff2 = quad.h_min * quad.h_min;
  std::vector<double> partial(n);
  parallel_for(n, [&](std::size_t a) {
    double acc = 0.0;
    for (std::size_t b = a + 1; b < n; ++b) {
      const double dx = xs[a] - xs[b];
      const double dy = ys[a] - ys[b];
      const double d2 = dx * dx + dy * dy;
      if (d2 < cutoff2) continue;
      const double diff = std::abs(vs[a] - vs[b]);
      if (diff == 0.0) continue;
      acc += ws[b] * detail::powp(diff, fp.p()) * std::pow(d2, kexp);
    }
    partial[a] = 2.0 * ws[a] * acc;
  });
  return std::pow(sum_in_order(partial), 1.0 / fp.p());
}

double norm_star(const ScalarField& f, const DomainSpec& dom, const FracParams& fp,
                 const QuadratureConfig& quad) {
  return lp_norm(f, dom, fp.p(), quad) + seminorm_x1(f, dom, fp, quad) +
         seminorm_x2(f, dom, fp, quad);
}

double norm_full(const ScalarField& f, const DomainSpec& dom, const FracParams& fp,
                 const QuadratureConfig& quad) {
  return lp_norm(f, dom, fp.p(), quad) + full_seminorm(f, dom, fp, quad);
}

namespace {

NormParts parts_at(const ScalarField& f, const DomainSpec& dom, const FracParams& fp,
                   const QuadratureConfig& quad, bool full, std::vector<std::string>* warnings) {
  NormParts out;
  out.lp = lp_norm(f, dom, fp.p(), quad);
  out.seminorm_x1 = seminorm_x1(f, dom, fp, quad);
  out.seminorm_x2 = seminorm_x2(f, dom, fp, quad);
  out.norm_star = out.lp + out.seminorm_x1 + out.seminorm_x2;
  if (full) {
    out.full_seminorm = full_seminorm(f, dom, fp, quad, warnings);
    out.norm_full = out.lp + *out.full_seminorm;
  }
  return out;
}

}  // namespace

NormReport norm_report(const ScalarField& f, const DomainSpec& dom, const FracParams& fp,
                       const QuadratureConfig& quad, NormOptions options) {
  NormReport out;
  out.quad = quad;
  out.value = parts_at(f, dom, fp, quad, options.full, &out.warnings);
  if (options.refine) out.refined = parts_at(f, dom, fp, quad.refined(), options.full, &out.warnings);
  return out;
}

std::string to_string(BoundaryMetric metric) {
  return metric == BoundaryMetric::ArcLength ? "arc_length" : "parameter";
}

namespace {

// Cumulative arc length S(x2) on a mesh of uniform panels whose first and last
// panels are split geometrically toward the endpoints.
struct ArcTable {
  std::vector<double> x2;
  std::vector<double> s;
};

ArcTable tabulate_arc_length(const BoundaryCurve& curve, double a, double b, int panels) {
  constexpr int kSub = 16;
  auto speed = [&](double t) {
    double d = 0.0;
    try {
      d = curve.slope(t);
    } catch (const EvalError&) {
      throw NumericError("arc length: curve slope undefined at interior parameter");
    }
    return std::sqrt(1.0 + d * d);
  };
  auto panel = [&](double lo, double hi, int sub) {
    const double w = (hi - lo) / sub;
    double acc = 0.0;
    for (int k = 0; k < sub; ++k) acc += speed(lo + (k + 0.5) * w);
    return acc * w;
  };

  std::vector<double> breaks;
  const double h = (b - a) / panels;
  // Grade down to offsets that stay resolvable next to both endpoints.
  const double floor = 1e-14 * std::max({1.0, std::abs(a), std::abs(b)});
  int kLevels = 0;
  while (std::ldexp(h, -(kLevels + 1)) > floor) ++kLevels;
  for (int k = kLevels; k >= 1; --k) breaks.push_back(a + std::ldexp(h, -k));
  for (int k = 1; k < panels; ++k) breaks.push_back(a + k * h);
  for (int k = 1; k <= kLevels; ++k) breaks.push_back(b - std::ldexp(h, -k));
  breaks.push_back(b);

  ArcTable t;
  t.x2.push_back(a);
  t.s.push_back(0.0);
  double total = 0.0;
  double coarse_total = 0.0;
  double prev = a;
  double first_cell = 0.0;
  double last_cell = 0.0;
  for (double x : breaks) {
    if (!(x > prev)) continue;
    const double fine = panel(prev, x, kSub);
    coarse_total += panel(prev, x, kSub / 2);
    if (t.x2.size() == 1) first_cell = fine;
    last_cell = fine;
    total += fine;
    t.x2.push_back(x);
    t.s.push_back(total);
    prev = x;
  }
  // A converging endpoint singularity leaves negligible mass in the
  // innermost cells; a log-type divergence does not.
  const double tail = std::max(first_cell, last_cell);
  if (!std::isfinite(total) || tail > 1e-6 * total ||
      std::abs(total - coarse_total) > 1e-3 * total)
    throw NumericError("arc length quadrature failed: x1'(x2) is not integrable to tolerance");
  return t;
}

double invert(const ArcTable& t, double s) {
  auto it = std::upper_bound(t.s.begin(), t.s.end(), s);
  if (it == t.s.begin()) return t.x2.front();
  if (it == t.s.end()) return t.x2.back();
  const auto k = static_cast<std::size_t>(it - t.s.begin());
  const double s0 = t.s[k - 1];
  const double s1 = t.s[k];
  const double w = s1 > s0 ? (s - s0) / (s1 - s0) : 0.0;
  return t.x2[k - 1] + w * (t.x2[k] - t.x2[k - 1]);
}

}  // namespace

double arc_length(const BoundaryCurve& curve, double a, double b) {
  return tabulate_arc_length(curve, a, b, 256).s.back();
}

BoundaryNorm boundary_norm(const CurveField& g, const FracParams& fp, const QuadratureConfig& quad,
                           BoundaryMetric metric) {
  quad.validate();
  const int n = 2 * std::max(quad.N, quad.M);
  const double sp = fp.s() * fp.p();
  BoundaryNorm out;
  out.metric = metric;

  double lo = g.a();
  double hi = g.b();
  std::function<double(double)> along;
  ArcTable table;
  if (metric == BoundaryMetric::ArcLength) {
    table = tabulate_arc_length(g.curve(), g.a(), g.b(), std::max(64, n));
    lo = 0.0;
    hi = table.s.back();
    along = [&](double s) { return g(invert(table, s)); };
  } else {
    along = [&](double x2) { return g(x2); };
  }
  out.length = hi - lo;

  const double dx = (hi - lo) / n;
  double lp = 0.0;
  for (int i = 0; i < n; ++i) lp += detail::powp(std::abs(along(lo + (i + 0.5) * dx)), fp.p());
  out.lp = std::pow(lp * dx, 1.0 / fp.p());
  out.seminorm = std::pow(detail::line_seminorm_p(along, lo, hi, n, fp.p(), sp, quad), 1.0 / fp.p());
  out.norm = out.lp + out.seminorm;
  return out;
}

double sup_norm(const ScalarField& f, const DomainSpec& dom, const QuadratureConfig& quad) {
  if (f.is_grid()) {
    double m = 0.0;
    for (double v : f.grid().values()) m = std::max(m, std::abs(v));
    return m;
  }
  const double dx2 = (dom.b() - dom.a()) / quad.N;
  double m = 0.0;
  for (int j = 0; j < quad.N; ++j) {
    const double x2 = dom.a() + (j + 0.5) * dx2;
    const Interval c = dom.cut(x2);
    for (int i = 0; i <= quad.M; ++i) m = std::max(m, std::abs(f(c.lo + c.width() * i / quad.M, x2)));
  }
  return m;
}

ImbeddingReport imbedding_check(const ScalarField& f, const DomainSpec& dom, const FracParams& fp,
                                const QuadratureConfig& quad) {
  ImbeddingReport out;
  out.sp_gt_2 = fp.sp_gt_2();
  if (!out.sp_gt_2) out.warnings.push_back("s p <= 2: the L_inf imbedding is not asserted");
  out.sup = sup_norm(f, dom, quad);
  out.norm_star = norm_star(f, dom, fp, quad);
  out.ratio = out.norm_star > 0.0 ? out.sup / out.norm_star : 0.0;
  return out;
}

}  // namespace stransport

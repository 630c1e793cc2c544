#include "stransport/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "stransport/field.hpp"

namespace stransport {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Value of an x2-curve at a parameter, stepping inward when the expression is
// singular exactly at a closed endpoint.
double curve_value(const Expr& e, double x2, double a, double b) {
  try {
    return e(0.0, x2);
  } catch (const EvalError&) {
    const double step = 1e-13 * (b - a);
    const double inner = x2 <= a ? x2 + step : (x2 >= b ? x2 - step : x2);
    if (inner == x2) throw;
    return e(0.0, inner);
  }
}

// |x1'(x2)|, with evaluation failures read as a vertical tangent.
double slope_magnitude(const BoundaryCurve& c, double x2) {
  try {
    return std::abs(c.slope(x2));
  } catch (const EvalError&) {
    return kInf;
  }
}

// |x1'| along x0 + dir * span * 2^-k. Divergence means the last values exceed
// the threshold and never decrease.
bool blows_up(const BoundaryCurve& c, double x0, double dir, double span, double threshold) {
  constexpr int kFirst = 2;
  constexpr int kLast = 45;
  constexpr int kTail = 10;
  std::vector<double> mags;
  for (int k = kFirst; k <= kLast; ++k) {
    const double x = x0 + dir * std::ldexp(span, -k);
    if (x == x0) break;
    mags.push_back(slope_magnitude(c, x));
  }
  if (mags.size() < static_cast<std::size_t>(kTail)) return false;
  if (!(mags.back() > threshold)) return false;
  for (std::size_t k = mags.size() - kTail; k + 1 < mags.size(); ++k)
    if (mags[k + 1] < 0.999 * mags[k]) return false;
  return true;
}

std::string where(double x2) {
  std::ostringstream os;
  os << "x2=" << x2;
  return os.str();
}

}  // namespace

std::string to_string(Side side) { return side == Side::Inflow ? "inflow" : "outflow"; }

BoundaryCurve::BoundaryCurve(Side side, Expr x1_of_x2, std::vector<double> interior_tangencies)
    : side_(side),
      x1_of_x2_(std::move(x1_of_x2)),
      derivative_(x1_of_x2_.derivative(Var::X2)),
      interior_tangencies_(std::move(interior_tangencies)) {
  if (x1_of_x2_.depends_on(Var::X1))
    throw AssumptionError(to_string(side) + " curve must be a function of x2 only: " +
                          x1_of_x2_.str());
  std::sort(interior_tangencies_.begin(), interior_tangencies_.end());
}

DomainSpec::DomainSpec(double a, double b, BoundaryCurve inflow, BoundaryCurve outflow,
                       int nsamples)
    : a_(a), b_(b), inflow_(std::move(inflow)), outflow_(std::move(outflow)) {
  if (!(std::isfinite(a) && std::isfinite(b) && a < b))
    throw AssumptionError("domain requires a < b");
  if (inflow_.side() != Side::Inflow || outflow_.side() != Side::Outflow)
    throw AssumptionError("domain requires one inflow and one outflow curve");
  for (double k : inflow_.interior_tangencies())
    if (!(k > a && k < b)) throw AssumptionError("interior tangency outside (a, b)");
  for (double k : outflow_.interior_tangencies())
    if (!(k > a && k < b)) throw AssumptionError("interior tangency outside (a, b)");

  const int n = std::max(nsamples, 16);
  table_x2_.resize(static_cast<std::size_t>(n) + 1);
  table_ux_.resize(table_x2_.size());
  table_ox_.resize(table_x2_.size());
  for (int k = 0; k <= n; ++k) {
    const double x2 = k == n ? b : a + (b - a) * k / n;
    const auto idx = static_cast<std::size_t>(k);
    table_x2_[idx] = x2;
    table_ux_[idx] = ux(x2);
    table_ox_[idx] = ox(x2);
    const double tol = 1e-12 * (1.0 + std::abs(table_ux_[idx]) + std::abs(table_ox_[idx]));
    if (table_ux_[idx] > table_ox_[idx] + tol)
      throw AssumptionError("inflow curve lies right of outflow curve (ux <= ox violated) at " +
                            where(x2));
  }

  // Dense extremes, polished by a ternary search around the best sample.
  auto polish = [&](const std::vector<double>& vals, bool minimize) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < vals.size(); ++k)
      if (minimize ? vals[k] < vals[best] : vals[k] > vals[best]) best = k;
    double lo = table_x2_[best == 0 ? 0 : best - 1];
    double hi = table_x2_[std::min(best + 1, vals.size() - 1)];
    const Expr& e = minimize ? inflow_.x1_of_x2() : outflow_.x1_of_x2();
    auto f = [&](double x) { return minimize ? curve_value(e, x, a_, b_) : -curve_value(e, x, a_, b_); };
    for (int it = 0; it < 100 && hi - lo > 1e-15 * (b_ - a_); ++it) {
      const double m1 = lo + (hi - lo) / 3.0;
      const double m2 = hi - (hi - lo) / 3.0;
      if (f(m1) < f(m2)) hi = m2; else lo = m1;
    }
    const double polished = minimize ? f(0.5 * (lo + hi)) : -f(0.5 * (lo + hi));
    return minimize ? std::min(polished, vals[best]) : std::max(polished, vals[best]);
  };
  ux_star_ = polish(table_ux_, true);
  ox_star_ = polish(table_ox_, false);

  const double tol = 1e-12 * (1.0 + std::abs(ox_star_ - ux_star_));
  const Interval bottom = cut(a);
  const Interval top = cut(b);
  if (bottom.width() > tol) gamma0_.push_back({bottom.lo, bottom.hi, a});
  if (top.width() > tol) gamma0_.push_back({top.lo, top.hi, b});
}

double DomainSpec::ux(double x2) const { return curve_value(inflow_.x1_of_x2(), x2, a_, b_); }

double DomainSpec::ox(double x2) const { return curve_value(outflow_.x1_of_x2(), x2, a_, b_); }

std::optional<Interval> DomainSpec::vertical_cut(double x1) const {
  auto inside_at = [&](double x2) {
    const double lo = ux(x2);
    const double hi = ox(x2);
    return lo <= x1 && x1 <= hi;
  };
  std::vector<Interval> runs;
  bool open = false;
  double start = 0.0;
  for (std::size_t k = 0; k < table_x2_.size(); ++k) {
    const bool in = table_ux_[k] <= x1 && x1 <= table_ox_[k];
    if (in && !open) {
      open = true;
      start = static_cast<double>(k);
    } else if (!in && open) {
      open = false;
      runs.push_back({start, static_cast<double>(k) - 1});
    }
  }
  if (open) runs.push_back({start, static_cast<double>(table_x2_.size() - 1)});
  if (runs.empty()) return std::nullopt;
  if (runs.size() > 1) {
    std::ostringstream os;
    os << "vertical cut at x1=" << x1 << " is not a single interval";
    throw AssumptionError(os.str());
  }

  // Bisect the inside/outside transition between two table parameters.
  auto edge = [&](double inside, double outside) {
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (inside + outside);
      if (mid == inside || mid == outside) break;
      if (inside_at(mid)) inside = mid; else outside = mid;
    }
    return inside;
  };
  const auto first = static_cast<std::size_t>(runs[0].lo);
  const auto last = static_cast<std::size_t>(runs[0].hi);
  const double lo = first == 0 ? a_ : edge(table_x2_[first], table_x2_[first - 1]);
  const double hi = last + 1 == table_x2_.size() ? b_ : edge(table_x2_[last], table_x2_[last + 1]);
  return Interval{lo, hi};
}

Interval slice_interval(const DomainSpec& dom, double x2) {
  if (!(x2 > dom.a() && x2 < dom.b()))
    throw AssumptionError("boundary slice requested: " + where(x2) + " is not inside (a, b)");
  const Interval c = dom.cut(x2);
  if (c.lo > c.hi) throw AssumptionError("empty horizontal cut at " + where(x2));
  return c;
}

BoundaryPartition classify_boundary(const DomainSpec& dom, const VelocityField& u, int nsamples,
                                    double threshold) {
  BoundaryPartition out;
  out.gamma0 = dom.gamma0_segments();
  const double h = (dom.b() - dom.a()) / nsamples;
  for (const BoundaryCurve* c : {&dom.inflow(), &dom.outflow()}) {
    const bool inflow = c->side() == Side::Inflow;
    for (int k = 0; k < nsamples; ++k) {
      const double x2 = dom.a() + (k + 0.5) * h;
      (inflow ? out.inflow_samples : out.outflow_samples)++;
      const double slope_mag = slope_magnitude(*c, x2);
      if (!(slope_mag < threshold)) {
        ++out.tangent_samples;
        continue;
      }
      const double slope = c->slope(x2);
      // Outward normal: (-1, x1') on the left curve, (1, -x1') on the right.
      const double n1 = (inflow ? -1.0 : 1.0) / std::sqrt(1.0 + slope * slope);
      const double d = u((*c)(x2), x2) * n1;
      if (inflow ? d < 0.0 : d > 0.0) {
        (inflow ? out.inflow_verified : out.outflow_verified)++;
      } else {
        out.violations.push_back({c->side(), x2, d});
      }
    }
  }
  out.gamma_s = detect_singularities(dom, threshold, nsamples);
  return out;
}

void require_well_posed(const BoundaryPartition& partition) {
  if (partition.well_posed()) return;
  const auto& v = partition.violations.front();
  std::ostringstream os;
  os << "sign violation on " << to_string(v.side) << " curve at x2=" << v.x2 << ": d=" << v.d
     << " (" << partition.violations.size() << " violations)";
  throw AssumptionError(os.str());
}

std::vector<SingularityPoint> detect_singularities(const DomainSpec& dom, double threshold,
                                                   int nsamples) {
  std::vector<SingularityPoint> out;
  const double a = dom.a();
  const double b = dom.b();
  const double span = b - a;

  for (const BoundaryCurve* c : {&dom.inflow(), &dom.outflow()}) {
    std::vector<double> params;
    std::vector<Approach> approaches;
    auto add = [&](double x2, Approach ap) {
      for (double p : params)
        if (std::abs(p - x2) <= 1e-6 * span) return;
      params.push_back(x2);
      approaches.push_back(ap);
    };

    if (blows_up(*c, a, 1.0, span, threshold)) add(a, Approach::FromAbove);
    if (blows_up(*c, b, -1.0, span, threshold)) add(b, Approach::FromBelow);
    for (double k : c->interior_tangencies()) {
      const double half = std::min(k - a, b - k);
      if (blows_up(*c, k, 1.0, half, threshold) || blows_up(*c, k, -1.0, half, threshold))
        add(k, Approach::BothSides);
    }

    // Scan for interior local maxima of |x1'| and zoom in on each one.
    const int n = std::max(nsamples, 8);
    const double h = span / n;
    std::vector<double> mags(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      const double x2 = a + (k + 0.5) * h;
      (void)(*c)(x2);  // the curve itself must evaluate; its slope may not
      mags[static_cast<std::size_t>(k)] = slope_magnitude(*c, x2);
    }
    for (int k = 2; k + 2 < n; ++k) {
      const auto i = static_cast<std::size_t>(k);
      if (!(mags[i] > mags[i - 1] && mags[i] >= mags[i + 1])) continue;
      double lo = a + (k - 0.5) * h;
      double hi = a + (k + 1.5) * h;
      double best_x = a + (k + 0.5) * h;
      double best = mags[i];
      bool growing = true;
      for (int it = 0; it < 40 && growing; ++it) {
        constexpr int kPts = 21;
        double level_best = -1.0;
        double level_x = best_x;
        for (int m = 0; m < kPts; ++m) {
          const double x = lo + (hi - lo) * m / (kPts - 1);
          const double v = slope_magnitude(*c, x);
          if (v > level_best) {
            level_best = v;
            level_x = x;
          }
        }
        if (!std::isfinite(level_best)) {
          best = level_best;
          best_x = level_x;
          break;
        }
        growing = level_best > best * (1.0 + 1e-9);
        best = std::max(best, level_best);
        best_x = level_x;
        const double w = (hi - lo) / (kPts - 1);
        lo = std::max(a, level_x - w);
        hi = std::min(b, level_x + w);
        if (hi - lo < 1e-14 * span) break;
      }
      if (best > threshold) add(best_x, Approach::BothSides);
    }

    for (std::size_t k = 0; k < params.size(); ++k) {
      const double x2 = params[k];
      out.push_back({curve_value(c->x1_of_x2(), x2, a, b), x2, c->side(), approaches[k],
                     std::nullopt});
    }
  }
  return out;
}

SingularityPoint estimate_flatness(const DomainSpec& dom, const BoundaryCurve& curve,
                                   SingularityPoint pt, double window, int nsamples) {
  const double a = dom.a();
  const double b = dom.b();
  const double k0 = pt.x2;
  if (!(window > 0.0) || nsamples < 3) throw AssumptionError("flatness fit needs window > 0 and >= 3 samples");

  std::vector<double> dirs;
  if (pt.approach != Approach::FromBelow) dirs.push_back(1.0);
  if (pt.approach != Approach::FromAbove) dirs.push_back(-1.0);

  const double x1_pt = curve_value(curve.x1_of_x2(), k0, a, b);
  std::vector<double> log_dx1;
  std::vector<double> log_dx2;
  bool any_tangent = false;
  double first_offset = -1.0;
  bool all_equal = true;

  for (double dir : dirs) {
    const double room = dir > 0 ? b - k0 : k0 - a;
    if (!(room > 0.0)) continue;
    if (!blows_up(curve, k0, dir, room, kDefaultTangencyThreshold)) continue;
    any_tangent = true;

    auto offset = [&](double t) {
      return std::abs(curve_value(curve.x1_of_x2(), k0 + dir * t, a, b) - x1_pt);
    };
    // Geometric parameter scan: offsets must grow with t inside the window.
    constexpr int kScan = 160;
    std::vector<double> ts(kScan);
    std::vector<double> gs(kScan);
    for (int j = 0; j < kScan; ++j) {
      ts[static_cast<std::size_t>(j)] = std::ldexp(room, -j / 2) * (j % 2 ? std::sqrt(0.5) : 1.0);
      gs[static_cast<std::size_t>(j)] = offset(ts[static_cast<std::size_t>(j)]);
    }
    // Only the tail below 2 * window belongs to the local branch; the curve
    // may come back toward x1(pt) far away (a closed lens does).
    std::size_t tail = 0;
    for (std::size_t j = 0; j < ts.size(); ++j)
      if (gs[j] > 2.0 * window) tail = j + 1;
    for (std::size_t i = tail; i + 1 < ts.size(); ++i) {
      if (gs[i + 1] > gs[i] * (1.0 + 1e-9) + 1e-300) {
        std::ostringstream os;
        os << "non-monotone local inversion near x2=" << k0 << " on " << to_string(curve.side())
           << " curve";
        throw AssumptionError(os.str());
      }
    }

    const double resolution = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(k0);
    for (int k = 0; k < nsamples; ++k) {
      const double target = std::ldexp(window, -k);
      std::size_t hi_idx = kScan;
      for (std::size_t j = tail > 0 ? tail - 1 : 0; j + 1 < ts.size(); ++j) {
        if (gs[j] >= target && gs[j + 1] <= target) {
          hi_idx = j;
          break;
        }
      }
      if (hi_idx == kScan) continue;
      double t_hi = ts[hi_idx];
      double t_lo = ts[hi_idx + 1];
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (t_lo + t_hi);
        if (mid == t_lo || mid == t_hi) break;
        if (offset(mid) < target) t_lo = mid; else t_hi = mid;
      }
      const double t = 0.5 * (t_lo + t_hi);
      if (t < resolution) continue;
      if (first_offset < 0.0) first_offset = t;
      else if (t != first_offset) all_equal = false;
      log_dx1.push_back(std::log(target));
      log_dx2.push_back(std::log(t));
    }
  }

  if (!any_tangent) {
    std::ostringstream os;
    os << "precondition violated: no vertical tangent at x2=" << k0 << " on "
       << to_string(curve.side()) << " curve";
    throw AssumptionError(os.str());
  }
  if (log_dx1.size() < 3 || all_equal)
    throw AssumptionError("degenerate flatness window: samples do not resolve a power law");

  const double n = static_cast<double>(log_dx1.size());
  double mx = 0, my = 0;
  for (std::size_t k = 0; k < log_dx1.size(); ++k) {
    mx += log_dx1[k];
    my += log_dx2[k];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < log_dx1.size(); ++k) {
    sxx += (log_dx1[k] - mx) * (log_dx1[k] - mx);
    sxy += (log_dx1[k] - mx) * (log_dx2[k] - my);
  }
  if (!(sxx > 0.0)) throw AssumptionError("degenerate flatness window: all samples identical");
  const double r = sxy / sxx;
  const double log_c = my - r * mx;
  double worst = 0.0;
  for (std::size_t k = 0; k < log_dx1.size(); ++k)
    worst = std::max(worst, std::abs(log_dx2[k] - (log_c + r * log_dx1[k])));

  pt.flatness = Flatness{r, std::exp(log_c), worst, static_cast<int>(log_dx1.size())};
  return pt;
}

std::vector<SingularityPoint> analyze_singularities(const DomainSpec& dom, double window,
                                                    int nsamples) {
  auto points = detect_singularities(dom);
  for (auto& pt : points) {
    const BoundaryCurve& c = pt.side == Side::Inflow ? dom.inflow() : dom.outflow();
    pt = estimate_flatness(dom, c, pt, window, nsamples);
  }
  return points;
}

double domain_flatness(const std::vector<SingularityPoint>& points) {
  double r = 1.0;
  for (const auto& pt : points)
    if (pt.flatness) r = std::max(r, pt.flatness->r);
  return r;
}

LowerBound verify_analytic_lower_bound(const Expr& f, std::optional<int> order, double window,
                                       int nsamples, int max_order) {
  constexpr double kVanish = 1e-10;
  if (!(window > 0.0)) throw AssumptionError("lower bound check needs a positive window");
  const double f0 = f(0.0, 0.0);
  Expr d = f.derivative(Var::X1);
  const double f1 = d(0.0, 0.0);
  if (std::abs(f0) > kVanish || std::abs(f1) > kVanish)
    throw AssumptionError("lower bound check requires f(0) = f'(0) = 0");

  std::vector<double> taylor{f0, f1};
  int first = 0;
  for (int k = 2; k <= max_order; ++k) {
    d = d.derivative(Var::X1);
    taylor.push_back(d(0.0, 0.0));
    if (std::abs(taylor.back()) > kVanish) {
      first = k;
      break;
    }
  }
  if (first == 0)
    throw AssumptionError("all derivatives up to order " + std::to_string(max_order) +
                          " vanish at 0; f may be flat");

  const int k = order.value_or(first);
  if (k < 2) throw AssumptionError("lower bound order must be at least 2");
  double coeff = 0.0;
  if (k < static_cast<int>(taylor.size())) {
    coeff = taylor[static_cast<std::size_t>(k)];
  } else {
    Expr dk = f;
    for (int m = 0; m < k; ++m) dk = dk.derivative(Var::X1);
    coeff = dk(0.0, 0.0);
  }
  coeff /= std::tgamma(k + 1.0);

  std::vector<double> xs;
  for (int j = 1; j <= nsamples; ++j) {
    const double x = window * j / (nsamples + 1.0);
    xs.push_back(x);
    xs.push_back(-x);
  }
  double M = 0.0;
  for (double x : xs) M = std::max(M, std::abs(f(x, 0.0) - coeff * std::pow(x, k)) / std::pow(std::abs(x), k + 1));
  const double C = std::abs(coeff) - M * window;
  bool holds = C > 0.0;
  for (double x : xs)
    if (holds && std::abs(f(x, 0.0)) < C * std::pow(std::abs(x), k) * (1.0 - 1e-12)) holds = false;
  return {first, k, C, M, holds};
}

}  // namespace stransport

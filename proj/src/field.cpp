#include "stransport/field.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

namespace stransport {

SliceGrid::SliceGrid(const DomainSpec& dom, int N, int M)
    : N_(N), M_(M), a_(dom.a()), b_(dom.b()), dom_(std::make_shared<DomainSpec>(dom)) {
  if (N < 2 || M < 2) throw AssumptionError("slice grid needs N >= 2 and M >= 2");
  cuts_.reserve(static_cast<std::size_t>(N));
  for (int j = 0; j < N; ++j) cuts_.push_back(dom_->cut(x2(j)));
}

GridField::GridField(std::shared_ptr<const SliceGrid> grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (values_.size() != grid_->size()) throw NumericError("grid field size mismatch");
}

ClampedValue GridField::sample(double x1, double x2) const {
  const SliceGrid& g = *grid_;
  const double dx2 = g.dx2();
  const double t_raw = (x2 - g.a()) / dx2 - 0.5;
  const double t = std::clamp(t_raw, 0.0, static_cast<double>(g.N() - 1));
  const double clamp_x2 = std::abs(t - t_raw) * dx2;
  const int j = std::min(static_cast<int>(t), g.N() - 2);
  const double wj = t - j;

  const Interval c = g.cut_at(std::clamp(x2, g.a(), g.b()));
  double lambda = 0.0;
  double clamp_x1 = 0.0;
  if (c.width() > 0.0) {
    const double raw = (x1 - c.lo) / c.width();
    lambda = std::clamp(raw, 0.0, 1.0);
    clamp_x1 = std::abs(raw - lambda) * c.width();
  } else {
    clamp_x1 = std::abs(x1 - c.lo);
  }

  double pos = lambda * (g.M() - 1);
  const double nearest = std::round(pos);
  if (std::abs(pos - nearest) < 1e-9) pos = nearest;
  const int i = std::min(static_cast<int>(pos), g.M() - 2);
  const double wi = pos - i;

  auto row = [&](int jj) { return (1.0 - wi) * node(jj, i) + wi * node(jj, i + 1); };
  const double v = wj == 0.0 ? row(j) : (1.0 - wj) * row(j) + wj * row(j + 1);
  return {v, clamp_x1, clamp_x2};
}

double GridField::operator()(double x1, double x2) const {
  const ClampedValue r = sample(x1, x2);
  const SliceGrid& g = *grid_;
  const double cell_x2 = g.dx2();
  // Cells are at most one x1 cell of the widest cut.
  double widest = 0.0;
  for (int j : {0, g.N() / 2, g.N() - 1}) widest = std::max(widest, g.cut(j).width());
  const double cell_x1 = std::max(widest, 1e-300) / (g.M() - 1);
  if (r.clamp_x2 > cell_x2 * (1.0 + 1e-9) || r.clamp_x1 > std::max(cell_x1, 1e-12)) {
    std::ostringstream os;
    os << "grid field queried off the domain at (" << x1 << ", " << x2 << ")";
    throw NumericError(os.str());
  }
  return r.value;
}

void GridField::write_csv(std::ostream& os) const {
  const SliceGrid& g = *grid_;
  const auto old = os.precision(std::numeric_limits<double>::max_digits10);
  os << "x2,x1,value\n";
  for (int j = 0; j < g.N(); ++j)
    for (int i = 0; i < g.M(); ++i) os << g.x2(j) << ',' << g.x1(j, i) << ',' << node(j, i) << '\n';
  os.precision(old);
}

double CurveField::operator()(double x2) const {
  double x1 = 0.0;
  try {
    x1 = curve_(x2);
  } catch (const EvalError&) {
    const double step = 1e-13 * (b_ - a_);
    const double inner = x2 <= a_ ? x2 + step : x2 - step;
    x1 = curve_(inner);
  }
  return expr_(x1, x2);
}

VelocityField certify_velocity(const Expr& u, const DomainSpec& dom, int nsamples) {
  if (nsamples < 2) throw AssumptionError("velocity certification needs at least 2 samples");
  VelocityField v;
  v.u_ = u;
  v.du_dx1_ = u.derivative(Var::X1);
  const Expr du_dx2 = u.derivative(Var::X2);

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double lip = 0.0;
  double spacing = 0.0;
  const double dx2 = (dom.b() - dom.a()) / (nsamples - 1);
  for (int j = 0; j < nsamples; ++j) {
    const double x2 = j == nsamples - 1 ? dom.b() : dom.a() + j * dx2;
    const Interval c = dom.cut(x2);
    const double dx1 = c.width() / (nsamples - 1);
    spacing = std::max(spacing, std::hypot(dx1, dx2));
    for (int i = 0; i < nsamples; ++i) {
      const double x1 = i == nsamples - 1 ? c.hi : c.lo + i * dx1;
      const double val = u(x1, x2);
      lo = std::min(lo, val);
      hi = std::max(hi, val);
      try {
        lip = std::max(lip, std::hypot(v.du_dx1_(x1, x2), du_dx2(x1, x2)));
      } catch (const EvalError&) {
        // u may have a kink at a sample; the margin then rests on its neighbours.
      }
    }
  }
  v.sampled_min_ = lo;
  v.sampled_max_ = hi;
  v.lipschitz_ = lip;
  v.margin_ = 0.5 * lip * spacing;
  v.lower_bound_ = lo - v.margin_;
  if (!(v.lower_bound_ > 0.0)) {
    std::ostringstream os;
    os << "velocity lower bound " << v.lower_bound_ << " <= 0 (sampled min " << lo
       << ", margin " << v.margin_ << "); u >= c > 0 is required";
    throw AssumptionError(os.str());
  }
  return v;
}

GridField sample_field(const Expr& e, const DomainSpec& dom, int N, int M) {
  auto grid = std::make_shared<const SliceGrid>(dom, N, M);
  return map_grid(grid, [&](int, int, double x1, double x2) { return e(x1, x2); });
}

}  // namespace stransport

#pragma once

#include <memory>
#include <ostream>
#include <variant>
#include <vector>

#include "stransport/expr.hpp"
#include "stransport/geometry.hpp"

namespace stransport {

/// Slice-adapted nodes: N horizontal slices at the cell midpoints of
/// [a, b], M nodes spread uniformly over each cut, both cut endpoints
/// included.
class SliceGrid {
 public:
  SliceGrid(const DomainSpec& dom, int N, int M);

  int N() const { return N_; }
  int M() const { return M_; }
  double a() const { return a_; }
  double b() const { return b_; }
  double dx2() const { return (b_ - a_) / N_; }

  double x2(int j) const { return a_ + (j + 0.5) * dx2(); }
  const Interval& cut(int j) const { return cuts_[static_cast<std::size_t>(j)]; }
  double x1(int j, int i) const {
    const auto& c = cut(j);
    return c.lo + c.width() * i / (M_ - 1);
  }

  /// Cut at an arbitrary x2 (closed range).
  Interval cut_at(double x2) const { return dom_->cut(x2); }
  const DomainSpec& domain() const { return *dom_; }

  std::size_t size() const { return static_cast<std::size_t>(N_) * static_cast<std::size_t>(M_); }
  std::size_t index(int j, int i) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(M_) + static_cast<std::size_t>(i);
  }

 private:
  int N_;
  int M_;
  double a_;
  double b_;
  std::shared_ptr<const DomainSpec> dom_;
  std::vector<Interval> cuts_;
};

struct ClampedValue {
  double value;
  double clamp_x1;  ///< distance moved onto the cut
  double clamp_x2;  ///< distance moved into the slice band
};

/// Node values on a SliceGrid with bilinear interpolation in (lambda, x2),
/// lambda = (x1 - ux(x2)) / (ox(x2) - ux(x2)).
class GridField {
 public:
  GridField(std::shared_ptr<const SliceGrid> grid, std::vector<double> values);

  const SliceGrid& grid() const { return *grid_; }
  const std::shared_ptr<const SliceGrid>& grid_ptr() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double node(int j, int i) const { return values_[grid_->index(j, i)]; }

  ClampedValue sample(double x1, double x2) const;

  /// Throws NumericError when the query is more than one cell off the grid.
  double operator()(double x1, double x2) const;

  /// CSV rows "x2,x1,value", slice-major.
  void write_csv(std::ostream& os) const;

 private:
  std::shared_ptr<const SliceGrid> grid_;
  std::vector<double> values_;
};

/// A function on the closed domain, backed by an expression or a grid.
class ScalarField {
 public:
  ScalarField(Expr e) : backing_(std::move(e)) {}              // NOLINT
  ScalarField(GridField g) : backing_(std::move(g)) {}         // NOLINT

  double operator()(double x1, double x2) const {
    if (const auto* e = std::get_if<Expr>(&backing_)) return (*e)(x1, x2);
    return std::get<GridField>(backing_)(x1, x2);
  }

  bool is_grid() const { return std::holds_alternative<GridField>(backing_); }
  const GridField& grid() const { return std::get<GridField>(backing_); }
  const Expr& expr() const { return std::get<Expr>(backing_); }

 private:
  std::variant<Expr, GridField> backing_;
};

/// Data on one boundary curve as a function of the parameter x2: the
/// expression is evaluated at the curve point (x1(x2), x2).
class CurveField {
 public:
  CurveField(Expr e, BoundaryCurve curve, double a, double b)
      : expr_(std::move(e)), curve_(std::move(curve)), a_(a), b_(b) {}

  double operator()(double x2) const;

  const Expr& expr() const { return expr_; }
  const BoundaryCurve& curve() const { return curve_; }
  double a() const { return a_; }
  double b() const { return b_; }

 private:
  Expr expr_;
  BoundaryCurve curve_;
  double a_;
  double b_;
};

/// Inflow data sigma_in on the domain's inflow curve.
inline CurveField inflow_data(const Expr& e, const DomainSpec& dom) {
  return CurveField(e, dom.inflow(), dom.a(), dom.b());
}

/// U = [u, 0] with a sampled positive lower bound. Only certify_velocity
/// creates one, so every consumer holds a certified field.
class VelocityField {
 public:
  const Expr& u() const { return u_; }
  const Expr& du_dx1() const { return du_dx1_; }
  double operator()(double x1, double x2) const { return u_(x1, x2); }

  double lower_bound() const { return lower_bound_; }  ///< certified c
  double sampled_min() const { return sampled_min_; }
  double sampled_max() const { return sampled_max_; }
  double lipschitz() const { return lipschitz_; }
  double margin() const { return margin_; }

 private:
  friend VelocityField certify_velocity(const Expr& u, const DomainSpec& dom, int nsamples);
  VelocityField() = default;

  Expr u_;
  Expr du_dx1_;
  double lower_bound_ = 0.0;
  double sampled_min_ = 0.0;
  double sampled_max_ = 0.0;
  double lipschitz_ = 0.0;
  double margin_ = 0.0;
};

/// c = (sampled min of u) - L * h / 2 on an nsamples x nsamples slice grid
/// including the cut endpoints and x2 = a, b. Throws AssumptionError when
/// c <= 0.
VelocityField certify_velocity(const Expr& u, const DomainSpec& dom, int nsamples = 129);

GridField sample_field(const Expr& e, const DomainSpec& dom, int N, int M);

/// Nodewise map of a function over an existing grid.
template <class F>
GridField map_grid(const std::shared_ptr<const SliceGrid>& grid, F&& f) {
  std::vector<double> v(grid->size());
  for (int j = 0; j < grid->N(); ++j)
    for (int i = 0; i < grid->M(); ++i) v[grid->index(j, i)] = f(j, i, grid->x1(j, i), grid->x2(j));
  return GridField(grid, std::move(v));
}

}  // namespace stransport

#pragma once

// Domains bounded by an inflow graph x1 = ux(x2) on the left and an outflow
// graph x1 = ox(x2) on the right, x2 in [a, b].  With U = [u, 0] and u > 0
// the left curve is inflow (U.n < 0), the right curve is outflow, and the
// horizontal pieces at x2 = a, b carry U.n = 0.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stransport/expr.hpp"

namespace stransport {

class VelocityField;

enum class Side { Inflow, Outflow };

std::string to_string(Side side);

class BoundaryCurve {
 public:
  /// `x1_of_x2` may only depend on x2. Interior tangency parameters are
  /// optional hints for the general multi-singularity case.
  BoundaryCurve(Side side, Expr x1_of_x2, std::vector<double> interior_tangencies = {});

  Side side() const { return side_; }
  const Expr& x1_of_x2() const { return x1_of_x2_; }
  const Expr& derivative() const { return derivative_; }
  const std::vector<double>& interior_tangencies() const { return interior_tangencies_; }

  double operator()(double x2) const { return x1_of_x2_(0.0, x2); }
  double slope(double x2) const { return derivative_(0.0, x2); }

 private:
  Side side_;
  Expr x1_of_x2_;
  Expr derivative_;
  std::vector<double> interior_tangencies_;
};

/// Horizontal boundary piece (x1_lo, x1_hi) x {x2} where U.n = 0.
struct Segment {
  double x1_lo;
  double x1_hi;
  double x2;
};

struct Interval {
  double lo;
  double hi;
  double width() const { return hi - lo; }
};

class DomainSpec {
 public:
  /// Throws AssumptionError when a >= b or ux > ox somewhere on [a, b].
  DomainSpec(double a, double b, BoundaryCurve inflow, BoundaryCurve outflow,
             int nsamples = 4096);

  double a() const { return a_; }
  double b() const { return b_; }
  const BoundaryCurve& inflow() const { return inflow_; }
  const BoundaryCurve& outflow() const { return outflow_; }

  double ux_star() const { return ux_star_; }
  double ox_star() const { return ox_star_; }
  const std::vector<Segment>& gamma0_segments() const { return gamma0_; }

  /// Inflow / outflow curve position, with the closed endpoints handled
  /// by one-sided limits when the expression is singular exactly there.
  double ux(double x2) const;
  double ox(double x2) const;

  /// Horizontal cut at x2 on the closed range, unchecked.
  Interval cut(double x2) const { return {ux(x2), ox(x2)}; }

  /// Vertical cut {x2 : ux(x2) <= x1 <= ox(x2)}. Empty when x1 misses the
  /// domain; throws AssumptionError when the cut is not one interval.
  std::optional<Interval> vertical_cut(double x1) const;

 private:
  double a_;
  double b_;
  BoundaryCurve inflow_;
  BoundaryCurve outflow_;
  double ux_star_ = 0.0;
  double ox_star_ = 0.0;
  std::vector<Segment> gamma0_;
  std::vector<double> table_x2_;
  std::vector<double> table_ux_;
  std::vector<double> table_ox_;
};

/// Checked horizontal cut; x2 must lie in the open range (a, b).
Interval slice_interval(const DomainSpec& dom, double x2);

/// Power-law fit |x2(x1) - x2(pt)| ~ C |x1 - x1(pt)|^r near a tangency.
struct Flatness {
  double r;
  double C;
  double fit_quality;  ///< max absolute residual of the log-log fit
  int samples;
  /// Certified when the fit is tight enough and r > 1.
  bool certified() const { return fit_quality <= 0.1 && r > 1.0; }
};

/// Which parameter directions lie inside the curve's range.
enum class Approach { FromAbove, FromBelow, BothSides };

struct SingularityPoint {
  double x1;
  double x2;
  Side side;
  Approach approach;
  std::optional<Flatness> flatness;
};

struct SignViolation {
  Side side;
  double x2;
  double d;
};

struct BoundaryPartition {
  int inflow_samples = 0;
  int outflow_samples = 0;
  int inflow_verified = 0;   ///< samples with d < 0
  int outflow_verified = 0;  ///< samples with d > 0
  int tangent_samples = 0;   ///< samples skipped as (near) tangent
  std::vector<SignViolation> violations;
  std::vector<Segment> gamma0;
  std::vector<SingularityPoint> gamma_s;

  bool well_posed() const { return violations.empty(); }
};

inline constexpr double kDefaultTangencyThreshold = 1e3;

/// d = U.n sampled on both curves with the outward normal built from the
/// curve tangent (x1', 1).
BoundaryPartition classify_boundary(const DomainSpec& dom, const VelocityField& u,
                                    int nsamples = 1000,
                                    double threshold = kDefaultTangencyThreshold);

/// Throws AssumptionError listing the first violation, if any.
void require_well_posed(const BoundaryPartition& partition);

/// Points where |x1'(x2)| diverges: curve endpoints, declared interior
/// tangencies and interior blow-ups found by scanning. Flatness unfilled.
std::vector<SingularityPoint> detect_singularities(const DomainSpec& dom,
                                                   double threshold = kDefaultTangencyThreshold,
                                                   int nsamples = 1000);

/// Samples |x2 - x2(pt)| against |x1 - x1(pt)| for x1-offsets window * 2^-k,
/// k < nsamples, and fits the exponent in log-log coordinates.
SingularityPoint estimate_flatness(const DomainSpec& dom, const BoundaryCurve& curve,
                                   SingularityPoint pt, double window = 1e-2,
                                   int nsamples = 12);

/// All singular points with flatness filled.
std::vector<SingularityPoint> analyze_singularities(const DomainSpec& dom,
                                                    double window = 1e-2, int nsamples = 12);

/// Largest fitted r over the singular points; 1 when there are none.
double domain_flatness(const std::vector<SingularityPoint>& points);

struct LowerBound {
  int order;       ///< first non-vanishing derivative order at 0
  int order_used;  ///< order the bound was checked for
  double C;        ///< |f^(k)(0)|/k! - M l
  double M;        ///< sampled remainder constant
  bool holds;
};

/// Checks |f(x)| >= C |x|^k on (-l, l) for f(x1) with f(0) = f'(0) = 0.
/// When `order` is given the bound is checked for that order instead of the
/// first non-vanishing one.
LowerBound verify_analytic_lower_bound(const Expr& f, std::optional<int> order, double window,
                                       int nsamples = 400, int max_order = 12);

}  // namespace stransport

#pragma once

// sigma + u sigma_x1 = H in Omega, sigma = sigma_in on the inflow curve.
//
// With V(x) = int_{ux(x2)}^{x1} 1/u(t, x2) dt and sigma~ = e^V sigma the
// system becomes sigma~_x1 = H e^V / u =: H~, so along each slice
//
//   sigma(x1, x2) = e^{-V} (sigma_in(x2) + int_{ux(x2)}^{x1} H~(t, x2) dt).
//
// All integrals along slices are cumulative trapezoid sums on the
// SliceGrid nodes, so the inflow node of every slice carries V = 0 and
// sigma = sigma_in exactly.

#include <memory>
#include <vector>

#include "stransport/field.hpp"
#include "stransport/geometry.hpp"

namespace stransport {

struct Reduced {
  GridField H_tilde;
  double m1;  ///< min e^V / u over the nodes
  double m2;  ///< max e^V / u over the nodes
};

struct SolveResult {
  std::shared_ptr<const SliceGrid> grid;
  GridField sigma;
  GridField V;
  GridField sigma_tilde;
  GridField H_tilde;
  double m1 = 0.0;
  double m2 = 0.0;
  /// Richardson estimate |T_h - T_2h| / 3 of the outflow value of sigma, per slice.
  std::vector<double> slice_error;

  int N() const { return grid->N(); }
  int M() const { return grid->M(); }
  double max_slice_error() const;
};

GridField compute_potential(const VelocityField& u, const std::shared_ptr<const SliceGrid>& grid);
GridField compute_potential(const VelocityField& u, const DomainSpec& dom, int N, int M);

/// H~ = H e^V / u on the nodes of V's grid.
Reduced reduce(const ScalarField& H, const VelocityField& u, const GridField& V);

SolveResult solve(const ScalarField& H, const CurveField& sigma_in, const VelocityField& u,
                  const DomainSpec& dom, int N, int M);

/// phi with a certificate that it vanishes on the outflow curve.
class TestFunction {
 public:
  /// Samples |phi| on nsamples outflow points; certified when the max is <= tol.
  static TestFunction certify(const Expr& phi, const DomainSpec& dom, int nsamples = 257,
                              double tol = 1e-9);

  const Expr& phi() const { return phi_; }
  bool vanishes_on_outflow() const { return certified_; }
  double outflow_max() const { return outflow_max_; }

 private:
  TestFunction(Expr phi, bool certified, double outflow_max)
      : phi_(std::move(phi)), certified_(certified), outflow_max_(outflow_max) {}

  Expr phi_;
  bool certified_;
  double outflow_max_;
};

/// (ox(x2) - x1) q for q in {1, x1, x2, x1^2, x1 x2, x2^2}.
std::vector<TestFunction> default_test_functions(const DomainSpec& dom);

struct WeakResidual {
  double max_residual = 0.0;    ///< max over phi of |L - R| / (|R| + 1)
  std::vector<double> lhs;      ///< int sigma (phi - u phi_x1 - phi u_x1)
  std::vector<double> rhs;      ///< int_in u phi sigma_in dx2 + int H phi
  std::vector<double> residual;
};

/// Weak identity of the transport problem checked on sigma's own grid:
/// trapezoid in x1 on every cut, midpoint in x2 over the slices. With
/// d = u n1 and n1 dS = -dx2 on the inflow curve the boundary term reads
/// int_a^b u phi sigma_in dx2. Throws AssumptionError for an uncertified phi.
WeakResidual weak_residual(const GridField& sigma, const ScalarField& H, const CurveField& sigma_in,
                           const VelocityField& u, const std::vector<TestFunction>& phis);

inline WeakResidual weak_residual(const SolveResult& res, const ScalarField& H,
                                  const CurveField& sigma_in, const VelocityField& u,
                                  const std::vector<TestFunction>& phis) {
  return weak_residual(res.sigma, H, sigma_in, u, phis);
}

}  // namespace stransport

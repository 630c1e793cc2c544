#pragma once

// Estimate machinery for the reduced problem sigma~_x1 = H, sigma~ = sigma_in
// on the inflow curve, where
//
//   sigma~(x1, x2 + h) - sigma~(x1, x2) = I0 + I1 + I2,
//   I0 = sigma_in(x2 + h) - sigma_in(x2),
//   I1 = int_{lo}^{x1} [H(t, x2 + h) - H(t, x2)] dt,   lo = max(ux(x2), ux(x2 + h)),
//   I2 = int_{ux(x2+h)}^{ux(x2)} H(t, x2 + h) dt        if ux(x2 + h) <= ux(x2),
//      = -int_{ux(x2)}^{ux(x2+h)} H(t, x2) dt           otherwise.
//
// Only I2 sees the boundary; its kernel with H = 1 drives the sharpness sweep.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "stransport/field.hpp"
#include "stransport/geometry.hpp"
#include "stransport/norm.hpp"

namespace stransport {

struct Decomposition {
  double I0 = 0.0;
  double I1 = 0.0;
  double I2 = 0.0;
  bool interchanged = false;  ///< ux(x2 + h) > ux(x2)
  double sum() const { return I0 + I1 + I2; }
};

/// Requires x2, x2 + h in (a, b) and x1 inside both cuts (AssumptionError).
Decomposition decompose_I(const ScalarField& H, const CurveField& sigma_in, const DomainSpec& dom,
                          double x1, double x2, double h);

/// sigma_in(x2) + int_{ux(x2)}^{x1} H(t, x2) dt by Gauss-Legendre.
double reduced_value(const ScalarField& H, const CurveField& sigma_in, const DomainSpec& dom,
                     double x1, double x2);

struct TermLevel {
  double J0 = 0.0;
  double J1 = 0.0;
  double J2 = 0.0;
  QuadratureConfig quad;
};

struct TermReport {
  TermLevel value;
  std::optional<TermLevel> refined;
  double delta = 0.0;
  double sigma_in_norm = 0.0;    ///< boundary norm of sigma_in, parameter metric
  double H_seminorm_x2 = 0.0;
  double H_norm_star = 0.0;
  std::optional<double> C0;      ///< J0 / ||sigma_in||^p
  std::optional<double> C1;      ///< J1 / |H|_{x2}^p
  std::optional<double> C2;      ///< J2 / ||H||*^p
};

/// Jk = int dx2 int dh int dx1 |Ik|^p / h^{1+sp} over x2, x2 + h in (a, b),
/// h in [h_min, delta], x1 in both cuts; delta = h_max (b - a).
TermReport term_integrals(const ScalarField& H, const CurveField& sigma_in, const DomainSpec& dom,
                          const FracParams& fp, const QuadratureConfig& quad, bool refine = true);

struct Sample {
  Expr H;
  Expr sigma_in;
};

/// count samples from mt19937_64(seed). Even samples carry a quadratic H,
/// odd ones c0 + c1 exp(c2 x1 + c3 x2); sigma_in is quadratic in x2.
/// Coefficients are uniform on [-1, 1] rounded to three decimals.
std::vector<Sample> random_family(std::uint64_t seed, int count);

struct SampleRatio {
  double sigma_norm = 0.0;
  double H_norm = 0.0;
  double sigma_in_norm = 0.0;
  double ratio = 0.0;
};

struct EstimateLevel {
  int N = 0;
  int M = 0;
  std::vector<SampleRatio> samples;
  double C_emp = 0.0;
};

struct EstimateReport {
  explicit EstimateReport(FracParams params) : fp(params) {}

  FracParams fp;
  double r = 1.0;
  bool theorem_valid = false;
  bool override_used = false;
  EstimateLevel coarse;
  std::optional<EstimateLevel> fine;
  std::optional<double> drift;  ///< |C_fine - C_coarse| / C_coarse
  std::vector<std::string> warnings;
};

struct EstimateOptions {
  bool allow_out_of_regime = false;
  bool refine = true;
  double window = 1e-2;
  int flatness_samples = 12;
};

/// Ratio ||sigma||* / (||H||* + ||sigma_in||_{Gamma_in}) per sample, solved on
/// quad.N x quad.M and, when refining, on quad.refined(). Throws
/// AssumptionError outside 1/r > s > 2/p unless the override is set.
EstimateReport estimate_constant(const DomainSpec& dom, const VelocityField& u, const FracParams& fp,
                                 const std::vector<Sample>& family, const QuadratureConfig& quad,
                                 EstimateOptions options = {});

enum class Verdict { Convergent, Divergent };
std::string to_string(Verdict v);

struct SweepPoint {
  double x2;               ///< singular parameter
  double direction;        ///< +1 into the domain from a, -1 from b
  std::vector<double> K;   ///< K(h_min) per h_min grid value
  double fitted_slope = 0.0;
  std::vector<std::pair<double, double>> offsets;  ///< (offset, K at the smallest h_min)
};

struct SweepRow {
  double s = 0.0;
  double predicted = 0.0;  ///< p (1/r - s)
  double fitted_slope = 0.0;     ///< smallest slope over the singular points
  double relative_error = 0.0;   ///< |fitted - predicted| / |predicted|
  Verdict verdict = Verdict::Convergent;
  std::vector<SweepPoint> points;
};

struct SweepReport {
  double r = 1.0;
  double epsilon = 1.0;
  double p = 1.0;
  double delta = 0.0;
  std::vector<double> h_min_grid;
  std::vector<SweepRow> rows;
};

/// Default h_min grid: 1e-2 (b - a) 2^-k, k < levels.
std::vector<double> default_h_min_grid(const DomainSpec& dom, int levels = 15);

/// K(h_min) = int_{h_min}^{delta} |ux(k) - ux(k + h)|^p / h^{1+sp} dh at each
/// inflow singular parameter k. The increments D_j = K(h_{j+1}) - K(h_j) scale
/// like h^{p(1/r - s)}; their fitted log-log slope decides the verdict
/// (convergent when positive). Throws AssumptionError without inflow
/// singularities.
SweepReport sharpness_sweep(const DomainSpec& dom, double p, const std::vector<double>& s_grid,
                            const std::vector<double>& h_min_grid, const QuadratureConfig& quad,
                            double window = 1e-2, int flatness_samples = 12);

struct X1Level {
  int N = 0;
  int M = 0;
  double sigma_seminorm_x1 = 0.0;
  double H_norm_star = 0.0;
  double sigma_in_norm = 0.0;
  double ratio = 0.0;
};

struct X1Report {
  X1Level coarse;
  std::optional<X1Level> fine;
  std::optional<double> drift;
  bool finite = false;
  bool homogeneous = false;  ///< H = 0; the denominator rests on sigma_in alone
  std::vector<std::string> notes;
};

/// |sigma|_{x1} against ||H||* + ||sigma_in||; needs only s < 1.
X1Report x1_direction_check(const ScalarField& H, const CurveField& sigma_in,
                            const VelocityField& u, const DomainSpec& dom, const FracParams& fp,
                            const QuadratureConfig& quad, bool refine = true);

/// Least-squares slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace stransport

#pragma once

// Integral-identity checks on the tubular ball around the gluing anchor:
//
//  * whole-space dilation balance of the single profile, with the
//    numerator taken through the iterated-Laplacian coefficient tables and
//    the denominator through the plain critical power, so the two 1-D
//    quadratures stay independent routes to the same number;
//  * boundary locality of the bilinear flux functionals
//      L2[u,v] = int_D ( (-Dlt)^m u d_i v + (-Dlt)^m v d_i u ),
//      L1[u,v] = int_D ( (-Dlt)^m u <y,grad v> + (-Dlt)^m v <y,grad u> ),
//    where L2 and the volume-corrected L1 depend on boundary data only, so
//    two pairs agreeing near the boundary must give the same value;
//  * the concentrated-mass rule
//      int_D h Z^2 ~ 2k lambda^(-2m) h(anchor) int U_{0,1}^2
//    checked by importance-sampled Monte Carlo against the closed form.
//
// Test inputs are axisymmetric: functions of r = |y'| and of the tail
// coordinates only, so volume integrals collapse through the S^2 fiber of
// y' and the sphere fiber of the unused tail directions. The two atom
// families below have exact iterated Laplacians by small closed recursions;
// nothing here differentiates numerically.

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "polybubble/quadrature.hpp"
#include "polybubble/residual_norms.hpp"

namespace polybubble {

// Ball in the reduced (r, y'') coordinates, centered near the anchor; its
// preimage in R^N carries the S^2 fiber of y'. The radius window ties the
// domain to the gluing scale: strictly outside the cutoff support, strictly
// inside the sampling shell, and small enough that r stays positive.
struct BallDomain {
  double r0 = 1.0;
  Vec y20;             // dimension N - 3
  double rho = 0.3;
};

// Validates 2 delta < rho < 5 delta and rho < r0, anchored at the cutoff.
BallDomain make_ball_domain(const CutoffProfile& cut, double rho);

bool ball_contains(const BallDomain& dom, double r, const Vec& y2);

// Volume of the preimage of the ball in R^N (S^2 fiber integrated exactly).
double ball_volume(const BallDomain& dom, int N);

// (2m - N)/2 + N/m* as an exact reduced fraction {num, den}, den > 0. The
// dilation weight of the volume terms cancels exactly when this is zero,
// which is what makes the whole-space ratio below equal to one.
std::pair<long long, long long> dilation_exponent_deficit(const SpaceParams& sp);

struct WholeSpaceRatio {
  double numerator = 0.0;    // int U (-Dlt)^m U dy, table route
  double denominator = 0.0;  // int U^{m*} dy, power route
  double ratio = 0.0;
  double quad_error = 0.0;   // propagated absolute error on the ratio
};

// Both integrals reduce to radial 1-D quadrature; throws std::runtime_error
// if either fails to converge to the requested relative tolerance.
WholeSpaceRatio whole_space_pohozaev_ratio(const SpaceParams& sp,
                                           double rel_tol = 1e-9);

// --- axisymmetric test functions -----------------------------------------
//
// Coordinates relative to a ball domain: r = |y'|, t = the chosen tail axis
// minus its anchor value, w = distance to the anchor in the remaining tail
// directions. Two atom families, both with closed-form Laplacians:
//
//   sheet:  sum c[p,q] r^p t^q exp(-b((r - ar)^2 + (t - at)^2)), constant
//           across the w fiber;
//   cap:    q_j(s) r^(-j) with s = (r - ar)^2 + t^2 + w^2, optionally
//           truncated at s = R^2 (polynomial caps (R^2 - s)^e give C^(e-1)
//           compact bumps whose support is a genuine interior ball).
//
// Sheets stay sheets under the Laplacian; caps stay caps with the inverse
// power j growing by at most two per application. Cap atoms are tied to the
// domain's tail anchor, so build them against the same BallDomain that the
// check functions receive.

struct SheetAtom {
  std::map<std::pair<int, int>, double> coef;  // (p, q) -> coefficient
  double b = 0.0;
  double ar = 0.0;
  double at = 0.0;
};

struct CapAtom {
  double ar = 0.0;
  double R2 = 0.0;  // support radius squared; <= 0 means untruncated
  std::map<int, std::vector<double>> levels;  // j -> coefficients of q_j(s)
};

class AxisymTestFunction {
 public:
  // amp * r^p t^q * exp(-b((r - ar)^2 + (t - at)^2)); b = 0 gives a plain
  // monomial in (r, t). p may be negative (keep the domain away from r = 0).
  static AxisymTestFunction sheet(double amp, int p, int q, double b,
                                  double ar, double at);
  // amp * ((radius^2 - s)_+)^exponent about (ar, anchor tail); exponent
  // must be at least 2m + 1 for the m-fold Laplacian to stay continuous.
  static AxisymTestFunction cap(double amp, double ar, double radius,
                                int exponent);

  AxisymTestFunction& operator+=(const AxisymTestFunction& other);

  // Exact Laplacian of R^N restricted to this symmetry class:
  //   d_rr + (2/r) d_r + d_tt + (transverse tail part through s).
  AxisymTestFunction laplacian(const SpaceParams& sp) const;

  double value(double r, double t, double w) const;
  double t_derivative(double r, double t, double w) const;
  // <y, grad u> under the convention that the domain's tail anchor is the
  // origin of y''; check functions that need this enforce the convention.
  double dilation_term(double r, double t, double w) const;

  bool w_dependent() const { return !caps_.empty(); }
  bool empty() const { return sheets_.empty() && caps_.empty(); }

  const std::vector<SheetAtom>& sheets() const { return sheets_; }
  const std::vector<CapAtom>& caps() const { return caps_; }

 private:
  std::vector<SheetAtom> sheets_;
  std::vector<CapAtom> caps_;
};

// Integral over the domain preimage of f(r, t, w) against the fiber measure
// 4 pi r^2 times the transverse tail sphere. w_constant promises f ignores w,
// collapsing the innermost quadrature to a closed moment. The absolute scale
// is pinned by integrating |f| first, so rel_tol is honest under interior
// cancellation. Throws std::runtime_error on non-convergence.
double ball_integral(const std::function<double(double, double, double)>& f,
                     const BallDomain& dom, const SpaceParams& sp,
                     bool w_constant, double rel_tol = 1e-8);

struct LocalityPair {
  AxisymTestFunction u, v;
};

struct LocalityValues {
  double value1 = 0.0;
  double value2 = 0.0;
  double quad_error = 0.0;
};

// L2 for both pairs over the domain preimage. axis selects which tail
// coordinate plays t (0 .. N-4); the value is axis-independent because the
// construction is isotropic in the tail, but the index is validated.
// Throws std::invalid_argument when the pairs disagree near the boundary
// (relative mismatch above 1e-9 on a fixed shell sample) and
// std::runtime_error when the quadrature fails to converge.
LocalityValues boundary_locality_check(const LocalityPair& pair1,
                                       const LocalityPair& pair2,
                                       const BallDomain& dom, int axis,
                                       const SpaceParams& sp,
                                       double rel_tol = 3e-8);

struct DilationValues {
  double value1 = 0.0;   // L1 + (N-2m)/2 * volume term, pair 1
  double value2 = 0.0;
  double volume1 = 0.0;  // int (v (-Dlt)^m u + u (-Dlt)^m v), pair 1
  double volume2 = 0.0;
  double quad_error = 0.0;
};

// L1 variant: the corrected values agree for pairs sharing boundary data,
// while the raw L1 and the volume terms individually do not. Requires the
// domain tail anchor at the origin (the dilation field needs absolute
// positions); throws std::invalid_argument otherwise.
DilationValues boundary_dilation_check(const LocalityPair& pair1,
                                       const LocalityPair& pair2,
                                       const BallDomain& dom,
                                       const SpaceParams& sp,
                                       double rel_tol = 3e-8);

struct WeightedMass {
  double estimate = 0.0;   // MC estimate of int_D h Z^2
  double std_error = 0.0;  // MC standard error of the estimate
  double predicted = 0.0;  // 2k lambda^(-2m) h(anchor) int U_{0,1}^2
  std::size_t samples = 0;
};

// Importance sampling from the bubble-core mixture (the radial factor of
// U^2 is an exact Beta-prime draw), eight deterministic strata merged in
// order. h takes (r, y''). Throws on an empty sample budget.
WeightedMass weighted_mass_check(
    const std::function<double(double, const Vec&)>& h, const AnsatzZ& az,
    const BallDomain& dom, std::size_t n_samples = 200000,
    uint64_t seed = 20260816u);

// --- canned report ---------------------------------------------------------

struct CheckRow {
  std::string name;
  double value = 0.0;
  double predicted = 0.0;
  double tolerance = 0.0;  // absolute, on |value - predicted|
  bool pass = false;
};

// Fixed battery over the anchor geometry: the whole-space ratio, the exact
// exponent cancellation, flux locality for a smooth pair and for a
// compactly supported interior bump, the corrected dilation functional,
// and the two concentrated-mass checks. The perturbation atoms scale with
// the window, so nonstandard anchors stay admissible.
std::vector<CheckRow> pohozaev_report(const SpaceParams& sp, double r0 = 1.0,
                                      double delta = 0.1, double rho = 0.35,
                                      std::size_t n_samples = 200000,
                                      uint64_t seed = 20260816u);

std::string check_rows_csv(const std::vector<CheckRow>& rows);

}  // namespace polybubble

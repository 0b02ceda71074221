#pragma once

// Adaptive 1-D quadrature (Gauss-Kronrod 7/15 with worst-interval
// refinement) plus the radial / axisymmetric reductions used everywhere
// volume integrals of radial or cylindrically symmetric profiles appear.
//
// Conventions:
//   * radial_integral computes  int_0^inf f(r) r^(N-1) dr  via r = s*tan(theta),
//     so full-space integrals of radial g are sphere_area(N) * radial_integral(g).
//   * axisym_integral computes  int_{R^N} g(z, rho) dy  for g depending on one
//     axis coordinate z and the transverse radius rho = |y_perp|, reduced to
//     sphere_area(N-1) * int dz int drho g(z,rho) rho^(N-2).
// Integrands must decay fast enough for the mapped integrand to vanish at the
// ends; the `scale` hint recentres the tan map on the integrand's own length
// scale (peak near r ~ scale) so adaptivity starts in the right decade.

#include <functional>

#include "polybubble/space.hpp"

namespace polybubble {

struct QuadResult {
  double value = 0.0;
  double error = 0.0;   // estimated absolute error
  bool converged = false;
  int intervals = 0;
};

// Adaptive GK7/15 on the finite interval [a, b] to absolute tolerance.
QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol, int max_intervals = 4000);

// Surface area of the unit (N-1)-sphere in R^N: 2 pi^(N/2) / Gamma(N/2).
double sphere_area(int N);

// Euler Beta via lgamma.
double beta_function(double a, double b);

// int_0^inf f(r) r^(N-1) dr, mapped through r = scale * tan(theta).
QuadResult radial_integral(const std::function<double(double)>& f, int N,
                           double abs_tol, double scale = 1.0,
                           int max_intervals = 4000);

// int_{R^N} g(z, rho) dy for an axisymmetric profile (see header comment).
// scale_z / scale_rho recentre the two tan maps.
QuadResult axisym_integral(const std::function<double(double, double)>& g,
                           int N, double abs_tol, double scale_z = 1.0,
                           double scale_rho = 1.0);

// A pair of independently computed values for the same quantity. Code that
// consumes these must keep both routes alive; collapsing them to one defeats
// the cross-check.
struct DualValue {
  double closed_form = 0.0;
  double quadrature = 0.0;
  double quad_error = 0.0;
  bool converged = false;
  double rel_delta() const;
};

// int U_{0,lambda}^2 dy: closed Beta form vs adaptive radial quadrature.
// Requires N > 4m so the integral converges.
DualValue integral_U2(const SpaceParams& sp, double lambda,
                      double abs_tol_rel = 1e-10);

// int U_{0,lambda}^(m*-1) dy, same dual evaluation. Converges for N > 2m.
DualValue integral_Umstar_minus1(const SpaceParams& sp, double lambda,
                                 double abs_tol_rel = 1e-10);

}  // namespace polybubble

#pragma once

// The reduced (finite-dimensional) problem: energy-expansion constants
// B1..B4, the lambda-derivative expansion of the ansatz energy, the balance
// equations in the scaled variable t (lambda = t k^rho), and the damped
// Newton / bisection solver for (r̄, ȳ'', t).
//
// Constant conventions (U = U_{0,1}, gamma = N - 2m, p = gamma / 2):
//   B1 = m * int U^2
//   B2 = p * P^{gamma/(4m)} * int U^{m*-1}   (closed form), also obtainable
//        by fitting the two-bubble interaction J(d, lambda) against
//        -B2 lambda^{-(gamma+1)} d^{-gamma} at lambda d >> 1
//   B3 = B2 * A1(r̄),  B4 = B2 * A2(r̄)      (lattice constants of the
//        doubled-circle sums, re-evaluated at the current r̄)

#include <utility>

#include "polybubble/config_geometry.hpp"
#include "polybubble/potential.hpp"
#include "polybubble/space.hpp"

namespace polybubble {

struct EnergyConstants {
  double B1 = 0.0, B2 = 0.0, B3 = 0.0, B4 = 0.0;
  double B1_rel_delta = 0.0;       // closed form vs numeric-derivative route
  double B2_rel_delta = 0.0;       // closed form vs quadrature fit (if run)
  double B2_fit_exp_d = 0.0;       // fitted separation exponent (-> -(N-2m))
  double B2_fit_exp_lambda = 0.0;  // fitted scale exponent (-> -(N-2m+1))
  double B2_fit_max_residual = 0.0;
  bool B4_in_regime = true;
};

// B1 = m * int U^2 via the closed Beta form. Requires N > 4m.
double const_B1(const SpaceParams& sp);
// Independent route: numeric d/dlambda of the quadrature-evaluated L2 mass.
double const_B1_numeric(const SpaceParams& sp);

// Closed form for B2. Requires N > 4m + 1.
double const_B2_closed(const SpaceParams& sp);

// Two-bubble interaction J(d, lambda) =
//   (m*-1) int U_{0,lambda}^{m*-2} (d/dlambda U_{0,lambda}) U_{d e3, lambda}
// by axisymmetric quadrature. Negative for lambda d >> 1; scales exactly as
// J(d, lambda) = lambda^{-1} J(lambda d, 1).
double interaction_J(const SpaceParams& sp, double d, double lambda,
                     double rel_tol = 1e-7);

struct B2Fit {
  double B2 = 0.0;
  double exp_d = 0.0;
  double exp_lambda = 0.0;
  double max_log_residual = 0.0;  // worst |log(-J) - fit| over the grid
};
// Power-law fit of J over a (d, lambda) grid with lambda d >> 1.
B2Fit const_B2_fit(const SpaceParams& sp);

// B3/B4 from B2 and the lattice constants at the config's r̄. When the
// cross-sum asymptotic regime (h̄ k large) fails, B4 falls back to the
// empirical bracket constant and *in_regime (if given) is set false.
std::pair<double, double> const_B3_B4(const SpaceParams& sp,
                                      const DoubledCircleConfig& cfg, double B2,
                                      bool* in_regime = nullptr);

// All constants at once; the B2 quadrature fit only runs when requested.
EnergyConstants compute_energy_constants(const SpaceParams& sp,
                                         const DoubledCircleConfig& cfg,
                                         bool with_b2_fit = false);

// d/dlambda of the 2k-bubble energy ansatz, leading terms:
//   2k ( -B1 lambda^{-(2m+1)} V
//        + B3 k^{gamma} lambda^{-(gamma+1)} (1-h̄²)^{-gamma/2}
//        + B4 k lambda^{-(gamma+1)} h̄^{-(gamma-1)} (1-h̄²)^{-1/2} )
// with B3, B4 evaluated at r_bar.
double dI_dlambda_expansion(const SpaceParams& sp, double B2, int k,
                            double lambda, double h_bar, double r_bar,
                            double Vval);

// Case-specific scalar balance in the scaled variable t:
//   case 1:          -B1 t^{-(2m+1)} V + B3 M1^{gamma} t^{-(gamma+1-alpha)}
//   case 2 (h̄->a):   -B1 t^{-(2m+1)} V + B3 t^{-(gamma+1)} (1-a²)^{-gamma/2}
//   case 3 (h̄->0):   -B1 t^{-(2m+1)} V + B3 t^{-(gamma+1)}
//                      + B4 A^{gamma-1} t^{-(2m+1+(N-4m)/(N-2m))}
// where case_id 3 with A = 0 reduces to the middle form with a = 0.
double reduced_balance(const SpaceParams& sp, const RegimeParams& rp, double B1,
                       double B3, double B4, double t, double Vval);

// Root of the case-1 balance for constant V = V0:
// t* = (B3 M1^{gamma} / (B1 V0))^{1/iota}.
double closed_form_tstar(const SpaceParams& sp, const RegimeParams& rp,
                         double B1, double B3, double V0);

struct ReducedState {
  double t = 1.0;
  double r_bar = 1.0;
  Vec y2_bar;                  // size N - 3
  double h_bar = 0.0;          // from the regime law at the final lambda
  double lambda = 0.0;         // t * k^rho
  double residual_norm = 0.0;  // sup norm of the scaled residual
  double jacobian_cond = 0.0;  // infinity-norm condition estimate
  int iterations = 0;
  bool converged = false;
  bool used_bisection = false;
};

// Scaled residual of the reduced system, dimension N - 1:
//   [ r̄ grad_r(r^{2m}V)/W , r̄ grad_{y''}(r^{2m}V)/W , balance(t)/sum|terms| ]
// (the gradient rows are made dimensionless; W = r̄^{2m} V(r̄, ȳ'')).
Vec reduced_residual(const SpaceParams& sp, const RegimeParams& rp,
                     const Potential& V, int k, const EnergyConstants& ec,
                     double t, double r_bar, const Vec& y2_bar);

// Damped (Levenberg) Newton with finite-difference Jacobian and a bisection
// fallback on the t component. Converged iff residual sup-norm < 1e-9, t in
// [L0, L1], and (when declared) (r̄, ȳ'') within theta of (r0, y0'').
ReducedState solve_reduced(const SpaceParams& sp, const RegimeParams& rp,
                           const Potential& V, int k, const ReducedState& init,
                           int max_iter = 80);

}  // namespace polybubble

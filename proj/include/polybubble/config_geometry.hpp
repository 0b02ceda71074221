#pragma once

// Doubled-circle point configurations: 2k bubble centres on two parallel
// circles of radius r̄ sqrt(1 - h̄²) at heights ±r̄ h̄, sharing the tail
// coordinates ȳ''. Includes the scaling laws tying h̄ to the concentration
// parameter lambda in the three construction regimes, the exact mutual
// interaction sums, and their large-k asymptotics with explicit constants.

#include <vector>

#include "polybubble/bubble.hpp"
#include "polybubble/space.hpp"

namespace polybubble {

struct DoubledCircleConfig {
  int k = 2;            // points per circle
  double r_bar = 1.0;   // sphere radius carrying all 2k points
  double h_bar = 0.5;   // height fraction, in (0, 1)
  Vec y2_bar;           // shared tail coordinates, dimension N - 3

  void validate() const;                 // throws std::invalid_argument
  double circle_radius() const;          // r̄ sqrt(1 - h̄²)
  double chord_same(int j) const;        // |x_j^+ - x_1^+|, j in 1..k
  double cross_distance(int j) const;    // |x_j^- - x_1^+|, j in 1..k
};

// The 2k centres in R^N; entries 0..k-1 are the upper circle (+r̄h̄),
// entries k..2k-1 the lower one, each in increasing angle 2(j-1)pi/k.
std::vector<Vec> points(const SpaceParams& sp, const DoubledCircleConfig& cfg);

struct RegimeParams {
  int case_id = 1;      // 1, 2, or 3
  double M1 = 1.0;      // case 1 amplitude
  double M2 = 1.0;      // cases 2/3 amplitude
  double a = 0.0;       // cases 2/3 height offset, in [0, 1)
  double L0 = 0.5;      // lambda window [L0 k^rho, L1 k^rho]
  double L1 = 2.0;
  double theta = 0.1;   // neighbourhood radius for the reduced problem
  double A = 0.0;       // free height-amplitude constant of the case-3 balance
};

struct RegimeScales {
  double h_bar = 0.0;
  double rho = 0.0;          // window exponent
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
  bool in_window = false;    // diagnostic only, never a failure
};

// Height law and admissible lambda window for the given case:
//   case 1:  sqrt(1 - h̄²) = M1 lambda^(-alpha/(N-2m)),  rho = (N-2m)/(N-4m-alpha)
//   case 2/3: h̄ = a + M2 lambda^(-(N-4m)/(N-2m)),       rho = (N-2m)/(N-4m)
// Leading terms only; the vanishing corrections are dropped by construction.
RegimeScales regime_scales(double lambda, int k, const RegimeParams& rp,
                           const SpaceParams& sp);

// d/dlambda of the two height coordinates under the case law:
// s = sqrt(1 - h̄²) (circle-radius fraction) and h̄ itself. Feeds the
// moving-centre chain rule d/dlambda U_{x(lambda),lambda}.
struct RegimeDerivatives {
  double ds_dlambda = 0.0;
  double dh_dlambda = 0.0;
};
RegimeDerivatives regime_derivatives(double lambda, const RegimeParams& rp,
                                     const SpaceParams& sp);

// Exact interaction sums at exponent gamma > 0, Neumaier-compensated:
//   same:  sum_{j=2}^{k} |x_j^+ - x_1^+|^(-gamma)
//   cross: sum_{j=1}^{k} |x_j^- - x_1^+|^(-gamma)
double lattice_sum_same(double gamma, const DoubledCircleConfig& cfg);
double lattice_sum_cross(double gamma, const DoubledCircleConfig& cfg);

// Riemann zeta by direct series with Euler-Maclaurin tail, abs error < 1e-13.
double zeta_series(double s);

struct SameAsymptotic {
  double A1 = 0.0;         // 2 zeta(N-2m) / (2 pi r̄)^(N-2m)
  double predicted = 0.0;  // A1 k^(N-2m) / sqrt(1-h̄²)^(N-2m)
};

struct CrossAsymptotic {
  double A2 = 0.0;         // 2 I / (pi (2 r̄)^(N-2m)), I the Beta-form integral
  double predicted = 0.0;  // A2 k / (h̄^(N-2m-1) sqrt(1-h̄²))
  bool in_regime = false;  // needs h̄ k >> 1 for the prediction to be leading
  // Observed constant exact_sum * h̄^(N-2m-1) / k; outside the regime this
  // two-sided empirical bracket is all that can be reported.
  double empirical_constant = 0.0;
};

SameAsymptotic asymptotic_same(const DoubledCircleConfig& cfg,
                               const SpaceParams& sp);
CrossAsymptotic asymptotic_cross(const DoubledCircleConfig& cfg,
                                 const SpaceParams& sp);

// Least-squares line fit, for rate measurements on log-log data.
struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace polybubble

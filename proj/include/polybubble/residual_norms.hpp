#pragma once

// Cutoff profile, glued ansatz, weighted sup-norms, and pointwise ansatz
// error E_k = Z^{m*-1} - VZ - (-Delta)^m Z for doubled-circle bubble
// configurations. The cutoff lives on the distance
// s = |(r, y'') - (r0, y0'')| in profile space, equals 1 inside s <= delta
// and 0 outside s >= 2 delta. Everything the polylaplacian cannot reach in
// closed form (the cutoff commutator) is produced by iterated high-order
// finite differences confined to the transition band.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "polybubble/config_geometry.hpp"
#include "polybubble/potential.hpp"
#include "polybubble/smoothstep.hpp"
#include "polybubble/space.hpp"

namespace polybubble {

// Radial C^{2m+1} glue: piecewise-polynomial ramp of degree 4m+3 with exact
// derivatives through order 2m+1, so an m-fold Laplacian of the glued
// ansatz still has one continuous derivative to spend on finite
// differences.
struct CutoffProfile {
  double r0 = 1.0;
  Vec y20;            // anchor tail coordinates, dimension N - 3
  double delta = 0.1;
  int smooth_order = 3;  // = 2m + 1
  Poly ramp;             // smoothstep on [0, 1]

  // |(r, y'') - (r0, y0'')| with r = |y'| taken from the leading 3 coords.
  double anchor_distance(const Vec& y) const;
  double profile(double s) const;  // 1 on [0, delta], 0 from 2 delta on
  // d^order/ds^order of the profile, exact on each polynomial piece;
  // order 0..2m+1.
  double profile_derivative(double s, int order) const;
  double value(const Vec& y) const;  // profile(anchor_distance(y))
};

CutoffProfile make_cutoff(const SpaceParams& sp, double r0, const Vec& y20,
                          double delta);

// Sum of bubbles with a common concentration rate, optionally glued by the
// cutoff. amplitude scales every bubble; 1 is the normalisation that makes
// each summand an exact zero-potential solution.
struct AnsatzZ {
  SpaceParams sp{6, 1};
  std::vector<Vec> centers;
  double lambda = 1.0;
  CutoffProfile cutoff;
  bool with_cutoff = true;
  double amplitude = 1.0;

  double Zstar(const Vec& y) const;  // amplitude * sum of bubbles
  double value(const Vec& y) const;  // cutoff applied when with_cutoff
  // amplitude * sum of U^{m*-1}: the exact m-fold Laplacian of Zstar.
  double polylap_Zstar(const Vec& y) const;
  // sum_j (1 + lambda |y - x_j|)^{-expo} and its log (log-sum-exp, safe
  // when every term underflows).
  double weight_sum(double expo, const Vec& y) const;
  double log_weight_sum(double expo, const Vec& y) const;
};

AnsatzZ make_ansatz(const SpaceParams& sp, const DoubledCircleConfig& cfg,
                    double lambda, const CutoffProfile& cutoff,
                    bool with_cutoff = true, double amplitude = 1.0);
// Explicit centre list; used for one- and two-bubble closed-form checks.
AnsatzZ make_bubble_ansatz(const SpaceParams& sp, std::vector<Vec> centers,
                           double lambda, const CutoffProfile& cutoff,
                           bool with_cutoff = true, double amplitude = 1.0);

// Decay weight of the correction norms: iota/(2m+iota) for the shrinking
// regime (case 1), (N-4m)/(N-2m) for the pinned-height regimes (2 and 3).
double tau_for_case(const SpaceParams& sp, int case_id);

// m-fold (-Delta) by a 4th-order five-point stencil per axis, iterated.
// Exact on polynomials of degree <= 5 per application.
double polylap_fd(const std::function<double(const Vec&)>& f, const Vec& y,
                  double h, int m);

// Test object whose star norm is its amplitude by construction:
//   phi = eps lambda^{(N-2m)/2} sum_j (1 + lambda |y-x_j|)^{-(N-2m)/2-tau}.
struct SyntheticCorrector {
  double eps = 0.0;
  double tau = 0.2;
};

double corrector_value(const AnsatzZ& az, const SyntheticCorrector& phi,
                       const Vec& y);

// Fixed-seed sample set covering the strata the sup-norms care about:
// shells lambda |y - x_j| in {1e-3, 0.5, 1, 2, 5, 10, 100} around every
// centre with random directions, the cutoff transition band, and far field.
std::vector<Vec> norm_samples(const AnsatzZ& az, uint64_t seed = 20260816u);

// Sampled sup of lambda^{-(N-2m)/2} |u| / weight_sum((N-2m)/2 + tau) and
// its right-hand-side counterpart with (N+2m)/2 in both exponents.
// Ratios are formed in log space. Throws std::invalid_argument on an empty
// sample set.
double star_norm(const std::function<double(const Vec&)>& u,
                 const AnsatzZ& az, double tau,
                 const std::vector<Vec>& samples);
double doublestar_norm(const std::function<double(const Vec&)>& f,
                       const AnsatzZ& az, double tau,
                       const std::vector<Vec>& samples);
// Same sup over values already evaluated at samples[i] (parallel callers).
double doublestar_norm_values(const std::vector<double>& values,
                              const AnsatzZ& az, double tau,
                              const std::vector<Vec>& samples);

struct EkResult {
  double value = 0.0;
  double interaction = 0.0;  // Z^{m*-1} - cutoff * exact polylaplacian
  double potential_term = 0.0;  // V * Z
  double commutator = 0.0;   // (-Delta)^m (cutoff Z*) - cutoff (-Delta)^m Z*
  bool fd_used = false;
  bool near_seam = false;    // stencil straddles s = delta or s = 2 delta
  double h = 0.0;            // stencil spacing (0 when no FD ran)
};

// Pointwise ansatz error. V may be null (zero potential). Outside the
// cutoff band the commutator vanishes identically and no finite
// differences run; inside the band (-Delta)^m of the glued ansatz is a
// 4th-order stencil iterated m times.
EkResult E_k_value(const AnsatzZ& az, const Potential* V, const Vec& y);

// (Z + phi)_+^{m*-1} - Z^{m*-1} - (m*-1) Z^{m*-2} phi, the quadratic-and-up
// remainder of the nonlinearity. Evaluated in ratio form when phi is a
// small perturbation of Z > 0 to keep the cancellation exact.
double N_phi_value(const AnsatzZ& az, const SyntheticCorrector& phi,
                   const Vec& y);

struct ScalingSweep {
  std::vector<int> ks;
  std::vector<double> ts;  // lambda = t k^rho, t inside the regime window
  double delta = 0.1;
  uint64_t seed = 20260816u;
  int jobs = 0;  // 0 = hardware concurrency
};

struct ScalingRow {
  int k = 0;
  double lambda = 0.0;
  double h_bar = 0.0;
  double norm = 0.0;  // doublestar norm of E_k
};

struct ScalingStudy {
  std::vector<ScalingRow> rows;
  double slope = 0.0;  // least-squares log norm vs log lambda
  double intercept = 0.0;
};

// Sweep of the ansatz error norm across the regime window, anchored at the
// potential's declared point. The recorded slope is the empirical decay
// rate in lambda; theory guarantees it at most -(2m+1-beta)/2 for the
// regime's beta.
ScalingStudy residual_scaling_study(const SpaceParams& sp,
                                    const RegimeParams& rp,
                                    const Potential& V,
                                    const ScalingSweep& sweep);

std::string scaling_csv(const ScalingStudy& study);

struct NonlinearRow {
  double eps = 0.0;
  double norm = 0.0;   // doublestar norm of N(phi)
  double ratio = 0.0;  // norm / eps^exponent, 0 at eps = 0
};

struct NonlinearCheck {
  std::vector<NonlinearRow> rows;
  double exponent = 2.0;  // min(2, m*-1)
  double max_ratio = 0.0;
};

// Smallness order of the nonlinear remainder: doublestar_norm(N(phi)) for
// phi = SyntheticCorrector(eps) divided by eps^{min(2, m*-1)} stays in a
// bounded band over the sweep.
NonlinearCheck nonlinear_estimate_check(const AnsatzZ& az, double tau,
                                        const std::vector<double>& eps_sweep,
                                        uint64_t seed = 20260816u);

struct AnnulusMass {
  double value = 0.0;
  double mc_error = 0.0;  // one standard deviation of the MC mean
  size_t samples = 0;
};

// Monte-Carlo integral of phi^2 + |phi|^{m*} over the profile-space shell
// 3 delta <= |(r, y'') - (r0, y0'')| <= 4 delta, lifted to R^N by a uniform
// sphere direction in y'. Strata run in parallel and merge in fixed order.
AnnulusMass annulus_mass(const AnsatzZ& az, const SyntheticCorrector& phi,
                         size_t n_samples, uint64_t seed = 20260816u);

}  // namespace polybubble

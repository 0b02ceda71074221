#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "polybubble/space.hpp"
#include "polybubble/tables.hpp"

namespace polybubble {

using Vec = std::vector<double>;

double dist2(std::span<const double> a, std::span<const double> b);

// Concentrating profile
//
//   U_{x,lam}(y) = P^{(N-2m)/(4m)} * ( lam / (1 + lam^2 |y-x|^2) )^{(N-2m)/2}
//
// the unique positive radial solution of (-Delta)^m U = U^{m*-1} on R^N that
// is maximal at x.  Values are produced from the log form so that far-field
// evaluations underflow gracefully instead of losing the exponent.
struct Bubble {
    Vec center;
    double lambda = 1.0;
};

double bubble_log_value_r2(const SpaceParams& sp, double lambda, double r2);
double bubble_value_r2(const SpaceParams& sp, double lambda, double r2);

double bubble_value(const SpaceParams& sp, const Bubble& b, std::span<const double> y);
double bubble_log_value(const SpaceParams& sp, const Bubble& b, std::span<const double> y);

// Partial derivative in lam at fixed centre:
//   d/dlam U = (N-2m)/(2 lam) * U * (1 - lam^2 r^2)/(1 + lam^2 r^2).
double bubble_dlambda(const SpaceParams& sp, const Bubble& b, std::span<const double> y);

// Spatial gradient, nabla_y U = -(N-2m) lam^2 (y-x) / (1+lam^2 r^2) * U.
Vec bubble_gradient(const SpaceParams& sp, const Bubble& b, std::span<const double> y);

// Closed-form iterated Laplacian (-Delta)^l U for 0 <= l <= m, via the G
// table; l = m returns exactly U^{m*-1}.
double polylaplacian_bubble_log_r2(const SpaceParams& sp, const CoeffTables& ct, double lambda,
                                   double r2, int l);
double polylaplacian_bubble(const SpaceParams& sp, const CoeffTables& ct, const Bubble& b, int l,
                            std::span<const double> y);

} // namespace polybubble

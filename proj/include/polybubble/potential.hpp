#pragma once

// Potentials V(r, y'') >= 0 for the reduced problem, the profile
// W = r^{2m} V whose critical points the construction locates, preset
// families with analytic gradients, and the topological-degree check of
// grad W on boxes in (r, y'') space.
//
// Presets are built directly on W: a shape f(u) of the squared distance
// u = (|r - r0|^2 + |y'' - y0''|^2) / w^2 times a low-r taper T(r) that
// vanishes to high order at r = 0 (so V = W / r^{2m} stays bounded) and is
// identically 1 for r >= r0/2, leaving the declared point exactly critical.

#include <functional>
#include <string>

#include "polybubble/bubble.hpp"
#include "polybubble/space.hpp"

namespace polybubble {

struct Potential {
  // V and, when available, its analytic gradient (d/dr, d/dy'').
  std::function<double(double, const Vec&)> V;
  std::function<void(double, const Vec&, double&, Vec&)> dV;  // may be empty

  int y2_dim = 0;              // dimension of y'' (N - 3)
  double r0 = 1.0;             // declared critical point of r^{2m} V
  Vec y20;                     // size y2_dim
  bool has_critical = false;

  double W(const SpaceParams& sp, double r, const Vec& y2) const;
  // grad of r^{2m} V; falls back to central differences when dV is empty.
  void grad_W(const SpaceParams& sp, double r, const Vec& y2, double& dr,
              Vec& dy2) const;
};

// Shape menu shared by the presets below. "well" has a nondegenerate
// minimum of W at (r0, y0''), "peak" a maximum, "saddle2d" a saddle in the
// (r, y''_1) plane (and no dependence on the remaining y''), and
// "plateau" makes r^{2m} V locally constant (zero gradient identically
// near r0, so only the balance equation is active).
Potential preset_gaussian_well(const SpaceParams& sp, double r0, const Vec& y20,
                               double width, double amplitude);
Potential preset_rational_well(const SpaceParams& sp, double r0, const Vec& y20,
                               double width, double amplitude);
Potential preset_peak(const SpaceParams& sp, double r0, const Vec& y20,
                      double width, double amplitude);
Potential preset_saddle2d(const SpaceParams& sp, double r0, const Vec& y20,
                          double width, double amplitude);
Potential preset_plateau(const SpaceParams& sp, double r0, const Vec& y20,
                         double amplitude);

// Named lookup used by the CLI config format.
Potential make_preset(const std::string& name, const SpaceParams& sp, double r0,
                      const Vec& y20, double width, double amplitude);

// Box in the leading coordinates (r, y''_1, ..., y''_{q-1}) of (r, y'')
// space; the remaining y'' coordinates are pinned at the potential's y0''.
struct DegreeRegion {
  Vec lo, hi;
  int boundary_samples = 256;  // polyline resolution per edge (2-D case)
};

// Topological degree of grad(r^{2m} V) on the region:
//   q = 1: half the signed boundary sign change;
//   q = 2: winding number of the gradient along the rectangle boundary;
//   q >= 3: sign(det Hessian) at the declared nondegenerate critical point.
// Throws if the gradient vanishes on the boundary (q <= 2) or the Hessian
// is singular (q >= 3).
int degree_of_gradient(const SpaceParams& sp, const Potential& V,
                       const DegreeRegion& region);

}  // namespace polybubble

#pragma once

#include <functional>
#include <vector>

#include "polybubble/space.hpp"
#include "polybubble/tables.hpp"

namespace polybubble {

// Independent finite-difference oracle for iterated radial Laplacians.
//
// For a radial profile u(r) on a uniform grid over [0, R],
//
//   (-Delta) u = -u'' - (N-1) u'/r,        r > 0
//   (-Delta) u = -N u''(0),                r = 0 (even profile)
//
// is applied l times with 4th-order central stencils; r < 0 ghost points come
// from even reflection, and each application retires two points at the outer
// edge (tracked by `valid`).  This shares no algebra with the closed-form
// coefficient tables, which is the point.
struct RadialSamples {
    std::vector<double> v;
    double h = 0.0;
    size_t valid = 0; // v[0..valid-1] are meaningful
};

RadialSamples sample_radial(const std::function<double(double)>& f, double R, size_t n);

RadialSamples radial_fd_polylaplacian(const RadialSamples& u, int N, int l);

// Default outer radius: (1 + lam^2 R^2)^{-(N-2m)/2} < 1e-12 relative to r = 0.
double default_profile_radius(const SpaceParams& sp, double lambda);

// Discrete residual of the linearized equation at the dilation mode
//   v = d/dlam U_{0,lam} |_{lam=Lam}:
//   res = FD[(-Delta)^m v] - (m*-1) U^{m*-2} v,
// which vanishes identically in the continuum, so what is measured is pure
// discretization error (4th order in h).
struct KernelResidual {
    std::vector<double> residual;
    double h = 0.0;
    size_t valid = 0;
    double max_abs = 0.0;
};

KernelResidual linearized_kernel_residual(const SpaceParams& sp, double Lam, double R, size_t n);

} // namespace polybubble

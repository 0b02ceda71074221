#include "polybubble/potential.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>
#include <vector>

#include "polybubble/smoothstep.hpp"

namespace polybubble {

double Potential::W(const SpaceParams& sp, double r, const Vec& y2) const {
  if (r <= 0.0) return 0.0;
  return std::pow(r, 2.0 * sp.m) * V(r, y2);
}

void Potential::grad_W(const SpaceParams& sp, double r, const Vec& y2,
                       double& dr, Vec& dy2) const {
  dy2.assign(y2.size(), 0.0);
  if (dV) {
    double dvr = 0.0;
    Vec dvy(y2.size(), 0.0);
    dV(r, y2, dvr, dvy);
    const double rp = std::pow(r, 2.0 * sp.m);
    dr = 2.0 * sp.m * std::pow(r, 2.0 * sp.m - 1.0) * V(r, y2) + rp * dvr;
    for (size_t i = 0; i < y2.size(); ++i) dy2[i] = rp * dvy[i];
    return;
  }
  const double hr = 1e-6 * std::max(1.0, std::fabs(r));
  auto Wat = [&](double rr, const Vec& yy) { return W(sp, rr, yy); };
  dr = (Wat(r + hr, y2) - Wat(r - hr, y2)) / (2.0 * hr);
  Vec yp = y2, ym = y2;
  for (size_t i = 0; i < y2.size(); ++i) {
    const double h = 1e-6 * std::max(1.0, std::fabs(y2[i]));
    yp[i] += h;
    ym[i] -= h;
    dy2[i] = (Wat(r, yp) - Wat(r, ym)) / (2.0 * h);
    yp[i] = y2[i];
    ym[i] = y2[i];
  }
}

namespace {

// Low-r taper: C^{2m+1} rise from 0 to 1 on [0.1 r0, 0.5 r0]. Identically 1
// for r >= r0/2, so it never disturbs the declared critical point, and its
// high-order zero at the left end keeps V = W / r^{2m} bounded near r = 0.
struct Taper {
  double lo, span;
  Poly s, ds;
  double value(double r) const { return smoothstep(s, (r - lo) / span); }
  double deriv(double r) const {
    const double x = (r - lo) / span;
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return ds.eval(x) / span;
  }
};

Taper make_taper(const SpaceParams& sp, double r0) {
  Taper t;
  t.lo = 0.1 * r0;
  t.span = 0.4 * r0;
  t.s = smoothstep_poly(2 * sp.m + 1);
  t.ds = t.s.derivative();
  return t;
}

// Builds the Potential from a W-profile amp * T(r) * f(u) with
// u = (|r-r0|^2 + |y''-y0''|^2)/w^2 and shape callbacks f, f'.
Potential from_shape(const SpaceParams& sp, double r0, const Vec& y20,
                     double width, double amplitude,
                     std::function<double(double)> f,
                     std::function<double(double)> fp) {
  if (!(r0 > 0.0)) throw std::invalid_argument("preset: r0 must be > 0");
  if (!(width > 0.0)) throw std::invalid_argument("preset: width must be > 0");
  if (!(amplitude > 0.0))
    throw std::invalid_argument("preset: amplitude must be > 0");
  if (int(y20.size()) != sp.N - 3)
    throw std::invalid_argument("preset: y0'' must have dimension N - 3");
  Potential P;
  P.y2_dim = sp.N - 3;
  P.r0 = r0;
  P.y20 = y20;
  P.has_critical = true;
  const Taper T = make_taper(sp, r0);
  const double w2 = width * width;
  const double twom = 2.0 * sp.m;
  auto u_of = [=](double r, const Vec& y2) {
    double u = (r - r0) * (r - r0);
    for (size_t i = 0; i < y2.size(); ++i)
      u += (y2[i] - y20[i]) * (y2[i] - y20[i]);
    return u / w2;
  };
  P.V = [=](double r, const Vec& y2) {
    const double t = T.value(r);
    if (t == 0.0 || r <= 0.0) return 0.0;
    return amplitude * t * f(u_of(r, y2)) / std::pow(r, twom);
  };
  P.dV = [=](double r, const Vec& y2, double& dr, Vec& dy2) {
    dy2.assign(y2.size(), 0.0);
    dr = 0.0;
    const double t = T.value(r);
    if (t == 0.0 || r <= 0.0) return;
    const double u = u_of(r, y2);
    const double fv = f(u), fd = fp(u);
    const double rp = std::pow(r, twom);
    const double Wv = amplitude * t * fv;
    const double dWr =
        amplitude * (T.deriv(r) * fv + t * fd * 2.0 * (r - r0) / w2);
    dr = (dWr - twom * Wv / r) / rp;
    for (size_t i = 0; i < y2.size(); ++i)
      dy2[i] = amplitude * t * fd * 2.0 * (y2[i] - y20[i]) / w2 / rp;
  };
  return P;
}

}  // namespace

Potential preset_gaussian_well(const SpaceParams& sp, double r0, const Vec& y20,
                               double width, double amplitude) {
  return from_shape(
      sp, r0, y20, width, amplitude,
      [](double u) { return 2.0 - std::exp(-u); },
      [](double u) { return std::exp(-u); });
}

Potential preset_rational_well(const SpaceParams& sp, double r0, const Vec& y20,
                               double width, double amplitude) {
  return from_shape(
      sp, r0, y20, width, amplitude,
      [](double u) { return (1.0 + 2.0 * u) / (1.0 + u); },
      [](double u) { return 1.0 / ((1.0 + u) * (1.0 + u)); });
}

Potential preset_peak(const SpaceParams& sp, double r0, const Vec& y20,
                      double width, double amplitude) {
  return from_shape(
      sp, r0, y20, width, amplitude,
      [](double u) { return 1.0 / (1.0 + u); },
      [](double u) { return -1.0 / ((1.0 + u) * (1.0 + u)); });
}

Potential preset_saddle2d(const SpaceParams& sp, double r0, const Vec& y20,
                          double width, double amplitude) {
  if (sp.N < 4) throw std::invalid_argument("saddle2d: needs N >= 4");
  if (!(r0 > 0.0 && width > 0.0 && amplitude > 0.0))
    throw std::invalid_argument("saddle2d: r0, width, amplitude must be > 0");
  if (int(y20.size()) != sp.N - 3)
    throw std::invalid_argument("saddle2d: y0'' must have dimension N - 3");
  Potential P;
  P.y2_dim = sp.N - 3;
  P.r0 = r0;
  P.y20 = y20;
  P.has_critical = true;
  const Taper T = make_taper(sp, r0);
  const double w2 = width * width;
  const double twom = 2.0 * sp.m;
  P.V = [=](double r, const Vec& y2) {
    const double t = T.value(r);
    if (t == 0.0 || r <= 0.0) return 0.0;
    const double x = r - r0, y = y2[0] - y20[0];
    const double q = w2 + x * x + y * y;
    return amplitude * t * (1.0 + (x * x - y * y) / q) / std::pow(r, twom);
  };
  P.dV = [=](double r, const Vec& y2, double& dr, Vec& dy2) {
    dy2.assign(y2.size(), 0.0);
    dr = 0.0;
    const double t = T.value(r);
    if (t == 0.0 || r <= 0.0) return;
    const double x = r - r0, y = y2[0] - y20[0];
    const double q = w2 + x * x + y * y;
    const double g = (x * x - y * y) / q;
    const double gx = 2.0 * x * (w2 + 2.0 * y * y) / (q * q);
    const double gy = -2.0 * y * (w2 + 2.0 * x * x) / (q * q);
    const double rp = std::pow(r, twom);
    const double Wv = amplitude * t * (1.0 + g);
    const double dWr = amplitude * (T.deriv(r) * (1.0 + g) + t * gx);
    dr = (dWr - twom * Wv / r) / rp;
    dy2[0] = amplitude * t * gy / rp;
  };
  return P;
}

Potential preset_plateau(const SpaceParams& sp, double r0, const Vec& y20,
                         double amplitude) {
  // W = amp * T(r): r^{2m} V is exactly constant for r >= r0/2, so the
  // gradient equations hold identically and only the balance in t remains.
  // No isolated critical point, so the solver's proximity gate is off.
  Potential P = from_shape(
      sp, r0, y20, 1.0, amplitude, [](double) { return 1.0; },
      [](double) { return 0.0; });
  P.has_critical = false;
  return P;
}

Potential make_preset(const std::string& name, const SpaceParams& sp, double r0,
                      const Vec& y20, double width, double amplitude) {
  if (name == "gaussian_well")
    return preset_gaussian_well(sp, r0, y20, width, amplitude);
  if (name == "rational_well")
    return preset_rational_well(sp, r0, y20, width, amplitude);
  if (name == "peak") return preset_peak(sp, r0, y20, width, amplitude);
  if (name == "saddle2d") return preset_saddle2d(sp, r0, y20, width, amplitude);
  if (name == "plateau") return preset_plateau(sp, r0, y20, amplitude);
  throw std::invalid_argument(
      "unknown potential preset '" + name +
      "' (expected gaussian_well, rational_well, peak, saddle2d, plateau)");
}

namespace {

// Gradient of W restricted to the region's active coordinates.
Vec active_grad(const SpaceParams& sp, const Potential& P, const Vec& x,
                size_t q) {
  Vec y2 = P.y20;
  if (int(y2.size()) != P.y2_dim) y2.assign(size_t(P.y2_dim), 0.0);
  for (size_t i = 1; i < q; ++i) y2[i - 1] = x[i];
  double dr = 0.0;
  Vec dy2;
  P.grad_W(sp, x[0], y2, dr, dy2);
  Vec g(q);
  g[0] = dr;
  for (size_t i = 1; i < q; ++i) g[i] = dy2[i - 1];
  return g;
}

double fd_hessian_det(const SpaceParams& sp, const Potential& P, const Vec& x0,
                      size_t q) {
  auto Wat = [&](const Vec& x) {
    Vec y2 = P.y20;
    for (size_t i = 1; i < q; ++i) y2[i - 1] = x[i];
    return P.W(sp, x[0], y2);
  };
  std::vector<double> h(q);
  for (size_t i = 0; i < q; ++i) h[i] = 1e-4 * std::max(1.0, std::fabs(x0[i]));
  std::vector<std::vector<double>> H(q, std::vector<double>(q, 0.0));
  const double w0 = Wat(x0);
  for (size_t i = 0; i < q; ++i) {
    Vec xp = x0, xm = x0;
    xp[i] += h[i];
    xm[i] -= h[i];
    H[i][i] = (Wat(xp) - 2.0 * w0 + Wat(xm)) / (h[i] * h[i]);
    for (size_t j = i + 1; j < q; ++j) {
      Vec a = x0, b = x0, c = x0, d = x0;
      a[i] += h[i]; a[j] += h[j];
      b[i] += h[i]; b[j] -= h[j];
      c[i] -= h[i]; c[j] += h[j];
      d[i] -= h[i]; d[j] -= h[j];
      H[i][j] = H[j][i] =
          (Wat(a) - Wat(b) - Wat(c) + Wat(d)) / (4.0 * h[i] * h[j]);
    }
  }
  double scale = 0.0;
  for (size_t i = 0; i < q; ++i)
    for (size_t j = 0; j < q; ++j) scale = std::max(scale, std::fabs(H[i][j]));
  if (scale == 0.0) return 0.0;
  // determinant by Gaussian elimination with partial pivoting
  double det = 1.0;
  for (size_t col = 0; col < q; ++col) {
    size_t piv = col;
    for (size_t r = col + 1; r < q; ++r)
      if (std::fabs(H[r][col]) > std::fabs(H[piv][col])) piv = r;
    if (piv != col) {
      std::swap(H[piv], H[col]);
      det = -det;
    }
    if (H[col][col] == 0.0) return 0.0;
    det *= H[col][col];
    for (size_t r = col + 1; r < q; ++r) {
      const double f = H[r][col] / H[col][col];
      for (size_t cc = col; cc < q; ++cc) H[r][cc] -= f * H[col][cc];
    }
  }
  // normalized against the matrix scale so the caller's singularity test
  // is dimension-free
  return det / std::pow(scale, double(q));
}

}  // namespace

int degree_of_gradient(const SpaceParams& sp, const Potential& P,
                       const DegreeRegion& region) {
  const size_t q = region.lo.size();
  if (q == 0 || region.hi.size() != q)
    throw std::invalid_argument("degree_of_gradient: bad region dimensions");
  if (int(q) > 1 + P.y2_dim)
    throw std::invalid_argument("degree_of_gradient: region exceeds (r, y'')");
  for (size_t i = 0; i < q; ++i)
    if (!(region.lo[i] < region.hi[i]))
      throw std::invalid_argument("degree_of_gradient: need lo < hi");

  if (q == 1) {
    const double ga = active_grad(sp, P, {region.lo[0]}, 1)[0];
    const double gb = active_grad(sp, P, {region.hi[0]}, 1)[0];
    const double scale = std::max(std::fabs(ga), std::fabs(gb));
    if (scale == 0.0 || std::fabs(ga) < 1e-12 * scale ||
        std::fabs(gb) < 1e-12 * scale)
      throw std::runtime_error(
          "degree_of_gradient: gradient vanishes at an interval endpoint");
    const int sa = ga > 0 ? 1 : -1, sb = gb > 0 ? 1 : -1;
    return (sb - sa) / 2;
  }

  if (q == 2) {
    const int M = std::max(8, region.boundary_samples);
    std::vector<Vec> path;
    path.reserve(size_t(4 * M));
    auto push_edge = [&](Vec a, Vec b) {
      for (int i = 0; i < M; ++i) {
        const double t = double(i) / double(M);
        path.push_back(Vec{a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])});
      }
    };
    const Vec c00{region.lo[0], region.lo[1]}, c10{region.hi[0], region.lo[1]},
        c11{region.hi[0], region.hi[1]}, c01{region.lo[0], region.hi[1]};
    push_edge(c00, c10);
    push_edge(c10, c11);
    push_edge(c11, c01);
    push_edge(c01, c00);

    std::vector<Vec> gs(path.size());
    double gmax = 0.0;
    for (size_t i = 0; i < path.size(); ++i) {
      gs[i] = active_grad(sp, P, path[i], 2);
      gmax = std::max(gmax, std::hypot(gs[i][0], gs[i][1]));
    }
    double total = 0.0;
    for (size_t i = 0; i < gs.size(); ++i) {
      const Vec& g0 = gs[i];
      const Vec& g1 = gs[(i + 1) % gs.size()];
      const double n0 = std::hypot(g0[0], g0[1]);
      if (n0 < 1e-10 * gmax)
        throw std::runtime_error(
            "degree_of_gradient: gradient vanishes on the boundary near (r=" +
            std::to_string(path[i][0]) + ", y=" + std::to_string(path[i][1]) +
            ")");
      const double cross = g0[0] * g1[1] - g0[1] * g1[0];
      const double dot = g0[0] * g1[0] + g0[1] * g1[1];
      total += std::atan2(cross, dot);
    }
    return int(std::lround(total / (2.0 * M_PI)));
  }

  if (!P.has_critical)
    throw std::invalid_argument(
        "degree_of_gradient: dim >= 3 needs a declared critical point");
  Vec x0(q);
  x0[0] = P.r0;
  for (size_t i = 1; i < q; ++i) x0[i] = P.y20[i - 1];
  for (size_t i = 0; i < q; ++i)
    if (x0[i] < region.lo[i] || x0[i] > region.hi[i])
      throw std::invalid_argument(
          "degree_of_gradient: declared critical point outside region");
  const double ndet = fd_hessian_det(sp, P, x0, q);
  if (std::fabs(ndet) < 1e-8)
    throw std::runtime_error(
        "degree_of_gradient: Hessian numerically singular at the declared "
        "critical point");
  return ndet > 0 ? 1 : -1;
}

}  // namespace polybubble

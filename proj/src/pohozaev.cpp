#include "polybubble/pohozaev.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <numeric>
#include <stdexcept>

#include "polybubble/bubble.hpp"
#include "polybubble/rng.hpp"
#include "polybubble/tables.hpp"

namespace polybubble {

namespace {

double ipow(double x, int n) {
  if (n < 0) return 1.0 / ipow(x, -n);
  double out = 1.0, base = x;
  while (n > 0) {
    if (n & 1) out *= base;
    base *= base;
    n >>= 1;
  }
  return out;
}

double polyval(const std::vector<double>& c, double s) {
  double v = 0.0;
  for (size_t i = c.size(); i-- > 0;) v = v * s + c[i];
  return v;
}

std::vector<double> polyderiv(const std::vector<double>& c) {
  if (c.size() <= 1) return {};
  std::vector<double> d(c.size() - 1);
  for (size_t i = 1; i < c.size(); ++i) d[i - 1] = c[i] * double(i);
  return d;
}

// dst += a * s^shift * src
void polyaxpy(std::vector<double>& dst, double a,
              const std::vector<double>& src, int shift = 0) {
  if (a == 0.0 || src.empty()) return;
  if (dst.size() < src.size() + size_t(shift))
    dst.resize(src.size() + size_t(shift), 0.0);
  for (size_t i = 0; i < src.size(); ++i) dst[i + size_t(shift)] += a * src[i];
}

bool polyzero(const std::vector<double>& c) {
  for (double x : c)
    if (x != 0.0) return false;
  return true;
}

using PQ = std::map<std::pair<int, int>, double>;

void pq_add(PQ& m, int p, int q, double c) {
  if (c != 0.0) m[{p, q}] += c;
}

void pq_acc(PQ& dst, const PQ& src, double scale = 1.0, int dp = 0) {
  for (const auto& [k, c] : src) pq_add(dst, k.first + dp, k.second, scale * c);
}

// d/dr against the shared factor exp(-b((r-ar)^2 + (t-at)^2))
PQ pq_dr(const PQ& m, double b, double ar) {
  PQ out;
  for (const auto& [k, c] : m) {
    const auto [p, q] = k;
    if (p != 0) pq_add(out, p - 1, q, c * double(p));
    if (b != 0.0) {
      pq_add(out, p + 1, q, -2.0 * b * c);
      pq_add(out, p, q, 2.0 * b * ar * c);
    }
  }
  return out;
}

PQ pq_dt(const PQ& m, double b, double at) {
  PQ out;
  for (const auto& [k, c] : m) {
    const auto [p, q] = k;
    if (q != 0) pq_add(out, p, q - 1, c * double(q));
    if (b != 0.0) {
      pq_add(out, p, q + 1, -2.0 * b * c);
      pq_add(out, p, q, 2.0 * b * at * c);
    }
  }
  return out;
}

double gauss_factor(const SheetAtom& a, double r, double t) {
  if (a.b == 0.0) return 1.0;
  const double dr = r - a.ar, dt = t - a.at;
  return std::exp(-a.b * (dr * dr + dt * dt));
}

}  // namespace

// --- domain ----------------------------------------------------------------

BallDomain make_ball_domain(const CutoffProfile& cut, double rho) {
  if (!(rho > 2.0 * cut.delta) || !(rho < 5.0 * cut.delta))
    throw std::invalid_argument(
        "make_ball_domain: radius must lie in (2 delta, 5 delta)");
  if (!(rho < cut.r0))
    throw std::invalid_argument(
        "make_ball_domain: radius must keep the domain at positive r");
  return BallDomain{cut.r0, cut.y20, rho};
}

bool ball_contains(const BallDomain& dom, double r, const Vec& y2) {
  if (y2.size() != dom.y20.size())
    throw std::invalid_argument("ball_contains: tail dimension mismatch");
  double d2 = (r - dom.r0) * (r - dom.r0);
  for (size_t i = 0; i < y2.size(); ++i) {
    const double d = y2[i] - dom.y20[i];
    d2 += d * d;
  }
  return d2 <= dom.rho * dom.rho;
}

double ball_volume(const BallDomain& dom, int N) {
  // int over the (r, y'') ball of 4 pi r^2, with the D-ball second moment
  // int_{B_1} x_1^2 = V_D / (D + 2).
  const int D = N - 2;
  const double VD = std::pow(M_PI, 0.5 * D) / std::tgamma(0.5 * D + 1.0);
  const double rr = dom.rho;
  return 4.0 * M_PI * VD * std::pow(rr, D) *
         (dom.r0 * dom.r0 + rr * rr / double(D + 2));
}

// --- exact exponent cancellation -------------------------------------------

std::pair<long long, long long> dilation_exponent_deficit(
    const SpaceParams& sp) {
  // (2m - N)/2 + N / m*  with m* = m_star_num / m_star_den
  const long long num =
      (2LL * sp.m - sp.N) * sp.m_star_num + 2LL * sp.N * sp.m_star_den;
  const long long den = 2LL * sp.m_star_num;
  const long long g = std::gcd(num < 0 ? -num : num, den);
  if (g == 0) return {0, 1};
  return {num / g, den / g};
}

// --- whole-space ratio -------------------------------------------------------

WholeSpaceRatio whole_space_pohozaev_ratio(const SpaceParams& sp,
                                           double rel_tol) {
  if (!(rel_tol > 0.0))
    throw std::invalid_argument("whole_space_pohozaev_ratio: rel_tol <= 0");
  const CoeffTables ct(sp);
  const auto num_f = [&](double r) {
    const double r2 = r * r;
    return std::exp(bubble_log_value_r2(sp, 1.0, r2) +
                    polylaplacian_bubble_log_r2(sp, ct, 1.0, r2, sp.m));
  };
  const auto den_f = [&](double r) {
    return std::exp(sp.m_star * bubble_log_value_r2(sp, 1.0, r * r));
  };
  const double area = sphere_area(sp.N);

  const auto run = [&](const std::function<double(double)>& f) {
    QuadResult pilot =
        radial_integral(f, sp.N, std::max(1e-4 * f(1.0), 1e-120), 1.0);
    QuadResult fin = radial_integral(
        f, sp.N, std::max(rel_tol * std::fabs(pilot.value), 1e-280), 1.0);
    if (!fin.converged)
      throw std::runtime_error(
          "whole_space_pohozaev_ratio: radial quadrature did not converge");
    fin.value *= area;
    fin.error *= area;
    return fin;
  };
  const QuadResult num = run(num_f);
  const QuadResult den = run(den_f);

  WholeSpaceRatio out;
  out.numerator = num.value;
  out.denominator = den.value;
  out.ratio = num.value / den.value;
  out.quad_error = num.error / std::fabs(den.value) +
                   den.error * std::fabs(num.value) / (den.value * den.value);
  return out;
}

// --- axisymmetric test functions --------------------------------------------

AxisymTestFunction AxisymTestFunction::sheet(double amp, int p, int q,
                                             double b, double ar, double at) {
  if (!std::isfinite(amp) || !std::isfinite(b) || b < 0.0)
    throw std::invalid_argument("sheet: bad amplitude or width");
  if (q < 0) throw std::invalid_argument("sheet: t power must be >= 0");
  AxisymTestFunction f;
  SheetAtom a;
  a.b = b;
  a.ar = ar;
  a.at = at;
  pq_add(a.coef, p, q, amp);
  f.sheets_.push_back(std::move(a));
  return f;
}

AxisymTestFunction AxisymTestFunction::cap(double amp, double ar,
                                           double radius, int exponent) {
  if (!(radius > 0.0)) throw std::invalid_argument("cap: radius must be > 0");
  if (exponent < 1) throw std::invalid_argument("cap: exponent must be >= 1");
  AxisymTestFunction f;
  CapAtom a;
  a.ar = ar;
  a.R2 = radius * radius;
  // amp * ((R^2 - s)/R^2)^e so that amp is the peak value at the center
  std::vector<double> c(size_t(exponent) + 1, 0.0);
  for (int i = 0; i <= exponent; ++i) {
    const double sign = (i % 2 == 0) ? 1.0 : -1.0;
    c[size_t(i)] =
        amp * sign * double(binomial_int(exponent, i)) * ipow(a.R2, -i);
  }
  a.levels[0] = std::move(c);
  f.caps_.push_back(std::move(a));
  return f;
}

AxisymTestFunction& AxisymTestFunction::operator+=(
    const AxisymTestFunction& other) {
  sheets_.insert(sheets_.end(), other.sheets_.begin(), other.sheets_.end());
  caps_.insert(caps_.end(), other.caps_.begin(), other.caps_.end());
  return *this;
}

AxisymTestFunction AxisymTestFunction::laplacian(const SpaceParams& sp) const {
  AxisymTestFunction out;
  for (const auto& a : sheets_) {
    const PQ dr = pq_dr(a.coef, a.b, a.ar);
    PQ lap = pq_dr(dr, a.b, a.ar);  // d_rr
    pq_acc(lap, dr, 2.0, -1);       // (2/r) d_r
    const PQ dt = pq_dt(a.coef, a.b, a.at);
    pq_acc(lap, pq_dt(dt, a.b, a.at));  // d_tt
    if (!lap.empty()) {
      SheetAtom na;
      na.coef = std::move(lap);
      na.b = a.b;
      na.ar = a.ar;
      na.at = a.at;
      out.sheets_.push_back(std::move(na));
    }
  }
  for (const auto& a : caps_) {
    CapAtom na;
    na.ar = a.ar;
    na.R2 = a.R2;
    for (const auto& [j, q] : a.levels) {
      const auto q1 = polyderiv(q);
      const auto q2 = polyderiv(q1);
      auto& lj = na.levels[j];
      polyaxpy(lj, 4.0, q2, 1);                        // 4 s q''
      polyaxpy(lj, 2.0 * double(sp.N - 2 * j), q1);    // 2(N - 2j) q'
      polyaxpy(na.levels[j + 1], -4.0 * (1.0 - double(j)) * a.ar, q1);
      polyaxpy(na.levels[j + 2], double(j) * double(j - 1), q);
    }
    for (auto it = na.levels.begin(); it != na.levels.end();)
      it = polyzero(it->second) ? na.levels.erase(it) : std::next(it);
    if (!na.levels.empty()) out.caps_.push_back(std::move(na));
  }
  return out;
}

double AxisymTestFunction::value(double r, double t, double w) const {
  double v = 0.0;
  for (const auto& a : sheets_) {
    const double e = gauss_factor(a, r, t);
    double s = 0.0;
    for (const auto& [k, c] : a.coef)
      s += c * ipow(r, k.first) * ipow(t, k.second);
    v += e * s;
  }
  for (const auto& a : caps_) {
    const double dr = r - a.ar;
    const double s = dr * dr + t * t + w * w;
    if (a.R2 > 0.0 && s >= a.R2) continue;
    for (const auto& [j, q] : a.levels) v += ipow(r, -j) * polyval(q, s);
  }
  return v;
}

double AxisymTestFunction::t_derivative(double r, double t, double w) const {
  double v = 0.0;
  for (const auto& a : sheets_) {
    const double e = gauss_factor(a, r, t);
    double s = 0.0;
    for (const auto& [k, c] : a.coef) {
      const double rp = ipow(r, k.first);
      double term = 0.0;
      if (k.second != 0) term += double(k.second) * ipow(t, k.second - 1);
      if (a.b != 0.0) term += -2.0 * a.b * (t - a.at) * ipow(t, k.second);
      s += c * rp * term;
    }
    v += e * s;
  }
  for (const auto& a : caps_) {
    const double dr = r - a.ar;
    const double s = dr * dr + t * t + w * w;
    if (a.R2 > 0.0 && s >= a.R2) continue;
    for (const auto& [j, q] : a.levels)
      v += ipow(r, -j) * 2.0 * t * polyval(polyderiv(q), s);
  }
  return v;
}

double AxisymTestFunction::dilation_term(double r, double t, double w) const {
  double v = 0.0;
  for (const auto& a : sheets_) {
    const double e = gauss_factor(a, r, t);
    double s = 0.0;
    for (const auto& [k, c] : a.coef) {
      // r d_r: p r^p - 2b(r - ar) r^(p+1), all times t^q
      double term = double(k.first) * ipow(r, k.first);
      if (a.b != 0.0) term += -2.0 * a.b * (r - a.ar) * ipow(r, k.first + 1);
      term *= ipow(t, k.second);
      // t d_t: q t^q - 2b(t - at) t^(q+1), all times r^p
      double tt = 0.0;
      if (k.second != 0) tt += double(k.second) * ipow(t, k.second);
      if (a.b != 0.0) tt += -2.0 * a.b * (t - a.at) * ipow(t, k.second + 1);
      term += tt * ipow(r, k.first);
      s += c * term;
    }
    v += e * s;
  }
  for (const auto& a : caps_) {
    const double dr = r - a.ar;
    const double s = dr * dr + t * t + w * w;
    if (a.R2 > 0.0 && s >= a.R2) continue;
    for (const auto& [j, q] : a.levels) {
      const double qs = polyval(q, s);
      const double dqs = polyval(polyderiv(q), s);
      v += ipow(r, -j) *
           (2.0 * dqs * (r * dr + t * t + w * w) - double(j) * qs);
    }
  }
  return v;
}

// --- ball-domain quadrature --------------------------------------------------

namespace {

struct BallQuad {
  double value = 0.0;
  double error = 0.0;
  bool converged = true;
};

BallQuad lifted_quad(const std::function<double(double, double, double)>& f,
                     const BallDomain& dom, int N, bool w_flat, double abs_tol,
                     bool absolute) {
  const int d = N - 4;  // transverse tail dimension
  const double sig = sphere_area(d);
  const double rho = dom.rho;
  const double rmax = dom.r0 + rho;
  const double tol_mid = 0.15 * abs_tol / (2.0 * rho);
  const double tol_in =
      0.15 * tol_mid / (2.0 * rho * 4.0 * M_PI * rmax * rmax + 1.0);
  bool ok = true;

  const auto outer = [&](double u) -> double {
    const double T2 = rho * rho - u * u;
    if (T2 <= 0.0) return 0.0;
    const double T = std::sqrt(T2);
    const double r = dom.r0 + u;
    const auto mid = [&](double t) -> double {
      const double W2 = T2 - t * t;
      if (W2 <= 0.0) return 0.0;
      double core;
      if (w_flat) {
        core = f(r, t, 0.0);
        if (absolute) core = std::fabs(core);
        core *= sig * std::pow(W2, 0.5 * d) / double(d);
      } else {
        const double W = std::sqrt(W2);
        const auto in = [&](double w) {
          double v = f(r, t, w);
          if (absolute) v = std::fabs(v);
          return v * sig * std::pow(w, d - 1);
        };
        const QuadResult qi =
            integrate(in, 0.0, W, std::max(tol_in, 1e-300), 400);
        ok = ok && qi.converged;
        core = qi.value;
      }
      return 4.0 * M_PI * r * r * core;
    };
    const QuadResult qm = integrate(mid, -T, T, std::max(tol_mid, 1e-300), 800);
    ok = ok && qm.converged;
    return qm.value;
  };
  const QuadResult qo =
      integrate(outer, -rho, rho, std::max(0.7 * abs_tol, 1e-300), 1200);
  return BallQuad{qo.value, qo.error + 0.3 * abs_tol, ok && qo.converged};
}

double integrand_scale(const std::function<double(double, double, double)>& f,
                       const BallDomain& dom) {
  static const double fu[7] = {-0.85, -0.5, -0.2, 0.0, 0.25, 0.55, 0.9};
  static const double fw[3] = {0.0, 0.5, 0.9};
  double S = 0.0;
  for (double a : fu)
    for (double b : fu) {
      const double u = a * dom.rho;
      const double t = b * dom.rho;
      const double W2 = dom.rho * dom.rho - u * u - t * t;
      if (W2 <= 0.0) continue;
      for (double c : fw) {
        const double v = f(dom.r0 + u, t, c * std::sqrt(W2));
        if (std::isfinite(v)) S = std::max(S, std::fabs(v));
      }
    }
  return S;
}

BallQuad ball_integral_impl(
    const std::function<double(double, double, double)>& f,
    const BallDomain& dom, int N, bool w_flat, double rel_tol) {
  const double vol = ball_volume(dom, N);
  const double S = integrand_scale(f, dom);
  if (S == 0.0) return BallQuad{0.0, 0.0, true};
  // two positive passes pin the absolute scale, the third integrates f
  BallQuad mass =
      lifted_quad(f, dom, N, w_flat, std::max(1e-2 * S * vol, 1e-300), true);
  mass = lifted_quad(f, dom, N, w_flat,
                     std::max(1e-2 * std::fabs(mass.value), 1e-300), true);
  const double scale = std::max(std::fabs(mass.value), 1e-300);
  BallQuad out =
      lifted_quad(f, dom, N, w_flat, std::max(rel_tol * scale, 1e-300), false);
  out.converged = out.converged && mass.converged;
  return out;
}

}  // namespace

double ball_integral(const std::function<double(double, double, double)>& f,
                     const BallDomain& dom, const SpaceParams& sp,
                     bool w_constant, double rel_tol) {
  const BallQuad q = ball_integral_impl(f, dom, sp.N, w_constant, rel_tol);
  if (!q.converged)
    throw std::runtime_error("ball_integral: quadrature did not converge");
  return q.value;
}

// --- boundary locality --------------------------------------------------------

namespace {

AxisymTestFunction iterate_laplacian(const AxisymTestFunction& f,
                                     const SpaceParams& sp) {
  AxisymTestFunction out = f;
  for (int l = 0; l < sp.m; ++l) out = out.laplacian(sp);
  return out;
}

void require_boundary_agreement(const LocalityPair& p1, const LocalityPair& p2,
                                const BallDomain& dom) {
  static const double fr[3] = {0.92, 0.96, 1.0};
  static const double psi[3] = {0.0, 0.6, 1.25};
  double scale = 0.0, worst = 0.0;
  const auto look = [&](double r, double t, double w, bool shell) {
    const double u1 = p1.u.value(r, t, w), u2 = p2.u.value(r, t, w);
    const double v1 = p1.v.value(r, t, w), v2 = p2.v.value(r, t, w);
    scale = std::max({scale, std::fabs(u1), std::fabs(u2), std::fabs(v1),
                      std::fabs(v2)});
    if (shell) worst = std::max({worst, std::fabs(u1 - u2), std::fabs(v1 - v2)});
  };
  look(dom.r0, 0.0, 0.0, false);
  look(dom.r0 + 0.4 * dom.rho, 0.0, 0.0, false);
  look(dom.r0, 0.4 * dom.rho, 0.0, false);
  look(dom.r0, 0.0, 0.4 * dom.rho, false);
  look(dom.r0 - 0.3 * dom.rho, 0.2 * dom.rho, 0.1 * dom.rho, false);
  for (double s : fr)
    for (int a = 0; a < 8; ++a)
      for (double p : psi) {
        const double th = 0.25 * M_PI * double(a) + 0.11;
        const double cp = std::cos(p);
        const double u = s * dom.rho * std::cos(th) * cp;
        const double t = s * dom.rho * std::sin(th) * cp;
        const double w = s * dom.rho * std::sin(p);
        look(dom.r0 + u, t, w, true);
      }
  if (worst > 1e-9 * std::max(scale, 1e-300))
    throw std::invalid_argument(
        "boundary_locality_check: pairs differ near the domain boundary");
}

bool pair_w_flat(const LocalityPair& p) {
  return !p.u.w_dependent() && !p.v.w_dependent();
}

}  // namespace

LocalityValues boundary_locality_check(const LocalityPair& pair1,
                                       const LocalityPair& pair2,
                                       const BallDomain& dom, int axis,
                                       const SpaceParams& sp, double rel_tol) {
  if (axis < 0 || axis > sp.N - 4)
    throw std::invalid_argument("boundary_locality_check: axis out of range");
  if (dom.y20.size() != size_t(sp.N - 3))
    throw std::invalid_argument("boundary_locality_check: domain dimension");
  require_boundary_agreement(pair1, pair2, dom);

  const double sign = (sp.m % 2 == 0) ? 1.0 : -1.0;
  const auto flux = [&](const LocalityPair& p) {
    const AxisymTestFunction lu = iterate_laplacian(p.u, sp);
    const AxisymTestFunction lv = iterate_laplacian(p.v, sp);
    const auto f = [&, lu, lv](double r, double t, double w) {
      return sign * (lu.value(r, t, w) * p.v.t_derivative(r, t, w) +
                     lv.value(r, t, w) * p.u.t_derivative(r, t, w));
    };
    return ball_integral_impl(f, dom, sp.N, pair_w_flat(p), rel_tol);
  };
  const BallQuad q1 = flux(pair1);
  const BallQuad q2 = flux(pair2);
  if (!q1.converged || !q2.converged)
    throw std::runtime_error(
        "boundary_locality_check: quadrature did not converge");
  return LocalityValues{q1.value, q2.value, q1.error + q2.error};
}

DilationValues boundary_dilation_check(const LocalityPair& pair1,
                                       const LocalityPair& pair2,
                                       const BallDomain& dom,
                                       const SpaceParams& sp, double rel_tol) {
  for (double c : dom.y20)
    if (c != 0.0)
      throw std::invalid_argument(
          "boundary_dilation_check: tail anchor must sit at the origin");
  require_boundary_agreement(pair1, pair2, dom);

  const double sign = (sp.m % 2 == 0) ? 1.0 : -1.0;
  struct Parts {
    BallQuad raw, vol;
  };
  const auto parts = [&](const LocalityPair& p) {
    const AxisymTestFunction lu = iterate_laplacian(p.u, sp);
    const AxisymTestFunction lv = iterate_laplacian(p.v, sp);
    const bool flat = pair_w_flat(p);
    const auto raw_f = [&, lu, lv](double r, double t, double w) {
      return sign * (lu.value(r, t, w) * p.v.dilation_term(r, t, w) +
                     lv.value(r, t, w) * p.u.dilation_term(r, t, w));
    };
    const auto vol_f = [&, lu, lv](double r, double t, double w) {
      return sign * (p.v.value(r, t, w) * lu.value(r, t, w) +
                     p.u.value(r, t, w) * lv.value(r, t, w));
    };
    Parts out;
    out.raw = ball_integral_impl(raw_f, dom, sp.N, flat, rel_tol);
    out.vol = ball_integral_impl(vol_f, dom, sp.N, flat, rel_tol);
    if (!out.raw.converged || !out.vol.converged)
      throw std::runtime_error(
          "boundary_dilation_check: quadrature did not converge");
    return out;
  };
  const Parts a = parts(pair1);
  const Parts b = parts(pair2);
  const double half = 0.5 * double(sp.N - 2 * sp.m);

  DilationValues out;
  out.volume1 = a.vol.value;
  out.volume2 = b.vol.value;
  out.value1 = a.raw.value + half * a.vol.value;
  out.value2 = b.raw.value + half * b.vol.value;
  out.quad_error =
      a.raw.error + b.raw.error + half * (a.vol.error + b.vol.error);
  return out;
}

// --- concentrated mass ---------------------------------------------------------

WeightedMass weighted_mass_check(
    const std::function<double(double, const Vec&)>& h, const AnsatzZ& az,
    const BallDomain& dom, std::size_t n_samples, uint64_t seed) {
  if (n_samples == 0)
    throw std::invalid_argument("weighted_mass_check: need samples");
  if (az.centers.empty())
    throw std::invalid_argument("weighted_mass_check: ansatz has no centers");
  const SpaceParams& sp = az.sp;
  const int N = sp.N;
  const double lam = az.lambda;
  const size_t k2 = az.centers.size();

  // all centers share one (r, y'') projection; read it off the first
  double rb = 0.0;
  for (int c = 0; c < 3; ++c) rb += az.centers[0][size_t(c)] * az.centers[0][size_t(c)];
  rb = std::sqrt(rb);
  Vec y2b(az.centers[0].begin() + 3, az.centers[0].end());

  const double predicted = double(k2) * std::pow(lam, -2.0 * sp.m) *
                           h(rb, y2b) * integral_U2(sp, 1.0).closed_form;

  // mixture density of the normalized bubble-core profile
  //   q(y) = lam^N / (Znorm k2) sum_j (1 + lam^2 |y - x_j|^2)^-(N-2m),
  //   Znorm = pi^(N/2) Gamma((N-4m)/2) / Gamma(N-2m)
  const double log_znorm = 0.5 * N * std::log(M_PI) +
                           std::lgamma(0.5 * double(N - 4 * sp.m)) -
                           std::lgamma(double(N - 2 * sp.m));
  const double gam = double(N - 2 * sp.m);
  const double lamN = double(N) * std::log(lam);

  const size_t nstr = 8;
  const size_t per = (n_samples + nstr - 1) / nstr;
  const Rng root(seed);

  struct Stratum {
    double mean = 0.0, m2 = 0.0;
    size_t n = 0;
  };
  std::vector<std::future<Stratum>> fs;
  for (size_t sidx = 0; sidx < nstr; ++sidx) {
    fs.push_back(std::async(std::launch::async, [&, sidx]() {
      Rng r = root.fork(sidx + 101);
      Stratum st;
      Vec y(size_t(N), 0.0);
      Vec y2(size_t(N - 3), 0.0);
      for (size_t i = 0; i < per; ++i) {
        const size_t j = std::min(k2 - 1, size_t(r.uniform() * double(k2)));
        const double x = r.beta(0.5 * N, 0.5 * double(N - 4 * sp.m));
        const double rad = std::sqrt(x / (1.0 - x)) / lam;
        const Vec dir = r.unit_vector(size_t(N));
        for (int c = 0; c < N; ++c)
          y[size_t(c)] = az.centers[j][size_t(c)] + rad * dir[size_t(c)];
        double rr = 0.0;
        for (int c = 0; c < 3; ++c) rr += y[size_t(c)] * y[size_t(c)];
        rr = std::sqrt(rr);
        for (int c = 3; c < N; ++c) y2[size_t(c - 3)] = y[size_t(c)];
        double g = 0.0;
        if (ball_contains(dom, rr, y2)) {
          double dens = 0.0;  // sum of the 2k core factors
          for (size_t l = 0; l < k2; ++l) {
            const double d2 = dist2(y, az.centers[l]);
            dens += std::exp(-gam * std::log1p(lam * lam * d2));
          }
          const double q =
              std::exp(lamN - log_znorm) * dens / double(k2);
          const double Z = az.value(y);
          g = h(rr, y2) * Z * Z / q;
        }
        st.n += 1;
        const double dlt = g - st.mean;
        st.mean += dlt / double(st.n);
        st.m2 += dlt * (g - st.mean);
      }
      return st;
    }));
  }

  Stratum tot;
  for (auto& f : fs) {
    const Stratum st = f.get();
    if (st.n == 0) continue;
    const double dlt = st.mean - tot.mean;
    const size_t n = tot.n + st.n;
    tot.mean += dlt * double(st.n) / double(n);
    tot.m2 += st.m2 + dlt * dlt * double(tot.n) * double(st.n) / double(n);
    tot.n = n;
  }

  WeightedMass out;
  out.estimate = tot.mean;
  out.std_error =
      tot.n > 1 ? std::sqrt(tot.m2 / double(tot.n - 1) / double(tot.n)) : 0.0;
  out.predicted = predicted;
  out.samples = tot.n;
  return out;
}

// --- canned report ---------------------------------------------------------------

std::vector<CheckRow> pohozaev_report(const SpaceParams& sp, double r0,
                                      double delta, double rho,
                                      std::size_t n_samples, uint64_t seed) {
  std::vector<CheckRow> rows;
  const Vec zero2(size_t(sp.N - 3), 0.0);
  const CutoffProfile cut = make_cutoff(sp, r0, zero2, delta);
  const BallDomain dom = make_ball_domain(cut, rho);
  const double s = rho / 0.35;  // atom offsets track the window size

  {
    const WholeSpaceRatio ws = whole_space_pohozaev_ratio(sp);
    rows.push_back({"whole-space dilation ratio", ws.ratio, 1.0, 1e-6,
                    std::fabs(ws.ratio - 1.0) <= 1e-6});
  }
  {
    const auto [num, den] = dilation_exponent_deficit(sp);
    rows.push_back({"volume scaling exponent", double(num) / double(den), 0.0,
                    0.0, num == 0});
  }

  LocalityPair p1;
  p1.u = AxisymTestFunction::sheet(1.0, 0, 0, 6.0, dom.r0 + 0.06 * s, 0.03 * s);
  p1.u += AxisymTestFunction::sheet(0.5, 1, 1, 6.0, dom.r0 + 0.06 * s, 0.03 * s);
  p1.v = AxisymTestFunction::sheet(0.8, 0, 1, 5.0, dom.r0 - 0.04 * s, -0.05 * s);
  p1.v += AxisymTestFunction::sheet(0.3, 2, 0, 5.0, dom.r0 - 0.04 * s, -0.05 * s);
  {
    LocalityPair p2 = p1;
    p2.u += AxisymTestFunction::cap(2e-3, dom.r0 + 0.2 * dom.rho,
                                    0.5 * dom.rho, 2 * sp.m + 3);
    const LocalityValues lv = boundary_locality_check(p1, p2, dom, 0, sp);
    const double scale =
        std::max({std::fabs(lv.value1), std::fabs(lv.value2), 1e-300});
    rows.push_back({"flux locality, smooth pair", lv.value1, lv.value2,
                    1e-6 * scale,
                    std::fabs(lv.value1 - lv.value2) <= 1e-6 * scale});
  }
  {
    LocalityPair q1;
    q1.u = AxisymTestFunction::sheet(0.9, 1, 0, 4.0, dom.r0 - 0.02 * s, 0.06 * s);
    q1.u += AxisymTestFunction::sheet(0.4, 0, 2, 4.0, dom.r0 - 0.02 * s, 0.06 * s);
    q1.v = AxisymTestFunction::sheet(1.1, 0, 1, 7.0, dom.r0 + 0.03 * s, -0.02 * s);
    LocalityPair q2 = q1;
    q2.v += AxisymTestFunction::cap(1e-3, dom.r0, 0.6 * dom.rho, 2 * sp.m + 3);
    q2.u += AxisymTestFunction::cap(-8e-4, dom.r0 - 0.15 * dom.rho,
                                    0.4 * dom.rho, 2 * sp.m + 4);
    const LocalityValues lv = boundary_locality_check(q1, q2, dom, 0, sp, 1e-7);
    const double scale =
        std::max({std::fabs(lv.value1), std::fabs(lv.value2), 1e-300});
    rows.push_back({"flux locality, interior bump", lv.value1, lv.value2,
                    1e-6 * scale,
                    std::fabs(lv.value1 - lv.value2) <= 1e-6 * scale});
  }
  {
    LocalityPair p2 = p1;
    p2.u += AxisymTestFunction::cap(2e-3, dom.r0, 0.55 * dom.rho, 2 * sp.m + 3);
    p2.v += AxisymTestFunction::cap(-1.5e-3, dom.r0 + 0.1 * dom.rho,
                                    0.45 * dom.rho, 2 * sp.m + 3);
    const DilationValues dv = boundary_dilation_check(p1, p2, dom, sp);
    const double scale =
        std::max({std::fabs(dv.value1), std::fabs(dv.value2), 1e-300});
    rows.push_back({"dilation flux, volume corrected", dv.value1, dv.value2,
                    1e-6 * scale,
                    std::fabs(dv.value1 - dv.value2) <= 1e-6 * scale});
  }

  DoubledCircleConfig cfg;
  cfg.k = 4;
  cfg.r_bar = r0;
  cfg.h_bar = 0.5;
  cfg.y2_bar = zero2;
  const AnsatzZ az = make_ansatz(sp, cfg, 1000.0, cut);
  {
    const auto one = [](double, const Vec&) { return 1.0; };
    const WeightedMass wm = weighted_mass_check(one, az, dom, n_samples, seed);
    // the concentration rule is asymptotic: the relative deviation decays
    // like lambda^-2, about 1e-4 at lambda = 1000, on top of sampling noise
    const double tol = 3.0 * wm.std_error + 5e-4 * std::fabs(wm.predicted);
    rows.push_back({"concentrated mass, constant weight", wm.estimate,
                    wm.predicted, tol,
                    std::fabs(wm.estimate - wm.predicted) <= tol});

    const auto vanish = [r0](double r, const Vec& y2) {
      double q = (r - r0) * (r - r0);
      for (double c : y2) q += c * c;
      return q;
    };
    const WeightedMass w0 =
        weighted_mass_check(vanish, az, dom, std::max<std::size_t>(n_samples / 4, 1), seed);
    const double tol0 = 2e-3 * std::fabs(wm.predicted);
    rows.push_back({"concentrated mass, vanishing weight", w0.estimate, 0.0,
                    tol0, std::fabs(w0.estimate) <= tol0});
  }
  return rows;
}

std::string check_rows_csv(const std::vector<CheckRow>& rows) {
  std::string out = "name,value,predicted,tolerance,pass\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%s,%.12g,%.12g,%.12g,%s\n", r.name.c_str(),
                  r.value, r.predicted, r.tolerance, r.pass ? "true" : "false");
    out += buf;
  }
  return out;
}

}  // namespace polybubble

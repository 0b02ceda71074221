#include "polybubble/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <vector>

#include "polybubble/bubble.hpp"
#include "polybubble/tables.hpp"

namespace polybubble {

namespace {

// Gauss-Kronrod 7/15 nodes and weights on [-1, 1] (positive half; the rule
// is symmetric). Even-indexed Kronrod nodes coincide with the Gauss-7 nodes.
constexpr double kXgk[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

constexpr double kWgk[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

constexpr double kWg[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Segment {
  double a, b;
  double value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  double fv[15];
  for (int i = 0; i < 7; ++i) {
    fv[i] = f(c - h * kXgk[i]);
    fv[14 - i] = f(c + h * kXgk[i]);
  }
  fv[7] = f(c);

  double resk = 0.0, resg = 0.0;
  for (int i = 0; i < 7; ++i) resk += kWgk[i] * (fv[i] + fv[14 - i]);
  resk += kWgk[7] * fv[7];
  for (int i = 0; i < 3; ++i) resg += kWg[i] * (fv[2 * i + 1] + fv[13 - 2 * i]);
  resg += kWg[3] * fv[7];

  // Scale-free error estimate in the QUADPACK style: compare |K - G| against
  // the variation of f about its mean over the interval.
  const double mean = 0.5 * resk;
  double resasc = 0.0;
  for (int i = 0; i < 7; ++i)
    resasc += kWgk[i] * (std::fabs(fv[i] - mean) + std::fabs(fv[14 - i] - mean));
  resasc += kWgk[7] * std::fabs(fv[7] - mean);
  resasc *= std::fabs(h);

  double err = std::fabs(resk - resg) * std::fabs(h);
  if (resasc != 0.0 && err != 0.0)
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  return Segment{a, b, resk * h, err};
}

}  // namespace

QuadResult integrate(const std::function<double(double)>& f, double a, double b,
                     double abs_tol, int max_intervals) {
  if (!(abs_tol > 0.0)) throw std::invalid_argument("integrate: abs_tol must be > 0");
  if (!(b > a)) {
    if (a == b) return QuadResult{0.0, 0.0, true, 0};
    throw std::invalid_argument("integrate: need a <= b");
  }
  std::priority_queue<Segment> heap;
  Segment s0 = gk15(f, a, b);
  double total = s0.value;
  double total_err = s0.error;
  heap.push(s0);
  int n = 1;
  const double min_width = (b - a) * 1e-14;
  while (total_err > abs_tol && n < max_intervals) {
    Segment worst = heap.top();
    if (worst.b - worst.a < min_width) break;  // refinement exhausted
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Segment l = gk15(f, worst.a, mid);
    Segment r = gk15(f, mid, worst.b);
    total += l.value + r.value - worst.value;
    total_err += l.error + r.error - worst.error;
    heap.push(l);
    heap.push(r);
    ++n;
  }
  return QuadResult{total, total_err, total_err <= abs_tol, n};
}

double sphere_area(int N) {
  if (N < 1) throw std::invalid_argument("sphere_area: N must be >= 1");
  return 2.0 * std::exp(0.5 * N * std::log(M_PI) - std::lgamma(0.5 * N));
}

double beta_function(double a, double b) {
  return std::exp(std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

namespace {

// Weight r^(N-1) dr under r = s tan(theta): s^N tan^(N-1) sec^2. Direct
// product below the overflow range, log-evaluated past it (the integrand
// must decay there anyway; a zero f short-circuits).
double mapped_radial(const std::function<double(double)>& f, int N, double s,
                     double theta) {
  const double t = std::tan(theta);
  if (!(t > 0.0) || !std::isfinite(t)) return 0.0;
  const double r = s * t;
  const double y = f(r);
  if (y == 0.0 || !std::isfinite(y)) return 0.0;
  if (t < 1e6) {
    return y * std::pow(s, N) * std::pow(t, N - 1) * (1.0 + t * t);
  }
  const double logw =
      N * std::log(s) + (N - 1) * std::log(t) + std::log1p(t * t);
  return std::copysign(std::exp(std::log(std::fabs(y)) + logw), y);
}

}  // namespace

QuadResult radial_integral(const std::function<double(double)>& f, int N,
                           double abs_tol, double scale, int max_intervals) {
  if (N < 1) throw std::invalid_argument("radial_integral: N must be >= 1");
  if (!(scale > 0.0)) throw std::invalid_argument("radial_integral: scale must be > 0");
  auto g = [&](double theta) { return mapped_radial(f, N, scale, theta); };
  return integrate(g, 0.0, 0.5 * M_PI, abs_tol, max_intervals);
}

QuadResult axisym_integral(const std::function<double(double, double)>& g,
                           int N, double abs_tol, double scale_z,
                           double scale_rho) {
  if (N < 2) throw std::invalid_argument("axisym_integral: N must be >= 2");
  const double area = sphere_area(N - 1);
  // Inner integrals are resolved a couple of decades below the outer target
  // so the outer error estimate is not polluted by inner noise.
  const double inner_tol = abs_tol * 0.01 / area;
  QuadResult inner_worst{};
  auto outer_f = [&](double phi) {
    // z = scale_z * tan(phi), phi in (-pi/2, pi/2)
    const double tz = std::tan(phi);
    if (!std::isfinite(tz)) return 0.0;
    const double z = scale_z * tz;
    auto slice = [&](double rho) { return g(z, rho); };
    QuadResult in = radial_integral(slice, N - 1, inner_tol, scale_rho);
    if (in.error > inner_worst.error) inner_worst = in;
    return in.value * scale_z * (1.0 + tz * tz);
  };
  QuadResult out =
      integrate(outer_f, -0.5 * M_PI, 0.5 * M_PI, abs_tol / area, 8000);
  out.value *= area;
  out.error = out.error * area + inner_worst.error * area * 3.0;
  out.converged = out.converged && out.error <= abs_tol * 10.0;
  return out;
}

double DualValue::rel_delta() const {
  const double ref = std::max(std::fabs(closed_form), std::fabs(quadrature));
  if (ref == 0.0) return 0.0;
  return std::fabs(closed_form - quadrature) / ref;
}

namespace {

// int_0^inf r^(N-1) (1 + r^2)^(-q) dr = (1/2) B(N/2, q - N/2), for q > N/2.
double half_beta_moment(int N, double q) {
  return 0.5 * beta_function(0.5 * N, q - 0.5 * N);
}

}  // namespace

DualValue integral_U2(const SpaceParams& sp, double lambda,
                      double abs_tol_rel) {
  if (sp.N <= 4 * sp.m)
    throw std::invalid_argument("integral_U2: needs N > 4m for convergence");
  const double P = bubble_normalization(sp);
  const double c2 = double(sp.N - 2 * sp.m) / (2.0 * sp.m);  // P-exponent of U^2
  const double pref = std::exp(c2 * std::log(P));
  DualValue d;
  d.closed_form = pref * std::pow(lambda, -2.0 * sp.m) * sphere_area(sp.N) *
                  half_beta_moment(sp.N, double(sp.N - 2 * sp.m));
  Bubble b{Vec(1, 0.0), lambda};
  auto f = [&](double r) {
    const double u = bubble_value(sp, b, Vec{r});
    return u * u;
  };
  QuadResult q = radial_integral(f, sp.N, abs_tol_rel * std::fabs(d.closed_form),
                                 1.0 / lambda);
  d.quadrature = q.value * sphere_area(sp.N);
  d.quad_error = q.error * sphere_area(sp.N);
  d.converged = q.converged;
  return d;
}

DualValue integral_Umstar_minus1(const SpaceParams& sp, double lambda,
                                 double abs_tol_rel) {
  const double P = bubble_normalization(sp);
  const double cexp = double(sp.N + 2 * sp.m) / (4.0 * sp.m);  // P-exponent of U^(m*-1)
  const double pref = std::exp(cexp * std::log(P));
  DualValue d;
  d.closed_form = pref * std::pow(lambda, -0.5 * (sp.N - 2 * sp.m)) *
                  sphere_area(sp.N) * half_beta_moment(sp.N, 0.5 * (sp.N + 2 * sp.m));
  Bubble b{Vec(1, 0.0), lambda};
  const double pw = double(sp.m_star_num) / double(sp.m_star_den) - 1.0;
  auto f = [&](double r) {
    const double lu = bubble_log_value(sp, b, Vec{r});
    return std::exp(pw * lu);
  };
  QuadResult q = radial_integral(f, sp.N, abs_tol_rel * std::fabs(d.closed_form),
                                 1.0 / lambda);
  d.quadrature = q.value * sphere_area(sp.N);
  d.quad_error = q.error * sphere_area(sp.N);
  d.converged = q.converged;
  return d;
}

}  // namespace polybubble

#include "polybubble/config_geometry.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace polybubble {

void DoubledCircleConfig::validate() const {
  if (k < 2) throw std::invalid_argument("DoubledCircleConfig: k must be >= 2");
  if (!(r_bar > 0.0))
    throw std::invalid_argument("DoubledCircleConfig: r_bar must be > 0");
  if (!(h_bar > 0.0 && h_bar < 1.0))
    throw std::invalid_argument("DoubledCircleConfig: h_bar must be in (0,1)");
}

double DoubledCircleConfig::circle_radius() const {
  return r_bar * std::sqrt((1.0 - h_bar) * (1.0 + h_bar));
}

double DoubledCircleConfig::chord_same(int j) const {
  if (j < 1 || j > k) throw std::out_of_range("chord_same: j in 1..k");
  return 2.0 * circle_radius() * std::sin(double(j - 1) * M_PI / double(k));
}

double DoubledCircleConfig::cross_distance(int j) const {
  if (j < 1 || j > k) throw std::out_of_range("cross_distance: j in 1..k");
  const double c = chord_same(j);
  const double v = 2.0 * r_bar * h_bar;
  return std::hypot(c, v);
}

std::vector<Vec> points(const SpaceParams& sp, const DoubledCircleConfig& cfg) {
  cfg.validate();
  if (int(cfg.y2_bar.size()) != sp.N - 3)
    throw std::invalid_argument("points: y2_bar must have dimension N - 3");
  const double R = cfg.circle_radius();
  const double z = cfg.r_bar * cfg.h_bar;
  std::vector<Vec> pts;
  pts.reserve(2 * size_t(cfg.k));
  for (int sgn : {+1, -1}) {
    for (int j = 1; j <= cfg.k; ++j) {
      const double th = 2.0 * double(j - 1) * M_PI / double(cfg.k);
      Vec p(size_t(sp.N));
      p[0] = R * std::cos(th);
      p[1] = R * std::sin(th);
      p[2] = sgn * z;
      for (int i = 3; i < sp.N; ++i) p[size_t(i)] = cfg.y2_bar[size_t(i - 3)];
      pts.push_back(std::move(p));
    }
  }
  return pts;
}

RegimeScales regime_scales(double lambda, int k, const RegimeParams& rp,
                           const SpaceParams& sp) {
  sp.require_full_pipeline("regime_scales");
  if (!(lambda > 0.0))
    throw std::invalid_argument("regime_scales: lambda must be > 0");
  if (k < 2) throw std::invalid_argument("regime_scales: k must be >= 2");
  if (rp.case_id < 1 || rp.case_id > 3)
    throw std::invalid_argument("regime_scales: case_id must be 1, 2 or 3");
  if (!(rp.L0 > 0.0 && rp.L1 > rp.L0))
    throw std::invalid_argument("regime_scales: need 0 < L0 < L1");

  RegimeScales out;
  const double nm = double(sp.N - 2 * sp.m);
  if (rp.case_id == 1) {
    if (!(rp.M1 > 0.0))
      throw std::invalid_argument("regime_scales: case 1 needs M1 > 0");
    out.rho = nm / (double(sp.N - 4 * sp.m) - sp.alpha);
    const double s = rp.M1 * std::pow(lambda, -sp.alpha / nm);
    if (s >= 1.0)
      throw std::domain_error(
          "regime_scales: lambda too small for case 1 (side ratio >= 1)");
    out.h_bar = std::sqrt((1.0 - s) * (1.0 + s));
  } else {
    if (!(rp.M2 > 0.0))
      throw std::invalid_argument("regime_scales: cases 2/3 need M2 > 0");
    if (!(rp.a >= 0.0 && rp.a < 1.0))
      throw std::invalid_argument("regime_scales: need a in [0,1)");
    out.rho = nm / double(sp.N - 4 * sp.m);
    out.h_bar = rp.a + rp.M2 * std::pow(lambda, -double(sp.N - 4 * sp.m) / nm);
    if (out.h_bar >= 1.0)
      throw std::domain_error(
          "regime_scales: lambda too small for cases 2/3 (h_bar >= 1)");
  }
  out.lambda_lo = rp.L0 * std::pow(double(k), out.rho);
  out.lambda_hi = rp.L1 * std::pow(double(k), out.rho);
  out.in_window = lambda >= out.lambda_lo && lambda <= out.lambda_hi;
  return out;
}

RegimeDerivatives regime_derivatives(double lambda, const RegimeParams& rp,
                                     const SpaceParams& sp) {
  RegimeScales sc = regime_scales(lambda, 2, rp, sp);
  RegimeDerivatives d;
  const double h = sc.h_bar;
  const double s = std::sqrt((1.0 - h) * (1.0 + h));
  if (rp.case_id == 1) {
    d.ds_dlambda = -sp.beta1 * s / lambda;
    d.dh_dlambda = -s * d.ds_dlambda / h;
  } else {
    d.dh_dlambda = -sp.beta2 * rp.M2 * std::pow(lambda, -sp.beta2 - 1.0);
    d.ds_dlambda = -h * d.dh_dlambda / s;
  }
  return d;
}

namespace {

struct Neumaier {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double total() const { return sum + comp; }
};

}  // namespace

double lattice_sum_same(double gamma, const DoubledCircleConfig& cfg) {
  cfg.validate();
  if (!(gamma > 0.0))
    throw std::invalid_argument("lattice_sum_same: gamma must be > 0");
  Neumaier acc;
  for (int j = 2; j <= cfg.k; ++j)
    acc.add(std::pow(cfg.chord_same(j), -gamma));
  return acc.total();
}

double lattice_sum_cross(double gamma, const DoubledCircleConfig& cfg) {
  cfg.validate();
  if (!(gamma > 0.0))
    throw std::invalid_argument("lattice_sum_cross: gamma must be > 0");
  Neumaier acc;
  for (int j = 1; j <= cfg.k; ++j)
    acc.add(std::pow(cfg.cross_distance(j), -gamma));
  return acc.total();
}

double zeta_series(double s) {
  if (!(s > 1.0)) throw std::invalid_argument("zeta_series: s must be > 1");
  const int M = 400;
  Neumaier acc;
  for (int i = 1; i < M; ++i) acc.add(std::pow(double(i), -s));
  // Euler-Maclaurin tail from i = M: integral + endpoint + two derivative
  // corrections; next omitted term is O(s^5 M^(-s-5)), far below 1e-13 here.
  const double Ms = std::pow(double(M), -s);
  acc.add(Ms * double(M) / (s - 1.0));
  acc.add(0.5 * Ms);
  acc.add(s * Ms / double(M) / 12.0);
  acc.add(-s * (s + 1.0) * (s + 2.0) * Ms / std::pow(double(M), 3.0) / 720.0);
  return acc.total();
}

SameAsymptotic asymptotic_same(const DoubledCircleConfig& cfg,
                               const SpaceParams& sp) {
  cfg.validate();
  const double gamma = double(sp.N - 2 * sp.m);
  SameAsymptotic out;
  out.A1 = 2.0 * zeta_series(gamma) /
           std::pow(2.0 * M_PI * cfg.r_bar, gamma);
  const double s = std::sqrt((1.0 - cfg.h_bar) * (1.0 + cfg.h_bar));
  out.predicted = out.A1 * std::pow(double(cfg.k) / s, gamma);
  return out;
}

CrossAsymptotic asymptotic_cross(const DoubledCircleConfig& cfg,
                                 const SpaceParams& sp) {
  cfg.validate();
  const double gamma = double(sp.N - 2 * sp.m);
  CrossAsymptotic out;
  // I = int_0^inf (1+x^2)^(-gamma/2) dx = (sqrt(pi)/2) Gamma((gamma-1)/2) / Gamma(gamma/2)
  const double I = 0.5 * std::sqrt(M_PI) *
                   std::exp(std::lgamma(0.5 * (gamma - 1.0)) -
                            std::lgamma(0.5 * gamma));
  out.A2 = 2.0 * I / (M_PI * std::pow(2.0 * cfg.r_bar, gamma));
  const double s = std::sqrt((1.0 - cfg.h_bar) * (1.0 + cfg.h_bar));
  out.predicted =
      out.A2 * double(cfg.k) / (std::pow(cfg.h_bar, gamma - 1.0) * s);
  out.in_regime = cfg.h_bar * double(cfg.k) >= 10.0;
  out.empirical_constant = lattice_sum_cross(gamma, cfg) *
                           std::pow(cfg.h_bar, gamma - 1.0) / double(cfg.k);
  return out;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_line: need two same-length samples");
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
  LineFit f;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  return f;
}

}  // namespace polybubble

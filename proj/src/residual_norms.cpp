#include "polybubble/residual_norms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "polybubble/bubble.hpp"
#include "polybubble/rng.hpp"

namespace polybubble {

namespace {

struct Neumaier {
  double sum = 0.0;
  double comp = 0.0;
  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x))
      comp += (sum - t) + x;
    else
      comp += (x - t) + sum;
    sum = t;
  }
  double total() const { return sum + comp; }
};

void split_point(const Vec& y, size_t y2_dim, double& r, Vec& y2) {
  if (y.size() != 3 + y2_dim)
    throw std::invalid_argument("residual_norms: point dimension mismatch");
  r = std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]);
  y2.assign(y.begin() + 3, y.end());
}

// 4th-order five-point second difference summed over axes, negated.
double neg_laplacian4(const std::function<double(const Vec&)>& f, const Vec& y,
                      double h) {
  const double f0 = f(y);
  Vec z = y;
  Neumaier acc;
  for (size_t i = 0; i < y.size(); ++i) {
    const double yi = y[i];
    z[i] = yi + h;
    const double fp = f(z);
    z[i] = yi - h;
    const double fm = f(z);
    z[i] = yi + 2.0 * h;
    const double fpp = f(z);
    z[i] = yi - 2.0 * h;
    const double fmm = f(z);
    z[i] = yi;
    acc.add((-fpp + 16.0 * fp - 30.0 * f0 + 16.0 * fm - fmm) /
            (12.0 * h * h));
  }
  return -acc.total();
}

// Sampled sup of lambda^{-p} |value| / weight_sum(p + tau), in log space.
double weighted_sup(const std::vector<double>& values, const AnsatzZ& az,
                    double p, double tau, const std::vector<Vec>& samples) {
  if (samples.empty())
    throw std::invalid_argument("weighted sup-norm: empty sample set");
  if (values.size() != samples.size())
    throw std::invalid_argument("weighted sup-norm: value/sample mismatch");
  const double logl = std::log(az.lambda);
  double best = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < samples.size(); ++i) {
    const double a = std::abs(values[i]);
    if (!(a > 0.0)) continue;
    const double lw = az.log_weight_sum(p + tau, samples[i]);
    best = std::max(best, std::log(a) - p * logl - lw);
  }
  return std::isfinite(best) ? std::exp(best) : 0.0;
}

std::vector<double> eval_at(const std::function<double(const Vec&)>& f,
                            const std::vector<Vec>& samples) {
  std::vector<double> v(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) v[i] = f(samples[i]);
  return v;
}

int resolve_jobs(int jobs) {
  if (jobs > 0) return jobs;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? int(hc) : 1;
}

}  // namespace

double polylap_fd(const std::function<double(const Vec&)>& f, const Vec& y,
                  double h, int m) {
  if (!(h > 0.0)) throw std::invalid_argument("polylap_fd: h must be > 0");
  if (m < 1) throw std::invalid_argument("polylap_fd: m must be >= 1");
  if (m == 1) return neg_laplacian4(f, y, h);
  auto inner = [&](const Vec& z) { return polylap_fd(f, z, h, m - 1); };
  return neg_laplacian4(inner, y, h);
}

double CutoffProfile::anchor_distance(const Vec& y) const {
  double r = 0.0;
  Vec y2;
  split_point(y, y20.size(), r, y2);
  double s2 = (r - r0) * (r - r0);
  for (size_t i = 0; i < y2.size(); ++i)
    s2 += (y2[i] - y20[i]) * (y2[i] - y20[i]);
  return std::sqrt(s2);
}

// The ramp is symmetric, S(1-x) = 1 - S(x); evaluating the mirrored
// argument on the outer half keeps the tiny values near the outer seam
// free of the cancellation that the raw power basis suffers at x near 1.
double CutoffProfile::profile(double s) const {
  if (s <= delta) return 1.0;
  if (s >= 2.0 * delta) return 0.0;
  const double x = (s - delta) / delta;
  const double v = x <= 0.5 ? 1.0 - ramp.eval(x) : ramp.eval(1.0 - x);
  return std::clamp(v, 0.0, 1.0);
}

double CutoffProfile::profile_derivative(double s, int order) const {
  if (order < 0 || order > smooth_order)
    throw std::invalid_argument(
        "CutoffProfile: derivative order outside 0..2m+1");
  if (order == 0) return profile(s);
  if (s <= delta || s >= 2.0 * delta) return 0.0;
  const double x = (s - delta) / delta;
  Poly d = ramp;
  for (int j = 0; j < order; ++j) d = d.derivative();
  const double sgn = order % 2 == 0 ? 1.0 : -1.0;
  const double v = x <= 0.5 ? -d.eval(x) : sgn * d.eval(1.0 - x);
  return v / std::pow(delta, order);
}

double CutoffProfile::value(const Vec& y) const {
  return profile(anchor_distance(y));
}

CutoffProfile make_cutoff(const SpaceParams& sp, double r0, const Vec& y20,
                          double delta) {
  if (!(r0 > 0.0)) throw std::invalid_argument("make_cutoff: r0 must be > 0");
  if (!(delta > 0.0))
    throw std::invalid_argument("make_cutoff: delta must be > 0");
  if (int(y20.size()) != sp.N - 3)
    throw std::invalid_argument("make_cutoff: y20 must have dimension N - 3");
  CutoffProfile c;
  c.r0 = r0;
  c.y20 = y20;
  c.delta = delta;
  c.smooth_order = 2 * sp.m + 1;
  c.ramp = smoothstep_poly(c.smooth_order);
  return c;
}

double AnsatzZ::Zstar(const Vec& y) const {
  Neumaier acc;
  for (const Vec& x : centers)
    acc.add(bubble_value(sp, Bubble{x, lambda}, y));
  return amplitude * acc.total();
}

double AnsatzZ::value(const Vec& y) const {
  if (!with_cutoff) return Zstar(y);
  const double xi = cutoff.value(y);
  if (xi == 0.0) return 0.0;
  return xi * Zstar(y);
}

double AnsatzZ::polylap_Zstar(const Vec& y) const {
  const double q = sp.m_star - 1.0;
  Neumaier acc;
  for (const Vec& x : centers)
    acc.add(std::exp(q * bubble_log_value(sp, Bubble{x, lambda}, y)));
  return amplitude * acc.total();
}

double AnsatzZ::log_weight_sum(double expo, const Vec& y) const {
  if (centers.empty())
    throw std::invalid_argument("AnsatzZ: no centres");
  std::vector<double> lt(centers.size());
  double mx = -std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < centers.size(); ++j) {
    const double d = std::sqrt(dist2(y, centers[j]));
    lt[j] = -expo * std::log1p(lambda * d);
    mx = std::max(mx, lt[j]);
  }
  Neumaier acc;
  for (double l : lt) acc.add(std::exp(l - mx));
  return mx + std::log(acc.total());
}

double AnsatzZ::weight_sum(double expo, const Vec& y) const {
  return std::exp(log_weight_sum(expo, y));
}

AnsatzZ make_ansatz(const SpaceParams& sp, const DoubledCircleConfig& cfg,
                    double lambda, const CutoffProfile& cutoff,
                    bool with_cutoff, double amplitude) {
  return make_bubble_ansatz(sp, points(sp, cfg), lambda, cutoff, with_cutoff,
                            amplitude);
}

AnsatzZ make_bubble_ansatz(const SpaceParams& sp, std::vector<Vec> centers,
                           double lambda, const CutoffProfile& cutoff,
                           bool with_cutoff, double amplitude) {
  if (!(lambda > 0.0))
    throw std::invalid_argument("make_bubble_ansatz: lambda must be > 0");
  if (centers.empty())
    throw std::invalid_argument("make_bubble_ansatz: need at least 1 centre");
  for (const Vec& x : centers)
    if (int(x.size()) != sp.N)
      throw std::invalid_argument(
          "make_bubble_ansatz: centre dimension mismatch");
  AnsatzZ az;
  az.sp = sp;
  az.centers = std::move(centers);
  az.lambda = lambda;
  az.cutoff = cutoff;
  az.with_cutoff = with_cutoff;
  az.amplitude = amplitude;
  return az;
}

double tau_for_case(const SpaceParams& sp, int case_id) {
  sp.require_full_pipeline("tau_for_case");
  if (case_id == 1) return sp.tau1;
  if (case_id == 2 || case_id == 3) return sp.tau23;
  throw std::invalid_argument("tau_for_case: case_id must be 1, 2, or 3");
}

double corrector_value(const AnsatzZ& az, const SyntheticCorrector& phi,
                       const Vec& y) {
  if (phi.eps == 0.0) return 0.0;
  const double p = 0.5 * double(az.sp.N - 2 * az.sp.m);
  return phi.eps *
         std::exp(p * std::log(az.lambda) +
                  az.log_weight_sum(p + phi.tau, y));
}

std::vector<Vec> norm_samples(const AnsatzZ& az, uint64_t seed) {
  const int N = az.sp.N;
  const Rng root(seed);
  std::vector<Vec> out;

  // shells around every centre
  const double shells[] = {1e-3, 0.5, 1.0, 2.0, 5.0, 10.0, 100.0};
  const int dirs = 3;
  for (size_t j = 0; j < az.centers.size(); ++j) {
    Rng rj = root.fork(j);
    for (double sh : shells)
      for (int d = 0; d < dirs; ++d) {
        Vec dir = rj.unit_vector(size_t(N));
        Vec y = az.centers[j];
        const double rad = sh / az.lambda;
        for (int i = 0; i < N; ++i) y[size_t(i)] += rad * dir[size_t(i)];
        out.push_back(std::move(y));
      }
  }

  // cutoff transition band, slightly overshot on both sides
  {
    Rng rb = root.fork(100000);
    const double delta = az.cutoff.delta;
    for (int i = 0; i < 128; ++i) {
      const double s = rb.uniform(0.9 * delta, 2.1 * delta);
      Vec dir = rb.unit_vector(size_t(N - 2));
      const double r = std::max(az.cutoff.r0 + s * dir[0], 0.05 * az.cutoff.r0);
      Vec omega = rb.unit_vector(3);
      Vec y(size_t(N), 0.0);
      for (int c = 0; c < 3; ++c) y[size_t(c)] = r * omega[size_t(c)];
      for (int c = 3; c < N; ++c)
        y[size_t(c)] = az.cutoff.y20[size_t(c - 3)] + s * dir[size_t(c - 2)];
      out.push_back(std::move(y));
    }
  }

  // far field
  {
    Rng rf = root.fork(200000);
    const double base = az.cutoff.r0 + 2.0 * az.cutoff.delta;
    for (double fac : {3.0, 10.0, 30.0})
      for (int d = 0; d < 4; ++d) {
        Vec dir = rf.unit_vector(size_t(N));
        Vec y(size_t(N), 0.0);
        for (int i = 0; i < N; ++i) y[size_t(i)] = fac * base * dir[size_t(i)];
        out.push_back(std::move(y));
      }
  }
  return out;
}

double star_norm(const std::function<double(const Vec&)>& u, const AnsatzZ& az,
                 double tau, const std::vector<Vec>& samples) {
  return weighted_sup(eval_at(u, samples), az,
                      0.5 * double(az.sp.N - 2 * az.sp.m), tau, samples);
}

double doublestar_norm(const std::function<double(const Vec&)>& f,
                       const AnsatzZ& az, double tau,
                       const std::vector<Vec>& samples) {
  return weighted_sup(eval_at(f, samples), az,
                      0.5 * double(az.sp.N + 2 * az.sp.m), tau, samples);
}

double doublestar_norm_values(const std::vector<double>& values,
                              const AnsatzZ& az, double tau,
                              const std::vector<Vec>& samples) {
  return weighted_sup(values, az, 0.5 * double(az.sp.N + 2 * az.sp.m), tau,
                      samples);
}

EkResult E_k_value(const AnsatzZ& az, const Potential* V, const Vec& y) {
  const SpaceParams& sp = az.sp;
  const double q = sp.m_star - 1.0;
  EkResult out;

  double dnear = std::numeric_limits<double>::infinity();
  std::vector<double> lv(az.centers.size());
  double M = -std::numeric_limits<double>::infinity();
  for (size_t j = 0; j < az.centers.size(); ++j) {
    const double d2 = dist2(y, az.centers[j]);
    dnear = std::min(dnear, std::sqrt(d2));
    lv[j] = bubble_log_value_r2(sp, az.lambda, d2);
    M = std::max(M, lv[j]);
  }

  const double delta = az.cutoff.delta;
  double s = 0.0, xi = 1.0;
  if (az.with_cutoff) {
    s = az.cutoff.anchor_distance(y);
    xi = az.cutoff.profile(s);
  }

  // Stencil spacing: the glued field varies on the band scale delta away
  // from the cores and on the core scale 1/lambda next to them; the
  // nearest-centre term switches between the two without ever exceeding
  // the band resolution.
  double h = delta / 100.0;
  h = std::min(h, std::max(dnear / 20.0, 0.1 / az.lambda));
  h = std::max(h, 1e-9);
  const double reach = (2.0 * sp.m + 0.01) * h;

  if (az.with_cutoff && s - reach >= 2.0 * delta) return out;  // dead zone

  // E_k = Z^{m*-1} - VZ - (-Delta)^m Z, split so the only finite-difference
  // piece is the cutoff commutator. With t_j = U_j / U_max and c = xi *
  // amplitude, the interaction bracket Z^{m*-1} - xi * (exact polylap of
  // amplitude Z*) factors as
  //   c e^{q M} [ c^{q-1} (1 + sum_{j != jmax} t_j)^q - 1
  //               - sum_{j != jmax} t_j^q ],
  // which expm1/log1p evaluate without cancellation even when one bubble
  // dominates by many orders.
  const double c = xi * az.amplitude;
  if (std::isfinite(M) && M > -340.0 && c > 0.0) {
    double s1_rest = 0.0, sq_rest = 0.0;
    for (double l : lv) {
      const double rel = l - M;
      if (rel == 0.0) continue;
      s1_rest += std::exp(rel);
      sq_rest += std::exp(q * rel);
    }
    const double bracket =
        std::expm1((q - 1.0) * std::log(c) + q * std::log1p(s1_rest)) -
        sq_rest;
    out.interaction = c * std::exp(q * M) * bracket;

    if (V) {
      double r = 0.0;
      Vec y2;
      split_point(y, size_t(sp.N - 3), r, y2);
      const double Zval =
          c * std::exp(M) * (1.0 + s1_rest);  // xi * amplitude * sum U_j
      out.potential_term = V->V(r, y2) * Zval;
    }
  }

  if (az.with_cutoff && s + reach > delta) {
    out.fd_used = true;
    out.h = h;
    out.near_seam = std::abs(s - delta) <= reach ||
                    std::abs(s - 2.0 * delta) <= reach;
    auto glued = [&](const Vec& z) { return az.value(z); };
    out.commutator =
        polylap_fd(glued, y, h, sp.m) - xi * az.polylap_Zstar(y);
  }

  out.value = out.interaction - out.potential_term - out.commutator;
  return out;
}

double N_phi_value(const AnsatzZ& az, const SyntheticCorrector& phi,
                   const Vec& y) {
  const double q = az.sp.m_star - 1.0;
  const double Z = az.value(y);
  const double ph = corrector_value(az, phi, y);
  if (ph == 0.0) return 0.0;
  if (Z <= 0.0) return ph > 0.0 ? std::pow(ph, q) : 0.0;
  if (std::abs(ph) < 0.5 * Z) {
    // ratio form: Z^q [ (1+x)^q - 1 - q x ], exact through the cancellation
    const double x = ph / Z;
    const double bracket = std::expm1(q * std::log1p(x)) - q * x;
    return std::exp(q * std::log(Z)) * bracket;
  }
  const double zp = Z + ph;
  const double pos = zp > 0.0 ? std::pow(zp, q) : 0.0;
  return pos - std::pow(Z, q) - q * std::pow(Z, q - 1.0) * ph;
}

ScalingStudy residual_scaling_study(const SpaceParams& sp,
                                    const RegimeParams& rp,
                                    const Potential& V,
                                    const ScalingSweep& sweep) {
  sp.require_full_pipeline("residual_scaling_study");
  if (sweep.ks.empty() || sweep.ts.empty())
    throw std::invalid_argument("residual_scaling_study: empty sweep");
  const double tau = tau_for_case(sp, rp.case_id);
  const int jobs = resolve_jobs(sweep.jobs);

  const double rho = rp.case_id == 1
                         ? double(sp.N - 2 * sp.m) / sp.iota
                         : double(sp.N - 2 * sp.m) / double(sp.N - 4 * sp.m);

  ScalingStudy study;
  for (int k : sweep.ks) {
    for (double t : sweep.ts) {
      const double lambda = t * std::pow(double(k), rho);
      const RegimeScales sc = regime_scales(lambda, k, rp, sp);
      DoubledCircleConfig cfg;
      cfg.k = k;
      cfg.r_bar = V.r0;
      cfg.h_bar = sc.h_bar;
      cfg.y2_bar = V.y20;
      const CutoffProfile cut = make_cutoff(sp, V.r0, V.y20, sweep.delta);
      const AnsatzZ az = make_ansatz(sp, cfg, lambda, cut);
      const std::vector<Vec> samples = norm_samples(az, sweep.seed);

      std::vector<double> vals(samples.size());
      const size_t chunk = (samples.size() + size_t(jobs) - 1) / size_t(jobs);
      std::vector<std::future<void>> fs;
      for (size_t lo = 0; lo < samples.size(); lo += chunk) {
        const size_t hi = std::min(lo + chunk, samples.size());
        fs.push_back(std::async(std::launch::async, [&, lo, hi] {
          for (size_t i = lo; i < hi; ++i)
            vals[i] = E_k_value(az, &V, samples[i]).value;
        }));
      }
      for (auto& f : fs) f.get();

      ScalingRow row;
      row.k = k;
      row.lambda = lambda;
      row.h_bar = sc.h_bar;
      row.norm = doublestar_norm_values(vals, az, tau, samples);
      study.rows.push_back(row);
    }
  }

  std::vector<double> lx, ly;
  for (const ScalingRow& r : study.rows)
    if (r.norm > 0.0) {
      lx.push_back(std::log(r.lambda));
      ly.push_back(std::log(r.norm));
    }
  if (lx.size() >= 2) {
    const LineFit fit = fit_line(lx, ly);
    study.slope = fit.slope;
    study.intercept = fit.intercept;
  }
  return study;
}

std::string scaling_csv(const ScalingStudy& study) {
  std::ostringstream os;
  char buf[128];
  os << "k,lambda,h_bar,doublestar_norm\n";
  for (const ScalingRow& r : study.rows) {
    std::snprintf(buf, sizeof buf, "%d,%.12g,%.12g,%.12g\n", r.k, r.lambda,
                  r.h_bar, r.norm);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "# slope %.12g intercept %.12g\n",
                study.slope, study.intercept);
  os << buf;
  return os.str();
}

NonlinearCheck nonlinear_estimate_check(const AnsatzZ& az, double tau,
                                        const std::vector<double>& eps_sweep,
                                        uint64_t seed) {
  NonlinearCheck out;
  out.exponent = std::min(2.0, az.sp.m_star - 1.0);
  const std::vector<Vec> samples = norm_samples(az, seed);
  for (double eps : eps_sweep) {
    const SyntheticCorrector phi{eps, tau};
    NonlinearRow row;
    row.eps = eps;
    row.norm = doublestar_norm(
        [&](const Vec& y) { return N_phi_value(az, phi, y); }, az, tau,
        samples);
    row.ratio = eps > 0.0 ? row.norm / std::pow(eps, out.exponent) : 0.0;
    out.max_ratio = std::max(out.max_ratio, row.ratio);
    out.rows.push_back(row);
  }
  return out;
}

AnnulusMass annulus_mass(const AnsatzZ& az, const SyntheticCorrector& phi,
                         size_t n_samples, uint64_t seed) {
  const SpaceParams& sp = az.sp;
  const double delta = az.cutoff.delta;
  const double lo = 3.0 * delta, hi = 4.0 * delta;
  if (hi >= az.cutoff.r0)
    throw std::invalid_argument(
        "annulus_mass: shell must stay at positive radius (4 delta < r0)");
  if (n_samples == 0)
    throw std::invalid_argument("annulus_mass: need samples");

  const int d = sp.N - 2;  // dimension of (r, y'') profile space
  const double vol = std::pow(M_PI, 0.5 * d) / std::tgamma(0.5 * d + 1.0) *
                     (std::pow(hi, d) - std::pow(lo, d));
  const double lod = std::pow(lo, d), hid = std::pow(hi, d);

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
      Rng r = root.fork(sidx + 1);
      Stratum st;
      for (size_t i = 0; i < per; ++i) {
        const double u = r.uniform();
        const double srad = std::pow(lod + u * (hid - lod), 1.0 / d);
        Vec dir = r.unit_vector(size_t(d));
        const double rr = az.cutoff.r0 + srad * dir[0];
        Vec omega = r.unit_vector(3);
        Vec y(size_t(sp.N), 0.0);
        for (int c = 0; c < 3; ++c) y[size_t(c)] = rr * omega[size_t(c)];
        for (int c = 3; c < sp.N; ++c)
          y[size_t(c)] = az.cutoff.y20[size_t(c - 3)] + srad * dir[size_t(c - 2)];
        const double p = corrector_value(az, phi, y);
        const double g =
            rr * rr * (p * p + std::pow(std::abs(p), sp.m_star));
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

  AnnulusMass out;
  out.samples = tot.n;
  const double scale = vol * 4.0 * M_PI;
  out.value = scale * tot.mean;
  if (tot.n > 1)
    out.mc_error =
        scale * std::sqrt(tot.m2 / double(tot.n - 1) / double(tot.n));
  return out;
}

}  // namespace polybubble

#include "polybubble/residual_norms.hpp"

#include <cmath>
#include <vector>

#include "doctest.h"
#include "polybubble/bubble.hpp"
#include "polybubble/potential.hpp"
#include "polybubble/space.hpp"

using namespace polybubble;

namespace {

Vec zeros(int n) { return Vec(size_t(n), 0.0); }

// Single-bubble ansatz glued at the unit sphere; the centre sits on the
// anchor sphere so its profile-space distance to the anchor is zero.
struct SingleBubble {
  SpaceParams sp{6, 1, 0.5};
  CutoffProfile cut;
  Vec c0;
  AnsatzZ az;

  explicit SingleBubble(double lambda = 50.0, double delta = 0.1)
      : cut(make_cutoff(sp, 1.0, zeros(3), delta)), c0(6, 0.0) {
    c0[2] = 1.0;
    az = make_bubble_ansatz(sp, {c0}, lambda, cut);
  }
};

// Product-rule form of (-Delta)(xi U) - xi (-Delta) U for m = 1: every
// factor is closed-form, so it cross-checks the stencil route through
// entirely different math.
double commutator_product_rule(const SpaceParams& sp, const CutoffProfile& cut,
                               const Bubble& b, const Vec& y) {
  const double r = std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]);
  const double u = r - cut.r0;
  const double s = cut.anchor_distance(y);
  const double d1 = cut.profile_derivative(s, 1);
  const double d2 = cut.profile_derivative(s, 2);

  Vec grad_s(y.size(), 0.0);
  for (int i = 0; i < 3; ++i) grad_s[size_t(i)] = (u / s) * (y[size_t(i)] / r);
  for (size_t i = 3; i < y.size(); ++i)
    grad_s[i] = (y[i] - cut.y20[i - 3]) / s;

  const double lap_s = double(sp.N - 3) / s + 2.0 * u / (r * s);
  const double lap_xi = d2 + d1 * lap_s;  // |grad s| = 1 off the anchor

  const Vec grad_u = bubble_gradient(sp, b, y);
  double dot = 0.0;
  for (size_t i = 0; i < y.size(); ++i) dot += grad_s[i] * grad_u[i];

  return -2.0 * d1 * dot - bubble_value(sp, b, y) * lap_xi;
}

}  // namespace

TEST_CASE("cutoff: plateau, support, and seam smoothness") {
  SpaceParams sp(6, 1, 0.5);
  const double delta = 0.1;
  CutoffProfile cut = make_cutoff(sp, 1.0, zeros(3), delta);

  CHECK(cut.smooth_order == 3);
  CHECK(cut.profile(0.0) == 1.0);
  CHECK(cut.profile(delta) == 1.0);
  CHECK(cut.profile(2.0 * delta) == 0.0);
  CHECK(cut.profile(5.0) == 0.0);

  // monotone and within [0,1] across the band
  double prev = 1.0;
  for (int i = 0; i <= 400; ++i) {
    const double s = delta + (i / 400.0) * delta;
    const double v = cut.profile(s);
    CHECK(v <= prev + 1e-15);
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    prev = v;
  }

  // derivatives through order 2m+1 fade out toward both seams; the j-th one
  // decays like the (2m+2-j)-th power of the seam distance
  for (int ord = 1; ord <= 3; ++ord) {
    const double eps = 1e-9;
    const double bound = 5e3 * std::pow(eps, 4 - ord) * std::pow(delta, -ord);
    CHECK(std::abs(cut.profile_derivative(delta * (1.0 + eps), ord)) < bound);
    CHECK(std::abs(cut.profile_derivative(delta * (2.0 - eps), ord)) < bound);
    CHECK(cut.profile_derivative(0.5 * delta, ord) == 0.0);
    CHECK(cut.profile_derivative(3.0 * delta, ord) == 0.0);
  }
  CHECK_THROWS_AS(cut.profile_derivative(0.15, 4), std::invalid_argument);

  // closed-form first derivative against a central difference
  const double s0 = 0.137;
  const double h = 1e-6;
  const double fd = (cut.profile(s0 + h) - cut.profile(s0 - h)) / (2.0 * h);
  CHECK(cut.profile_derivative(s0, 1) ==
        doctest::Approx(fd).epsilon(1e-8));

  // anchor distance of a lifted profile-space point
  Vec y(6, 0.0);
  y[0] = 0.6 * 1.13;
  y[1] = 0.8 * 1.13;  // r = 1.13
  y[3] = 0.04;
  y[5] = -0.03;
  const double want = std::sqrt(0.13 * 0.13 + 0.04 * 0.04 + 0.03 * 0.03);
  CHECK(cut.anchor_distance(y) == doctest::Approx(want).epsilon(1e-14));

  CHECK_THROWS_AS(make_cutoff(sp, -1.0, zeros(3), delta),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_cutoff(sp, 1.0, zeros(3), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_cutoff(sp, 1.0, zeros(2), delta),
                  std::invalid_argument);

  // order scales as expected for the higher-smoothness variant
  SpaceParams sp2(10, 2, 0.5);
  CutoffProfile cut2 = make_cutoff(sp2, 1.0, zeros(7), delta);
  CHECK(cut2.smooth_order == 5);
  CHECK(int(cut2.ramp.c.size()) == 12);  // degree 4m+3
}

TEST_CASE("ansatz: bubble sum, support, and exact polylaplacian") {
  SpaceParams sp(6, 1, 0.5);
  CutoffProfile cut = make_cutoff(sp, 1.0, zeros(3), 0.1);
  DoubledCircleConfig cfg;
  cfg.k = 3;
  cfg.r_bar = 1.0;
  cfg.h_bar = 0.6;
  cfg.y2_bar = zeros(3);
  const double lam = 40.0;
  AnsatzZ az = make_ansatz(sp, cfg, lam, cut);
  REQUIRE(az.centers.size() == 6);

  const std::vector<Vec> pts = points(sp, cfg);
  Vec y = pts[0];
  y[1] += 0.004;
  y[4] -= 0.007;

  double direct = 0.0, direct_pl = 0.0;
  const double q = sp.m_star - 1.0;
  for (const Vec& x : pts) {
    direct += bubble_value(sp, Bubble{x, lam}, y);
    direct_pl += std::exp(q * bubble_log_value(sp, Bubble{x, lam}, y));
  }
  CHECK(az.Zstar(y) == doctest::Approx(direct).epsilon(1e-14));
  CHECK(az.polylap_Zstar(y) == doctest::Approx(direct_pl).epsilon(1e-14));

  // anchor distance of the in-circle point is ~0, so the cutoff is inactive
  CHECK(az.value(y) == doctest::Approx(az.Zstar(y)).epsilon(1e-14));

  // dead zone: hard zero even though Zstar is not
  Vec yfar(6, 0.0);
  yfar[2] = 1.5;
  CHECK(az.value(yfar) == 0.0);
  CHECK(az.Zstar(yfar) > 0.0);

  // amplitude is linear in Zstar and its polylaplacian
  AnsatzZ az2 = make_ansatz(sp, cfg, lam, cut, true, 2.0);
  CHECK(az2.Zstar(y) == doctest::Approx(2.0 * az.Zstar(y)).epsilon(1e-14));
  CHECK(az2.polylap_Zstar(y) ==
        doctest::Approx(2.0 * az.polylap_Zstar(y)).epsilon(1e-14));

  CHECK_THROWS_AS(make_bubble_ansatz(sp, {}, lam, cut), std::invalid_argument);
  CHECK_THROWS_AS(make_bubble_ansatz(sp, {zeros(5)}, lam, cut),
                  std::invalid_argument);
  CHECK_THROWS_AS(make_bubble_ansatz(sp, {zeros(6)}, 0.0, cut),
                  std::invalid_argument);
}

TEST_CASE("weighted norms: corrector cancellation and homogeneity") {
  SpaceParams sp(6, 1, 0.5);
  CutoffProfile cut = make_cutoff(sp, 1.0, zeros(3), 0.1);
  DoubledCircleConfig cfg;
  cfg.k = 4;
  cfg.r_bar = 1.0;
  cfg.h_bar = 0.6;
  cfg.y2_bar = zeros(3);
  AnsatzZ az = make_ansatz(sp, cfg, 50.0, cut);
  const std::vector<Vec> smp = norm_samples(az);
  const double tau = tau_for_case(sp, 1);

  // weight sum: log route against the direct sum where it does not underflow
  Vec y = az.centers[0];
  y[0] += 0.01;
  double direct = 0.0;
  for (const Vec& x : az.centers)
    direct += std::pow(1.0 + 50.0 * std::sqrt(dist2(y, x)), -(2.0 + tau));
  CHECK(az.weight_sum(2.0 + tau, y) == doctest::Approx(direct).epsilon(1e-12));

  const SyntheticCorrector phi{0.37, tau};
  auto phif = [&](const Vec& p) { return corrector_value(az, phi, p); };
  CHECK(star_norm(phif, az, tau, smp) ==
        doctest::Approx(0.37).epsilon(1e-12));

  auto phi2 = [&](const Vec& p) { return 2.0 * corrector_value(az, phi, p); };
  CHECK(star_norm(phi2, az, tau, smp) ==
        doctest::Approx(0.74).epsilon(1e-12));

  auto zero = [](const Vec&) { return 0.0; };
  CHECK(star_norm(zero, az, tau, smp) == 0.0);
  CHECK(doublestar_norm(zero, az, tau, smp) == 0.0);

  CHECK_THROWS_AS(star_norm(zero, az, tau, {}), std::invalid_argument);
  CHECK_THROWS_AS(doublestar_norm(zero, az, tau, {}), std::invalid_argument);

  // the cancellation holds for the separated-regime weight too
  SpaceParams spA(10, 2, 0.5);
  CutoffProfile cutA = make_cutoff(spA, 1.0, zeros(7), 0.1);
  DoubledCircleConfig cfgA;
  cfgA.k = 3;
  cfgA.r_bar = 1.0;
  cfgA.h_bar = 0.5;
  cfgA.y2_bar = zeros(7);
  AnsatzZ azA = make_ansatz(spA, cfgA, 40.0, cutA);
  const double tauA = tau_for_case(spA, 2);
  CHECK(tauA == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  const SyntheticCorrector phiA{0.05, tauA};
  CHECK(star_norm([&](const Vec& p) { return corrector_value(azA, phiA, p); },
                  azA, tauA, norm_samples(azA)) ==
        doctest::Approx(0.05).epsilon(1e-12));

  CHECK(tau_for_case(sp, 1) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(tau_for_case(sp, 3) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK_THROWS_AS(tau_for_case(sp, 4), std::invalid_argument);
}

TEST_CASE("iterated stencil against the closed-form polylaplacian") {
  // order-m bubble identity: (-Delta)^m U = U^{m*-1}
  {
    SpaceParams sp(6, 1, 0.5);
    Vec c(6, 0.1);
    Bubble b{c, 3.0};
    auto f = [&](const Vec& y) { return bubble_value(sp, b, y); };
    Vec y(6, 0.0);
    y[0] = 0.5;
    y[3] = -0.2;
    const double exact =
        std::exp((sp.m_star - 1.0) * bubble_log_value(sp, b, y));
    const double e1 = std::abs(polylap_fd(f, y, 0.02, 1) - exact) / exact;
    const double e2 = std::abs(polylap_fd(f, y, 0.01, 1) - exact) / exact;
    CHECK(e2 < 1e-6);
    CHECK(e1 / e2 > 10.0);  // 4th-order spacing gain
    CHECK(e1 / e2 < 22.0);
  }
  {
    SpaceParams sp(10, 2, 0.5);
    Vec c(10, 0.05);
    Bubble b{c, 2.0};
    auto f = [&](const Vec& y) { return bubble_value(sp, b, y); };
    Vec y(10, 0.0);
    y[0] = 0.4;
    y[5] = 0.3;
    const double exact =
        std::exp((sp.m_star - 1.0) * bubble_log_value(sp, b, y));
    const double e1 = std::abs(polylap_fd(f, y, 0.02, 2) - exact) / exact;
    const double e2 = std::abs(polylap_fd(f, y, 0.01, 2) - exact) / exact;
    CHECK(e2 < 1e-5);
    CHECK(e1 / e2 > 10.0);
    CHECK(e1 / e2 < 22.0);

    // stencil is exact on quartics: (-Delta)^2 (y0^4 + y5^4) = 48
    auto g = [](const Vec& z) {
      return z[0] * z[0] * z[0] * z[0] + z[5] * z[5] * z[5] * z[5];
    };
    CHECK(polylap_fd(g, y, 0.37, 2) == doctest::Approx(48.0).epsilon(1e-9));
  }
  auto id = [](const Vec& z) { return z[0]; };
  CHECK_THROWS_AS(polylap_fd(id, zeros(3), 0.0, 1), std::invalid_argument);
  CHECK_THROWS_AS(polylap_fd(id, zeros(3), 0.1, 0), std::invalid_argument);
}

TEST_CASE("ansatz error: exact solution, dead zone, and plateau zone") {
  SingleBubble sb;

  // inside the plateau a lone bubble solves the zero-potential equation
  Vec y = sb.c0;
  y[0] += 0.013;
  y[4] -= 0.021;
  EkResult e = E_k_value(sb.az, nullptr, y);
  CHECK(e.value == 0.0);
  CHECK(e.fd_used == false);
  CHECK(e.commutator == 0.0);

  // dead zone: everything is identically zero, no stencil runs
  Vec yd(6, 0.0);
  yd[2] = 1.35;
  EkResult ed = E_k_value(sb.az, nullptr, yd);
  CHECK(ed.value == 0.0);
  CHECK(ed.interaction == 0.0);
  CHECK(ed.fd_used == false);

  // without the cutoff no finite differences are ever needed
  AnsatzZ raw = make_bubble_ansatz(sb.sp, {sb.c0}, 50.0, sb.cut, false);
  EkResult er = E_k_value(raw, nullptr, yd);
  CHECK(er.fd_used == false);
  CHECK(er.value == 0.0);  // exact solution globally
}

TEST_CASE("ansatz error: two-bubble closed form with potential") {
  SpaceParams sp(6, 1, 0.5);
  CutoffProfile cut = make_cutoff(sp, 1.0, zeros(3), 0.1);
  Potential V = preset_gaussian_well(sp, 1.0, zeros(3), 0.5, 2.0);

  Vec c1(6, 0.0), c2(6, 0.0);
  c1[2] = 1.0;
  c2[0] = 0.03;
  c2[2] = 0.999;
  const double lam = 80.0;
  AnsatzZ az = make_bubble_ansatz(sp, {c1, c2}, lam, cut);

  Vec y = c1;
  y[1] += 0.011;
  y[3] += 0.007;
  EkResult e = E_k_value(az, &V, y);
  CHECK(e.fd_used == false);

  const double q = sp.m_star - 1.0;
  const double U1 = bubble_value(sp, Bubble{c1, lam}, y);
  const double U2 = bubble_value(sp, Bubble{c2, lam}, y);
  const double r = std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]);
  const Vec y2(y.begin() + 3, y.end());
  const double oracle = std::pow(U1 + U2, q) - std::pow(U1, q) -
                        std::pow(U2, q) - V.V(r, y2) * (U1 + U2);
  CHECK(e.value == doctest::Approx(oracle).epsilon(1e-12));

  // the breakdown separates the same quantities
  CHECK(e.interaction ==
        doctest::Approx(std::pow(U1 + U2, q) - std::pow(U1, q) -
                        std::pow(U2, q)).epsilon(1e-10));
  CHECK(e.potential_term ==
        doctest::Approx(V.V(r, y2) * (U1 + U2)).epsilon(1e-12));
}

TEST_CASE("ansatz error: commutator band against the product rule") {
  SingleBubble sb;
  const Bubble b{sb.c0, 50.0};

  // off-axis band point
  Vec y(6, 0.0);
  y[0] = 0.04;
  y[1] = -0.03;
  y[2] = 1.12;
  y[3] = 0.02;
  y[5] = -0.01;
  const double s = sb.cut.anchor_distance(y);
  REQUIRE(s > 0.105);
  REQUIRE(s < 0.195);

  EkResult e = E_k_value(sb.az, nullptr, y);
  CHECK(e.fd_used == true);
  CHECK(e.h > 0.0);
  const double want = commutator_product_rule(sb.sp, sb.cut, b, y);
  CHECK(e.commutator == doctest::Approx(want).epsilon(5e-6));

  // on-axis point for good measure
  Vec ya(6, 0.0);
  ya[2] = 1.15;
  EkResult ea = E_k_value(sb.az, nullptr, ya);
  const double wa = commutator_product_rule(sb.sp, sb.cut, b, ya);
  CHECK(ea.commutator == doctest::Approx(wa).epsilon(5e-6));
  CHECK(ea.near_seam == false);

  // seam flag trips exactly when the stencil straddles a knot
  for (double sv : {0.1, 0.2}) {
    Vec ys(6, 0.0);
    ys[2] = 1.0 + sv;
    CHECK(E_k_value(sb.az, nullptr, ys).near_seam == true);
  }
}

TEST_CASE("ansatz error: decay of the weighted norm across the window") {
  SpaceParams sp(6, 1, 0.5);
  Potential V = preset_gaussian_well(sp, 1.0, zeros(3), 0.5, 2.0);
  RegimeParams rp;
  rp.case_id = 1;
  rp.M1 = 1.0;

  ScalingSweep sw;
  sw.ks = {2, 3};
  sw.ts = {0.5, 1.0, 2.0};
  sw.delta = 0.1;
  ScalingStudy st = residual_scaling_study(sp, rp, V, sw);
  REQUIRE(st.rows.size() == 6);
  for (const ScalingRow& r : st.rows) {
    CHECK(r.norm > 0.0);
    CHECK(r.h_bar > 0.9);  // shrinking circles push the height toward 1
  }
  CHECK(st.slope <= -(2.0 * sp.m + 1.0 - sp.beta1) / 2.0 + 0.15);
  CHECK(st.slope == doctest::Approx(-1.81).epsilon(0.03));

  const std::string csv = scaling_csv(st);
  CHECK(csv.find("k,lambda,h_bar,doublestar_norm\n") == 0);
  CHECK(csv.find("# slope") != std::string::npos);
  size_t lines = 0;
  for (char c : csv)
    if (c == '\n') ++lines;
  CHECK(lines == 8);  // header + 6 rows + diagnostics

  CHECK_THROWS_AS(residual_scaling_study(sp, rp, V, ScalingSweep{}),
                  std::invalid_argument);
}

TEST_CASE("ansatz error: separated-circle decay and amplitude sensitivity") {
  SpaceParams sp(10, 2, 0.5);
  Potential V = preset_gaussian_well(sp, 1.0, zeros(7), 0.5, 2.0);
  RegimeParams rp;
  rp.case_id = 2;
  rp.M2 = 1.0;
  rp.a = 0.3;

  ScalingSweep sw;
  sw.ks = {3, 4};
  sw.ts = {0.5, 1.0, 2.0};
  sw.delta = 0.1;
  ScalingStudy st = residual_scaling_study(sp, rp, V, sw);
  REQUIRE(st.rows.size() == 6);
  CHECK(st.slope <= -(2.0 * sp.m + 1.0 - sp.beta2) / 2.0 + 0.15);

  // doubling every bubble amplitude breaks the exact-solution structure,
  // so the norm jumps by orders of magnitude
  SpaceParams sp61(6, 1, 0.5);
  CutoffProfile cut = make_cutoff(sp61, 1.0, zeros(3), 0.1);
  DoubledCircleConfig cfg;
  cfg.k = 3;
  cfg.r_bar = 1.0;
  cfg.h_bar = 0.98;
  cfg.y2_bar = zeros(3);
  AnsatzZ a1 = make_ansatz(sp61, cfg, 6561.0, cut, true, 1.0);
  AnsatzZ a2 = make_ansatz(sp61, cfg, 6561.0, cut, true, 2.0);
  const std::vector<Vec> smp = norm_samples(a1);
  const double tau = tau_for_case(sp61, 1);
  std::vector<double> v1(smp.size()), v2(smp.size());
  for (size_t i = 0; i < smp.size(); ++i) {
    v1[i] = E_k_value(a1, nullptr, smp[i]).value;
    v2[i] = E_k_value(a2, nullptr, smp[i]).value;
  }
  const double n1 = doublestar_norm_values(v1, a1, tau, smp);
  const double n2 = doublestar_norm_values(v2, a2, tau, smp);
  CHECK(n2 > 10.0 * n1);
}

TEST_CASE("nonlinear remainder: quadratic-space identity and branches") {
  SpaceParams sp(6, 1, 0.5);
  CutoffProfile cut = make_cutoff(sp, 1.0, zeros(3), 0.1);
  DoubledCircleConfig cfg;
  cfg.k = 4;
  cfg.r_bar = 1.0;
  cfg.h_bar = 0.6;
  cfg.y2_bar = zeros(3);
  AnsatzZ az = make_ansatz(sp, cfg, 50.0, cut);
  const double tau = tau_for_case(sp, 1);
  const SyntheticCorrector phi{0.37, tau};

  // m* - 1 = 2 collapses the remainder to phi^2 wherever Z + phi >= 0
  const std::vector<Vec> smp = norm_samples(az);
  for (size_t i = 0; i < smp.size(); i += 5) {
    const double n = N_phi_value(az, phi, smp[i]);
    const double p = corrector_value(az, phi, smp[i]);
    CHECK(n == doctest::Approx(p * p).epsilon(1e-12));
  }

  // zero corrector
  CHECK(N_phi_value(az, SyntheticCorrector{0.0, tau}, smp[0]) == 0.0);

  // dead zone of the fractional-power space: remainder is phi^{m*-1}
  SpaceParams spA(10, 2, 0.5);
  CutoffProfile cutA = make_cutoff(spA, 1.0, zeros(7), 0.1);
  DoubledCircleConfig cfgA;
  cfgA.k = 3;
  cfgA.r_bar = 1.0;
  cfgA.h_bar = 0.5;
  cfgA.y2_bar = zeros(7);
  AnsatzZ azA = make_ansatz(spA, cfgA, 40.0, cutA);
  const double tauA = tau_for_case(spA, 2);
  const SyntheticCorrector phiA{0.05, tauA};
  Vec yd(10, 0.0);
  yd[2] = 1.5;  // outside the support, Z = 0, phi > 0
  REQUIRE(azA.value(yd) == 0.0);
  const double pA = corrector_value(azA, phiA, yd);
  REQUIRE(pA > 0.0);
  CHECK(N_phi_value(azA, phiA, yd) ==
        doctest::Approx(std::pow(pA, spA.m_star - 1.0)).epsilon(1e-12));

  // pointwise branch bounds: quadratic with a curvature weight in the
  // Taylor region, pure power where the corrector dominates
  double cT = 0.0, cL = 0.0;
  const std::vector<Vec> smpA = norm_samples(azA);
  for (const Vec& y : smpA) {
    const double Z = azA.value(y);
    const double p = corrector_value(azA, phiA, y);
    const double n = std::abs(N_phi_value(azA, phiA, y));
    if (n == 0.0) continue;
    if (std::abs(p) <= 0.5 * Z)
      cT = std::max(cT, n / (p * p * std::pow(Z, spA.m_star - 3.0)));
    else
      cL = std::max(cL, n / std::pow(std::abs(p), spA.m_star - 1.0));
  }
  CHECK(cT > 0.0);
  CHECK(cT < 2.5);
  CHECK(cL > 0.0);
  CHECK(cL < 3.0);
}

TEST_CASE("nonlinear remainder: bounded ratio over the amplitude sweep") {
  SpaceParams sp(6, 1, 0.5);
  CutoffProfile cut = make_cutoff(sp, 1.0, zeros(3), 0.1);
  DoubledCircleConfig cfg;
  cfg.k = 4;
  cfg.r_bar = 1.0;
  cfg.h_bar = 0.6;
  cfg.y2_bar = zeros(3);
  AnsatzZ az = make_ansatz(sp, cfg, 50.0, cut);
  const double tau = tau_for_case(sp, 1);

  NonlinearCheck nc =
      nonlinear_estimate_check(az, tau, {0.2, 0.1, 0.05, 0.025, 0.0});
  CHECK(nc.exponent == 2.0);
  REQUIRE(nc.rows.size() == 5);
  CHECK(nc.rows.back().ratio == 0.0);
  CHECK(nc.rows.back().norm == 0.0);
  // the quadratic identity makes the ratio exactly amplitude-free
  for (size_t i = 1; i + 1 < nc.rows.size(); ++i)
    CHECK(nc.rows[i].ratio ==
          doctest::Approx(nc.rows[0].ratio).epsilon(1e-9));
  CHECK(nc.max_ratio == doctest::Approx(3.023128).epsilon(1e-3));

  // fractional power: still exponent 2, ratios inside a factor-2 band
  SpaceParams spA(10, 2, 0.5);
  CutoffProfile cutA = make_cutoff(spA, 1.0, zeros(7), 0.1);
  DoubledCircleConfig cfgA;
  cfgA.k = 3;
  cfgA.r_bar = 1.0;
  cfgA.h_bar = 0.5;
  cfgA.y2_bar = zeros(7);
  AnsatzZ azA = make_ansatz(spA, cfgA, 40.0, cutA);
  NonlinearCheck ncA = nonlinear_estimate_check(azA, tau_for_case(spA, 2),
                                                {0.2, 0.1, 0.05, 0.025});
  CHECK(ncA.exponent == 2.0);  // min(2, m*-1) with m*-1 = 7/3
  for (size_t i = 1; i < ncA.rows.size(); ++i) {
    const double q = ncA.rows[i].ratio / ncA.rows[i - 1].ratio;
    CHECK(q > 0.5);
    CHECK(q < 2.0);
  }
  CHECK(ncA.max_ratio < 20.0);
}

TEST_CASE("annulus mass: homogeneity, decay rate, and degenerate inputs") {
  SpaceParams sp(6, 1, 0.5);
  CutoffProfile cut = make_cutoff(sp, 1.0, zeros(3), 0.1);
  DoubledCircleConfig cfg;
  cfg.k = 4;
  cfg.r_bar = 1.0;
  cfg.h_bar = 0.6;
  cfg.y2_bar = zeros(3);
  AnsatzZ az = make_ansatz(sp, cfg, 50.0, cut);
  const double tau = tau_for_case(sp, 1);

  // quadratic amplitude scaling once the power-m* term is negligible
  AnnulusMass m1 = annulus_mass(az, {1e-4, tau}, 200000);
  AnnulusMass m2 = annulus_mass(az, {2e-4, tau}, 200000);
  CHECK(m1.value > 0.0);
  CHECK(m1.mc_error < 0.01 * m1.value);
  CHECK(m2.value / m1.value == doctest::Approx(4.0).epsilon(0.02));

  CHECK(annulus_mass(az, {0.0, tau}, 1000).value == 0.0);

  // decay along the window at the matched corrector amplitude
  RegimeParams rp;
  rp.case_id = 1;
  rp.M1 = 1.0;
  const double rate = 0.5 * (2.0 * sp.m + 1.0 - sp.beta1);
  std::vector<double> ll, lm;
  for (double t : {0.5, 1.0, 2.0, 4.0}) {
    const double lam = t * std::pow(3.0, 8.0);
    const RegimeScales sc = regime_scales(lam, 3, rp, sp);
    DoubledCircleConfig cf;
    cf.k = 3;
    cf.r_bar = 1.0;
    cf.h_bar = sc.h_bar;
    cf.y2_bar = zeros(3);
    AnsatzZ azl = make_ansatz(sp, cf, lam, cut);
    AnnulusMass mm = annulus_mass(azl, {std::pow(lam, -rate), tau}, 100000);
    ll.push_back(std::log(lam));
    lm.push_back(std::log(mm.value));
  }
  const LineFit fit = fit_line(ll, lm);
  CHECK(fit.slope <= -(2.0 * sp.m + 1.0 - sp.beta1) + 0.15);

  // shell must fit under the anchor radius
  CutoffProfile fat = make_cutoff(sp, 1.0, zeros(3), 0.3);
  AnsatzZ azf = make_bubble_ansatz(sp, az.centers, 50.0, fat);
  CHECK_THROWS_AS(annulus_mass(azf, {0.1, tau}, 100), std::invalid_argument);
  CHECK_THROWS_AS(annulus_mass(az, {0.1, tau}, 0), std::invalid_argument);
}

TEST_CASE("sample strata: determinism and coverage") {
  SpaceParams sp(6, 1, 0.5);
  CutoffProfile cut = make_cutoff(sp, 1.0, zeros(3), 0.1);
  DoubledCircleConfig cfg;
  cfg.k = 4;
  cfg.r_bar = 1.0;
  cfg.h_bar = 0.6;
  cfg.y2_bar = zeros(3);
  AnsatzZ az = make_ansatz(sp, cfg, 50.0, cut);

  const std::vector<Vec> a = norm_samples(az, 7);
  const std::vector<Vec> b = norm_samples(az, 7);
  const std::vector<Vec> c = norm_samples(az, 8);
  REQUIRE(a.size() == b.size());
  CHECK(a == b);
  CHECK(a != c);

  // 2k centres, 7 shells, 3 directions each; 128 band; 12 far field
  CHECK(a.size() == 8 * 21 + 128 + 12);
  for (const Vec& y : a) CHECK(y.size() == 6);

  size_t in_band = 0;
  for (const Vec& y : a) {
    const double s = cut.anchor_distance(y);
    if (s >= 0.9 * cut.delta && s <= 2.1 * cut.delta) ++in_band;
  }
  CHECK(in_band >= 128);
}

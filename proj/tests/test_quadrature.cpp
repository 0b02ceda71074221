#include "polybubble/quadrature.hpp"

#include <cmath>

#include "doctest.h"
#include "polybubble/bubble.hpp"
#include "polybubble/space.hpp"

using namespace polybubble;

namespace {
constexpr double kPi = 3.141592653589793238462643383279503;
}

TEST_CASE("adaptive GK15 on smooth and peaked integrands") {
  auto cube = [](double x) { return x * x; };
  QuadResult q = integrate(cube, 0.0, 1.0, 1e-12);
  CHECK(q.converged);
  CHECK(q.value == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  QuadResult s = integrate([](double x) { return std::sin(x); }, 0.0, kPi, 1e-12);
  CHECK(s.converged);
  CHECK(s.value == doctest::Approx(2.0).epsilon(1e-13));

  // Narrow Lorentzian: forces subdivision, still must hit the closed form.
  const double a = 1e-3;
  auto peak = [&](double x) { return 1.0 / (a * a + x * x); };
  QuadResult p = integrate(peak, -1.0, 1.0, 1e-9 * 2.0 * std::atan(1.0 / a) / a);
  CHECK(p.converged);
  CHECK(p.intervals > 4);  // a single panel cannot resolve this
  CHECK(p.value ==
        doctest::Approx(2.0 * std::atan(1.0 / a) / a).epsilon(1e-10));

  CHECK_THROWS(integrate(cube, 1.0, 0.0, 1e-8));
  CHECK_THROWS(integrate(cube, 0.0, 1.0, 0.0));
}

TEST_CASE("unit sphere areas") {
  CHECK(sphere_area(1) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(sphere_area(2) == doctest::Approx(2.0 * kPi).epsilon(1e-14));
  CHECK(sphere_area(3) == doctest::Approx(4.0 * kPi).epsilon(1e-14));
  CHECK(sphere_area(4) == doctest::Approx(2.0 * kPi * kPi).epsilon(1e-14));
  CHECK(sphere_area(6) == doctest::Approx(kPi * kPi * kPi).epsilon(1e-14));
  CHECK_THROWS(sphere_area(0));
}

TEST_CASE("beta function") {
  CHECK(beta_function(3.0, 1.0) == doctest::Approx(1.0 / 3.0).epsilon(1e-13));
  CHECK(beta_function(0.5, 0.5) == doctest::Approx(kPi).epsilon(1e-13));
  CHECK(beta_function(2.0, 5.0) == doctest::Approx(1.0 / 30.0).epsilon(1e-13));
}

TEST_CASE("radial integral: moments, indicator, gaussian") {
  // int_0^inf r^(N-1) (1+r^2)^(-q) dr = (1/2) B(N/2, q - N/2)
  auto alg = [](double r) { return std::pow(1.0 + r * r, -6.0); };
  QuadResult q6 = radial_integral(alg, 6, 1e-12);
  CHECK(q6.converged);
  CHECK(q6.value == doctest::Approx(0.5 * beta_function(3.0, 3.0)).epsilon(1e-11));

  // Ball indicator: int = 1/N
  auto ind = [](double r) { return r < 1.0 ? 1.0 : 0.0; };
  QuadResult qi = radial_integral(ind, 6, 1e-9);
  CHECK(qi.value == doctest::Approx(1.0 / 6.0).epsilon(1e-8));

  // Gaussian: int_0^inf e^{-r^2} r^(N-1) dr = Gamma(N/2)/2
  auto gs = [](double r) { return std::exp(-r * r); };
  QuadResult qg = radial_integral(gs, 5, 1e-12);
  CHECK(qg.converged);
  CHECK(qg.value ==
        doctest::Approx(0.5 * std::exp(std::lgamma(2.5))).epsilon(1e-12));

  // The scale hint must not change the value, only help adaptivity.
  QuadResult qs = radial_integral(alg, 6, 1e-12, 37.0);
  CHECK(qs.converged);
  CHECK(qs.value == doctest::Approx(q6.value).epsilon(1e-10));
}

TEST_CASE("bubble L2 mass: closed Beta form vs quadrature") {
  SpaceParams sp(6, 1);
  DualValue d = integral_U2(sp, 1.0);
  CHECK(d.converged);
  // 96 pi^3, an exact consequence of P(6,1) = 24 and the Beta moment.
  CHECK(d.closed_form == doctest::Approx(2976.6025613087824).epsilon(1e-12));
  CHECK(d.rel_delta() < 1e-8);

  SpaceParams sp2(10, 2);
  DualValue d2 = integral_U2(sp2, 1.0);
  CHECK(d2.converged);
  CHECK(d2.rel_delta() < 1e-8);

  // lambda scaling: lambda^(-2m), both evaluation routes.
  for (double lam : {40.0, 0.025}) {
    DualValue dl = integral_U2(sp, lam);
    CHECK(dl.converged);
    CHECK(dl.closed_form ==
          doctest::Approx(d.closed_form * std::pow(lam, -2.0)).epsilon(1e-12));
    CHECK(dl.rel_delta() < 1e-8);

    DualValue dl2 = integral_U2(sp2, lam);
    CHECK(dl2.converged);
    CHECK(dl2.closed_form ==
          doctest::Approx(d2.closed_form * std::pow(lam, -4.0)).epsilon(1e-12));
    CHECK(dl2.rel_delta() < 1e-8);
  }

  // N = 4m + 1 is the last convergent case; the tail is exactly r^{-2}.
  SpaceParams edge(9, 2);
  DualValue de = integral_U2(edge, 1.0);
  CHECK(de.converged);
  CHECK(de.rel_delta() < 1e-8);

  SpaceParams low(6, 2);  // N <= 4m: L2 mass diverges
  CHECK_THROWS(integral_U2(low, 1.0));
}

TEST_CASE("bubble source mass: closed Beta form vs quadrature") {
  SpaceParams sp(6, 1);
  DualValue d = integral_Umstar_minus1(sp, 1.0);
  CHECK(d.converged);
  // m* - 1 = 2 here, so this coincides with the L2 mass.
  CHECK(d.closed_form == doctest::Approx(2976.6025613087824).epsilon(1e-12));
  CHECK(d.rel_delta() < 1e-8);

  // Non-integer exponent path (m* - 1 = 13/5).
  SpaceParams sp9(9, 2);
  DualValue d9 = integral_Umstar_minus1(sp9, 1.0);
  CHECK(d9.converged);
  CHECK(d9.rel_delta() < 1e-8);

  SpaceParams sp10(10, 2);
  for (double lam : {1.0, 12.0}) {
    DualValue dl = integral_Umstar_minus1(sp10, lam);
    CHECK(dl.converged);
    CHECK(dl.rel_delta() < 1e-8);
  }
  DualValue a = integral_Umstar_minus1(sp10, 1.0);
  DualValue b = integral_Umstar_minus1(sp10, 12.0);
  CHECK(b.closed_form ==
        doctest::Approx(a.closed_form * std::pow(12.0, -3.0)).epsilon(1e-12));
}

TEST_CASE("axisymmetric full-space integral") {
  // Gaussian over R^N factorizes: integral = pi^(N/2).
  auto gauss = [](double z, double rho) { return std::exp(-(z * z + rho * rho)); };
  QuadResult g6 = axisym_integral(gauss, 6, 1e-9);
  CHECK(g6.converged);
  CHECK(g6.value == doctest::Approx(std::pow(kPi, 3.0)).epsilon(1e-9));

  // Shift along the axis: translation invariance of the z-line.
  auto off = [](double z, double rho) {
    const double dz = z - 3.0;
    return std::exp(-(dz * dz + rho * rho));
  };
  QuadResult go = axisym_integral(off, 6, 1e-9, 3.0, 1.0);
  CHECK(go.converged);
  CHECK(go.value == doctest::Approx(std::pow(kPi, 3.0)).epsilon(1e-8));

  // Radial profile: must agree with the 1-D radial reduction.
  auto prof = [](double z, double rho) {
    return std::pow(1.0 + z * z + rho * rho, -6.0);
  };
  QuadResult ax = axisym_integral(prof, 6, 1e-11);
  const double closed = sphere_area(6) * 0.5 * beta_function(3.0, 3.0);
  CHECK(ax.converged);
  CHECK(ax.value == doctest::Approx(closed).epsilon(1e-9));
}

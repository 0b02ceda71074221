#include "polybubble/reduced_energy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "polybubble/quadrature.hpp"
#include "polybubble/tables.hpp"

namespace polybubble {

double const_B1(const SpaceParams& sp) {
  return double(sp.m) * integral_U2(sp, 1.0).closed_form;
}

double const_B1_numeric(const SpaceParams& sp) {
  // (1/2) d/dlambda int U_lambda^2 = -B1 lambda^{-(2m+1)}; evaluate the
  // derivative at lambda = 1 from the quadrature route only.
  const double h = 1e-3;
  const double fp = integral_U2(sp, 1.0 + h).quadrature;
  const double fm = integral_U2(sp, 1.0 - h).quadrature;
  return -0.5 * (fp - fm) / (2.0 * h);
}

double const_B2_closed(const SpaceParams& sp) {
  sp.require_full_pipeline("const_B2_closed");
  const double gamma = double(sp.N - 2 * sp.m);
  const double pref =
      std::pow(bubble_normalization(sp), gamma / (4.0 * sp.m));
  return 0.5 * gamma * pref * integral_Umstar_minus1(sp, 1.0).closed_form;
}

double interaction_J(const SpaceParams& sp, double d, double lambda,
                     double rel_tol) {
  sp.require_full_pipeline("interaction_J");
  if (d == 0.0) throw std::invalid_argument("interaction_J: d must be nonzero");
  if (!(lambda > 0.0))
    throw std::invalid_argument("interaction_J: lambda must be > 0");
  const double gamma = double(sp.N - 2 * sp.m);
  const double p = 0.5 * gamma;
  const double mstar = sp.m_star;
  const double expected = const_B2_closed(sp) *
                          std::pow(lambda, -(gamma + 1.0)) *
                          std::pow(std::fabs(d), -gamma);
  auto g = [&](double z, double rho) {
    const double r1sq = z * z + rho * rho;
    const double dz = z - d;
    const double r2sq = dz * dz + rho * rho;
    const double lu1 = bubble_log_value_r2(sp, lambda, r1sq);
    const double lu2 = bubble_log_value_r2(sp, lambda, r2sq);
    const double t = lambda * lambda * r1sq;
    return (mstar - 1.0) * (p / lambda) * ((1.0 - t) / (1.0 + t)) *
           std::exp((mstar - 1.0) * lu1 + lu2);
  };
  QuadResult q = axisym_integral(g, sp.N, rel_tol * expected, 1.0 / lambda,
                                 1.0 / lambda);
  return q.value;
}

namespace {

// 3-parameter linear least squares: y ~ b0 + b1 u + b2 v.
struct PlaneFit {
  double b0, b1, b2;
};

PlaneFit fit_plane(const std::vector<double>& u, const std::vector<double>& v,
                   const std::vector<double>& y) {
  double A[3][4] = {{0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}};
  const size_t n = y.size();
  for (size_t i = 0; i < n; ++i) {
    const double row[3] = {1.0, u[i], v[i]};
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) A[a][b] += row[a] * row[b];
      A[a][3] += row[a] * y[i];
    }
  }
  for (int col = 0; col < 3; ++col) {
    int piv = col;
    for (int r = col + 1; r < 3; ++r)
      if (std::fabs(A[r][col]) > std::fabs(A[piv][col])) piv = r;
    std::swap(A[piv], A[col]);
    for (int r = 0; r < 3; ++r) {
      if (r == col) continue;
      const double f = A[r][col] / A[col][col];
      for (int c = col; c < 4; ++c) A[r][c] -= f * A[col][c];
    }
  }
  return PlaneFit{A[0][3] / A[0][0], A[1][3] / A[1][1], A[2][3] / A[2][2]};
}

}  // namespace

B2Fit const_B2_fit(const SpaceParams& sp) {
  std::vector<double> logd, loglam, logJ;
  for (double lambda : {1.0, 2.0, 4.0}) {
    for (double D : {50.0, 100.0, 200.0}) {
      const double d = D / lambda;
      const double J = interaction_J(sp, d, lambda, 1e-7);
      if (!(J < 0.0))
        throw std::runtime_error(
            "const_B2_fit: interaction must be negative at large separation");
      logd.push_back(std::log(d));
      loglam.push_back(std::log(lambda));
      logJ.push_back(std::log(-J));
    }
  }
  PlaneFit pf = fit_plane(logd, loglam, logJ);
  B2Fit out;
  out.B2 = std::exp(pf.b0);
  out.exp_d = pf.b1;
  out.exp_lambda = pf.b2;
  for (size_t i = 0; i < logJ.size(); ++i) {
    const double pred = pf.b0 + pf.b1 * logd[i] + pf.b2 * loglam[i];
    out.max_log_residual =
        std::max(out.max_log_residual, std::fabs(logJ[i] - pred));
  }
  return out;
}

std::pair<double, double> const_B3_B4(const SpaceParams& sp,
                                      const DoubledCircleConfig& cfg, double B2,
                                      bool* in_regime) {
  const SameAsymptotic sa = asymptotic_same(cfg, sp);
  const CrossAsymptotic ca = asymptotic_cross(cfg, sp);
  const double s =
      std::sqrt((1.0 - cfg.h_bar) * (1.0 + cfg.h_bar));
  const double A2_eff =
      ca.in_regime ? ca.A2 : ca.empirical_constant * s;
  if (in_regime) *in_regime = ca.in_regime;
  return {B2 * sa.A1, B2 * A2_eff};
}

EnergyConstants compute_energy_constants(const SpaceParams& sp,
                                         const DoubledCircleConfig& cfg,
                                         bool with_b2_fit) {
  EnergyConstants ec;
  ec.B1 = const_B1(sp);
  const double b1n = const_B1_numeric(sp);
  ec.B1_rel_delta = std::fabs(ec.B1 - b1n) / ec.B1;
  ec.B2 = const_B2_closed(sp);
  if (with_b2_fit) {
    B2Fit f = const_B2_fit(sp);
    ec.B2_rel_delta = std::fabs(ec.B2 - f.B2) / ec.B2;
    ec.B2_fit_exp_d = f.exp_d;
    ec.B2_fit_exp_lambda = f.exp_lambda;
    ec.B2_fit_max_residual = f.max_log_residual;
  }
  auto [b3, b4] = const_B3_B4(sp, cfg, ec.B2, &ec.B4_in_regime);
  ec.B3 = b3;
  ec.B4 = b4;
  return ec;
}

double dI_dlambda_expansion(const SpaceParams& sp, double B2, int k,
                            double lambda, double h_bar, double r_bar,
                            double Vval) {
  sp.require_full_pipeline("dI_dlambda_expansion");
  if (!(h_bar > 0.0 && h_bar < 1.0))
    throw std::invalid_argument("dI_dlambda_expansion: h_bar must be in (0,1)");
  DoubledCircleConfig cfg;
  cfg.k = k;
  cfg.r_bar = r_bar;
  cfg.h_bar = h_bar;
  cfg.y2_bar.assign(size_t(sp.N - 3), 0.0);
  auto [B3, B4] = const_B3_B4(sp, cfg, B2, nullptr);
  const double B1 = const_B1(sp);
  const double gamma = double(sp.N - 2 * sp.m);
  const double s = std::sqrt((1.0 - h_bar) * (1.0 + h_bar));
  const double lam_pow = std::pow(lambda, -(gamma + 1.0));
  const double v_term = -B1 * std::pow(lambda, -(2.0 * sp.m + 1.0)) * Vval;
  const double same_term =
      B3 * std::pow(double(k), gamma) * lam_pow * std::pow(s, -gamma);
  const double cross_term =
      B4 * double(k) * lam_pow * std::pow(h_bar, -(gamma - 1.0)) / s;
  return 2.0 * double(k) * (v_term + same_term + cross_term);
}

namespace {

struct BalanceEval {
  double value = 0.0;
  double scale = 0.0;  // sum of term magnitudes
};

BalanceEval balance_eval(const SpaceParams& sp, const RegimeParams& rp,
                         double B1, double B3, double B4, double t,
                         double Vval) {
  if (!(t > 0.0)) throw std::invalid_argument("reduced_balance: t must be > 0");
  const double gamma = double(sp.N - 2 * sp.m);
  const double v_term = -B1 * std::pow(t, -(2.0 * sp.m + 1.0)) * Vval;
  double inter = 0.0, extra = 0.0;
  if (rp.case_id == 1) {
    inter = B3 * std::pow(rp.M1, gamma) * std::pow(t, -(gamma + 1.0 - sp.alpha));
  } else if (rp.case_id == 2) {
    inter = B3 * std::pow(t, -(gamma + 1.0)) *
            std::pow((1.0 - rp.a) * (1.0 + rp.a), -0.5 * gamma);
  } else if (rp.case_id == 3) {
    inter = B3 * std::pow(t, -(gamma + 1.0));
    if (rp.A > 0.0)
      extra = B4 * std::pow(rp.A, gamma - 1.0) *
              std::pow(t, -(2.0 * sp.m + 1.0 + sp.beta2));
  } else {
    throw std::invalid_argument("reduced_balance: case_id must be 1, 2 or 3");
  }
  BalanceEval be;
  be.value = v_term + inter + extra;
  be.scale = std::fabs(v_term) + std::fabs(inter) + std::fabs(extra);
  return be;
}

}  // namespace

double reduced_balance(const SpaceParams& sp, const RegimeParams& rp, double B1,
                       double B3, double B4, double t, double Vval) {
  return balance_eval(sp, rp, B1, B3, B4, t, Vval).value;
}

double closed_form_tstar(const SpaceParams& sp, const RegimeParams& rp,
                         double B1, double B3, double V0) {
  if (rp.case_id != 1)
    throw std::invalid_argument("closed_form_tstar: case 1 only");
  if (!(V0 > 0.0)) throw std::invalid_argument("closed_form_tstar: V0 must be > 0");
  const double gamma = double(sp.N - 2 * sp.m);
  return std::pow(B3 * std::pow(rp.M1, gamma) / (B1 * V0), 1.0 / sp.iota);
}

Vec reduced_residual(const SpaceParams& sp, const RegimeParams& rp,
                     const Potential& V, int k, const EnergyConstants& ec,
                     double t, double r_bar, const Vec& y2_bar) {
  sp.require_full_pipeline("reduced_residual");
  if (int(y2_bar.size()) != sp.N - 3)
    throw std::invalid_argument("reduced_residual: y2_bar must have size N-3");
  RegimeScales sc = regime_scales(t * std::pow(double(k), [&] {
                                    // window exponent depends on case only
                                    return rp.case_id == 1
                                               ? double(sp.N - 2 * sp.m) /
                                                     (double(sp.N - 4 * sp.m) -
                                                      sp.alpha)
                                               : double(sp.N - 2 * sp.m) /
                                                     double(sp.N - 4 * sp.m);
                                  }()),
                                  k, rp, sp);
  DoubledCircleConfig cfg;
  cfg.k = k;
  cfg.r_bar = r_bar;
  cfg.h_bar = sc.h_bar;
  cfg.y2_bar.assign(size_t(sp.N - 3), 0.0);
  auto [B3, B4] = const_B3_B4(sp, cfg, ec.B2, nullptr);

  double gr = 0.0;
  Vec gy;
  V.grad_W(sp, r_bar, y2_bar, gr, gy);
  const double Wv = V.W(sp, r_bar, y2_bar);
  const double wscale = std::max(std::fabs(Wv), 1e-30);

  Vec res(size_t(sp.N - 1), 0.0);
  res[0] = gr * r_bar / wscale;
  for (int i = 0; i < sp.N - 3; ++i)
    res[size_t(1 + i)] = gy[size_t(i)] * r_bar / wscale;
  const BalanceEval be = balance_eval(sp, rp, ec.B1, B3, B4, t,
                                      V.V(r_bar, y2_bar));
  res.back() = be.value / std::max(be.scale, 1e-300);
  return res;
}

namespace {

double sup_norm(const Vec& v) {
  double s = 0.0;
  for (double x : v) s = std::max(s, std::fabs(x));
  return s;
}

// Solve (A + mu I) x = b in place for small dense A (Gaussian elimination).
bool solve_regularized(std::vector<Vec> A, Vec b, double mu, Vec& x) {
  const size_t n = b.size();
  for (size_t i = 0; i < n; ++i) A[i][i] += mu;
  for (size_t col = 0; col < n; ++col) {
    size_t piv = col;
    for (size_t r = col + 1; r < n; ++r)
      if (std::fabs(A[r][col]) > std::fabs(A[piv][col])) piv = r;
    if (std::fabs(A[piv][col]) < 1e-300) return false;
    std::swap(A[piv], A[col]);
    std::swap(b[piv], b[col]);
    for (size_t r = col + 1; r < n; ++r) {
      const double f = A[r][col] / A[col][col];
      for (size_t c = col; c < n; ++c) A[r][c] -= f * A[col][c];
      b[r] -= f * b[col];
    }
  }
  x.assign(n, 0.0);
  for (size_t i = n; i-- > 0;) {
    double s = b[i];
    for (size_t j = i + 1; j < n; ++j) s -= A[i][j] * x[j];
    x[i] = s / A[i][i];
  }
  return true;
}

}  // namespace

ReducedState solve_reduced(const SpaceParams& sp, const RegimeParams& rp,
                           const Potential& V, int k, const ReducedState& init,
                           int max_iter) {
  sp.require_full_pipeline("solve_reduced");
  const int n = sp.N - 1;
  const EnergyConstants ec = compute_energy_constants(
      sp, DoubledCircleConfig{k, std::max(init.r_bar, 0.1), 0.5,
                              Vec(size_t(sp.N - 3), 0.0)},
      false);

  Vec x(size_t(n), 0.0);
  x[0] = init.r_bar;
  for (int i = 0; i < sp.N - 3; ++i)
    x[size_t(1 + i)] = i < int(init.y2_bar.size()) ? init.y2_bar[size_t(i)] : 0.0;
  x.back() = std::clamp(init.t, rp.L0, rp.L1);

  auto clampx = [&](Vec& v) {
    v[0] = std::max(v[0], 0.2 * V.r0);
    v.back() = std::clamp(v.back(), rp.L0, rp.L1);
  };
  auto eval = [&](const Vec& v) {
    Vec y2(v.begin() + 1, v.end() - 1);
    return reduced_residual(sp, rp, V, k, ec, v.back(), v[0], y2);
  };

  ReducedState st = init;
  st.used_bisection = false;
  Vec r = eval(x);
  double rnorm = sup_norm(r);
  double mu = 1e-6;
  int it = 0;
  int stall = 0;
  bool tried_bisection = false;

  // One-shot fallback: snap the t component onto the balance root at the
  // current (r̄, ȳ'') by scanning [L0, L1] for a sign change and bisecting.
  auto try_bisect = [&]() -> bool {
    if (tried_bisection) return false;
    tried_bisection = true;
    auto bal = [&](double t) {
      Vec v = x;
      v.back() = t;
      return eval(v).back();
    };
    const int S = 128;
    double lo = rp.L0, hi = rp.L1;
    double prev_t = rp.L0, prev_b = bal(rp.L0);
    bool found = false;
    for (int i = 1; i <= S && !found; ++i) {
      const double tt = rp.L0 + (rp.L1 - rp.L0) * double(i) / double(S);
      const double bb = bal(tt);
      if (prev_b == 0.0 || prev_b * bb < 0.0) {
        lo = prev_t;
        hi = tt;
        found = true;
      }
      prev_t = tt;
      prev_b = bb;
    }
    if (!found) return false;
    double blo = bal(lo);
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      const double bm = bal(mid);
      if (blo * bm <= 0.0)
        hi = mid;
      else {
        lo = mid;
        blo = bm;
      }
    }
    x.back() = 0.5 * (lo + hi);
    r = eval(x);
    rnorm = sup_norm(r);
    st.used_bisection = true;
    return true;
  };

  std::vector<Vec> J(size_t(n), Vec(size_t(n), 0.0));
  while (rnorm >= 1e-9 && it < max_iter) {
    ++it;
    // finite-difference Jacobian, column per variable
    for (int j = 0; j < n; ++j) {
      const double h = 1e-6 * std::max(1.0, std::fabs(x[size_t(j)]));
      Vec xp = x, xm = x;
      xp[size_t(j)] += h;
      xm[size_t(j)] -= h;
      clampx(xp);
      clampx(xm);
      const double span = xp[size_t(j)] - xm[size_t(j)];
      Vec rp_ = eval(xp), rm_ = eval(xm);
      for (int i = 0; i < n; ++i)
        J[size_t(i)][size_t(j)] = span != 0.0
                                      ? (rp_[size_t(i)] - rm_[size_t(i)]) / span
                                      : 0.0;
    }
    // normal equations
    std::vector<Vec> JtJ(size_t(n), Vec(size_t(n), 0.0));
    Vec Jtr(size_t(n), 0.0);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += J[size_t(i)][size_t(a)] * J[size_t(i)][size_t(b)];
        JtJ[size_t(a)][size_t(b)] = s;
      }
    for (int a = 0; a < n; ++a) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += J[size_t(i)][size_t(a)] * r[size_t(i)];
      Jtr[size_t(a)] = -s;
    }
    bool accepted = false;
    for (int attempt = 0; attempt < 10 && !accepted; ++attempt) {
      Vec dx;
      if (!solve_regularized(JtJ, Jtr, mu, dx)) {
        mu *= 10.0;
        continue;
      }
      // trust-region cap keeps the iterate in the local basin
      const double cap = 0.25 * std::max(1.0, sup_norm(x));
      const double dn = sup_norm(dx);
      if (dn > cap)
        for (double& d : dx) d *= cap / dn;
      Vec xn = x;
      for (int i = 0; i < n; ++i) xn[size_t(i)] += dx[size_t(i)];
      clampx(xn);
      Vec rn = eval(xn);
      const double rn_norm = sup_norm(rn);
      if (rn_norm < rnorm) {
        x = xn;
        r = rn;
        rnorm = rn_norm;
        mu = std::max(mu / 3.0, 1e-12);
        accepted = true;
      } else {
        mu *= 10.0;
      }
    }
    if (accepted) {
      // slow-progress shortcut: when damped steps are still far from any
      // root after a few iterations, snapping t onto the balance root at
      // the frozen (r̄, ȳ'') usually lands inside the Newton basin.
      if (it == 3 && rnorm > 0.5) try_bisect();
    } else {
      ++stall;
      if (try_bisect()) {
        stall = 0;
        continue;
      }
      if (stall >= 2) break;
    }
  }

  st.r_bar = x[0];
  st.y2_bar.assign(x.begin() + 1, x.end() - 1);
  st.t = x.back();
  st.iterations = it;
  st.residual_norm = rnorm;
  const double rho = rp.case_id == 1
                         ? double(sp.N - 2 * sp.m) /
                               (double(sp.N - 4 * sp.m) - sp.alpha)
                         : double(sp.N - 2 * sp.m) / double(sp.N - 4 * sp.m);
  st.lambda = st.t * std::pow(double(k), rho);
  st.h_bar = regime_scales(st.lambda, k, rp, sp).h_bar;

  // infinity-norm condition estimate of the last Jacobian
  {
    double jn = 0.0;
    for (int i = 0; i < n; ++i) {
      double rs = 0.0;
      for (int j = 0; j < n; ++j) rs += std::fabs(J[size_t(i)][size_t(j)]);
      jn = std::max(jn, rs);
    }
    std::vector<Vec> Jinv(size_t(n), Vec(size_t(n), 0.0));
    bool ok = true;
    for (int col = 0; col < n && ok; ++col) {
      Vec e(size_t(n), 0.0), sol;
      e[size_t(col)] = 1.0;
      ok = solve_regularized(J, e, 0.0, sol);
      for (int row = 0; ok && row < n; ++row)
        Jinv[size_t(row)][size_t(col)] = sol[size_t(row)];
    }
    double in_ = 0.0;
    for (int i = 0; i < n; ++i) {
      double rs = 0.0;
      for (int j = 0; j < n; ++j) rs += std::fabs(Jinv[size_t(i)][size_t(j)]);
      in_ = std::max(in_, rs);
    }
    st.jacobian_cond = ok ? jn * in_ : 1e300;
  }

  bool near_ok = true;
  if (V.has_critical) {
    double d2 = (st.r_bar - V.r0) * (st.r_bar - V.r0);
    for (int i = 0; i < sp.N - 3; ++i) {
      const double dd = st.y2_bar[size_t(i)] - V.y20[size_t(i)];
      d2 += dd * dd;
    }
    near_ok = std::sqrt(d2) <= rp.theta;
  }
  st.converged = rnorm < 1e-9 && st.t >= rp.L0 && st.t <= rp.L1 && near_ok;
  return st;
}

}  // namespace polybubble

#include "polybubble/cli_commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <future>
#include <set>
#include <thread>
#include <vector>

#include "polybubble/bubble.hpp"
#include "polybubble/config_geometry.hpp"
#include "polybubble/pohozaev.hpp"
#include "polybubble/potential.hpp"
#include "polybubble/quadrature.hpp"
#include "polybubble/reduced_energy.hpp"
#include "polybubble/residual_norms.hpp"

namespace polybubble {

namespace {

std::string fmt(const char* f, ...) {
  char buf[256];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

Report make_report(const char* command, const RunConfig& cfg) {
  Report r;
  r.command = command;
  r.config_hash = hex64(fnv1a64(cfg.canonical()));
  r.seed = cfg.seed;
  r.version = kReportVersion;
  return r;
}

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// lambda = t k^rho window exponent of the regime
double regime_rho(const SpaceParams& sp, int case_id) {
  const double gamma = double(sp.N - 2 * sp.m);
  return case_id == 1 ? gamma / sp.iota : gamma / double(sp.N - 4 * sp.m);
}

}  // namespace

Report cmd_constants(const RunConfig& cfg) {
  Report rep = make_report("constants", cfg);
  const SpaceParams sp = cfg.space();
  const double gamma = double(sp.N - 2 * sp.m);
  const std::string sps = fmt("N=%d m=%d", sp.N, sp.m);

  {
    const double exact = double(bubble_normalization_int(sp));
    rep.add("normalization product", sps, bubble_normalization(sp), exact,
            1e-12 * exact);
  }
  {
    const DualValue dv = integral_U2(sp, 1.0);
    rep.add("bubble mass, dual route", sps, dv.quadrature, dv.closed_form,
            1e-8 * std::fabs(dv.closed_form));
    if (sp.N == 6 && sp.m == 1) {
      const double ref = 96.0 * std::pow(std::acos(-1.0), 3);
      rep.add("bubble mass, closed reference", sps, dv.closed_form, ref,
              1e-8 * ref);
    }
  }
  {
    const DualValue dv = integral_Umstar_minus1(sp, 1.0);
    rep.add("interaction mass, dual route", sps, dv.quadrature, dv.closed_form,
            1e-8 * std::fabs(dv.closed_form));
  }

  const double B1 = const_B1(sp);
  rep.add("B1, derivative route", sps, const_B1_numeric(sp), B1,
          1e-4 * std::fabs(B1));

  const double B2 = const_B2_closed(sp);
  const B2Fit fit = const_B2_fit(sp);
  rep.add("B2, far-field fit", sps, fit.B2, B2, 0.03 * std::fabs(B2));
  rep.add("B2 separation exponent", sps, fit.exp_d, -gamma, 0.05);
  rep.add("B2 scale exponent", sps, fit.exp_lambda, -(gamma + 1.0), 0.05);

  // exact interaction sums as the reference for the assembled constants
  DoubledCircleConfig lat;
  lat.k = 2048;
  lat.r_bar = cfg.r_bar;
  lat.h_bar = cfg.h_bar;
  lat.y2_bar.assign(size_t(sp.N - 3), 0.0);
  const std::string lats =
      fmt("k=%d r_bar=%g h_bar=%g", lat.k, lat.r_bar, lat.h_bar);
  bool in_regime = false;
  const auto [B3, B4] = const_B3_B4(sp, lat, B2, &in_regime);
  const double s = std::sqrt((1.0 - lat.h_bar) * (1.0 + lat.h_bar));
  {
    const double ref = B2 * lattice_sum_same(gamma, lat);
    const double asym = B3 * std::pow(double(lat.k) / s, gamma);
    rep.add("B3 against the exact sum", lats, asym, ref, 0.02 * std::fabs(ref));
  }
  {
    const double ref = B2 * lattice_sum_cross(gamma, lat);
    const double asym =
        B4 * double(lat.k) / (std::pow(lat.h_bar, gamma - 1.0) * s);
    rep.add("B4 against the exact sum", lats, asym, ref, 0.02 * std::fabs(ref));
    rep.add("cross asymptotic in regime", lats, in_regime ? 1.0 : 0.0, 1.0,
            0.0);
  }
  {
    const WholeSpaceRatio ws = whole_space_pohozaev_ratio(sp);
    rep.add("pohozaev ratio", sps, ws.ratio, 1.0, 1e-6);
    const auto [dn, dd] = dilation_exponent_deficit(sp);
    rep.add("volume scaling exponent", sps, double(dn) / double(dd), 0.0, 0.0);
  }
  rep.finalize();
  return rep;
}

Report cmd_lattice(const RunConfig& cfg) {
  Report rep = make_report("lattice", cfg);
  const SpaceParams sp = cfg.space();
  const double gamma = double(sp.N - 2 * sp.m);

  {
    const double ref = std::riemann_zeta(gamma);
    rep.add("zeta tail series", fmt("s=%g", gamma), zeta_series(gamma), ref,
            1e-12 * ref);
  }

  DoubledCircleConfig top;
  top.k = cfg.lattice_k;
  top.r_bar = cfg.r_bar;
  top.h_bar = cfg.h_bar;
  top.y2_bar.assign(size_t(sp.N - 3), 0.0);
  const std::string tops =
      fmt("k=%d r_bar=%g h_bar=%g", top.k, top.r_bar, top.h_bar);
  {
    const SameAsymptotic sa = asymptotic_same(top, sp);
    const double ref = 2.0 * std::riemann_zeta(gamma) /
                       std::pow(2.0 * std::acos(-1.0) * top.r_bar, gamma);
    rep.add("same-circle constant", tops, sa.A1, ref, 1e-12 * ref);
    rep.add("same-circle ratio", tops,
            lattice_sum_same(gamma, top) / sa.predicted, 1.0, 0.01);
  }
  {
    const CrossAsymptotic ca = asymptotic_cross(top, sp);
    rep.add("cross-circle ratio", tops,
            lattice_sum_cross(gamma, top) / ca.predicted, 1.0, 0.02);
  }

  // refinement ladder with the height co-scaled as 1/sqrt(k): the leading
  // cross deviation is quadratic in the height, so along this family it
  // decays like 1/k while h k still grows
  std::set<int> rungs;
  for (int d = 16; d >= 1; d /= 2) rungs.insert(std::max(2, cfg.lattice_k / d));
  std::vector<double> lk_c, le_c, lk_s, le_s;
  bool regime_ok = true;
  for (int k : rungs) {
    DoubledCircleConfig c = top;
    c.k = k;
    c.h_bar = std::min(0.95, cfg.h_bar * std::sqrt(double(cfg.lattice_k) / k));
    const std::string ins = fmt("k=%d r_bar=%g h_bar=%g", k, c.r_bar, c.h_bar);
    const double rs =
        lattice_sum_same(gamma, c) / asymptotic_same(c, sp).predicted;
    const CrossAsymptotic ca = asymptotic_cross(c, sp);
    const double rc = lattice_sum_cross(gamma, c) / ca.predicted;
    regime_ok = regime_ok && ca.in_regime;
    rep.add(fmt("cross-circle ratio, rung k=%d", k), ins, rc, 1.0, 0.03);
    if (rs != 1.0 && rc != 1.0) {
      lk_s.push_back(std::log(double(k)));
      le_s.push_back(std::log(std::fabs(rs - 1.0)));
      lk_c.push_back(std::log(double(k)));
      le_c.push_back(std::log(std::fabs(rc - 1.0)));
    }
  }
  rep.add("ladder in regime", fmt("rungs=%zu", rungs.size()),
          regime_ok ? 1.0 : 0.0, 1.0, 0.0);
  if (lk_c.size() >= 3) {
    rep.add("cross deviation rate", fmt("rungs=%zu", lk_c.size()),
            fit_line(lk_c, le_c).slope, -1.0, 0.2);
    rep.add("same deviation rate", fmt("rungs=%zu", lk_s.size()),
            fit_line(lk_s, le_s).slope, -2.0, 0.25);
  }
  rep.finalize();
  return rep;
}

Report cmd_residual_scan(const RunConfig& cfg) {
  if (cfg.sweep_k.empty())
    throw ConfigError("residual-scan needs a nonempty 'sweep_k'");
  if (cfg.sweep_t.empty())
    throw ConfigError("residual-scan needs a nonempty 'sweep_t'");
  Report rep = make_report("residual_scan", cfg);
  const SpaceParams sp = cfg.space();
  const RegimeParams rp = cfg.regime();
  const Potential V =
      make_preset(cfg.preset, sp, cfg.r0, cfg.y20, cfg.width, cfg.amplitude);

  ScalingSweep sw;
  sw.ks = cfg.sweep_k;
  sw.ts = cfg.sweep_t;
  sw.delta = cfg.delta;
  sw.seed = cfg.seed;
  sw.jobs = cfg.jobs;
  const ScalingStudy st = residual_scaling_study(sp, rp, V, sw);

  rep.add("cells evaluated", fmt("k=%zu t=%zu", cfg.sweep_k.size(),
                                 cfg.sweep_t.size()),
          double(st.rows.size()),
          double(cfg.sweep_k.size() * cfg.sweep_t.size()), 0.0);
  for (const ScalingRow& row : st.rows)
    if (!std::isfinite(row.norm))
      rep.add(fmt("cell finite, k=%d lambda=%g", row.k, row.lambda),
              fmt("h_bar=%g", row.h_bar), row.norm, 0.0, 0.0);

  const double beta = rp.case_id == 1 ? sp.beta1 : sp.beta2;
  rep.add_upper("residual decay slope",
                fmt("case=%d beta=%g", rp.case_id, beta), st.slope,
                -(2.0 * sp.m + 1.0 - beta) / 2.0, 0.15);

  rep.artifact_name = "residual_scan_cells.csv";
  rep.artifact_csv = scaling_csv(st);
  rep.finalize();
  return rep;
}

Report cmd_solve(const RunConfig& cfg) {
  if (cfg.sweep_k.empty())
    throw ConfigError("solve needs a nonempty 'sweep_k'");
  Report rep = make_report("solve", cfg);
  const SpaceParams sp = cfg.space();
  const RegimeParams rp = cfg.regime();
  const Potential V =
      make_preset(cfg.preset, sp, cfg.r0, cfg.y20, cfg.width, cfg.amplitude);

  ReducedState init;
  init.t = 1.0;
  init.r_bar = cfg.r0;
  init.y2_bar = cfg.y20;

  // parallel map over the k sweep, merged back in sweep order
  const size_t n = cfg.sweep_k.size();
  std::vector<ReducedState> states(n);
  const unsigned jobs =
      cfg.jobs > 0 ? unsigned(cfg.jobs)
                   : std::max(1u, std::thread::hardware_concurrency());
  for (size_t base = 0; base < n; base += jobs) {
    std::vector<std::future<ReducedState>> batch;
    for (size_t i = base; i < std::min(n, base + jobs); ++i)
      batch.push_back(std::async(std::launch::async, [&, i] {
        return solve_reduced(sp, rp, V, cfg.sweep_k[i], init);
      }));
    for (size_t i = base; i < std::min(n, base + jobs); ++i)
      states[i] = batch[i - base].get();
  }

  const double B1 = const_B1(sp);
  const double B2 = const_B2_closed(sp);
  std::string traj =
      "k,t,r_bar,h_bar,lambda,y2_sup,residual,iterations,bisection,converged\n";
  for (size_t i = 0; i < n; ++i) {
    const int k = cfg.sweep_k[i];
    const ReducedState& st = states[i];
    if (!st.converged) rep.status = 3;
    rep.add(fmt("converged, k=%d", k), fmt("preset=%s", cfg.preset.c_str()),
            st.converged ? 1.0 : 0.0, 1.0, 0.0);
    if (V.has_critical) {
      rep.add(fmt("radial drift, k=%d", k), fmt("r0=%g", V.r0),
              std::fabs(st.r_bar - V.r0), 0.0, 1e-3);
      double ysup = 0.0;
      for (size_t j = 0; j < st.y2_bar.size(); ++j)
        ysup = std::max(ysup,
                        std::fabs(st.y2_bar[j] -
                                  (j < V.y20.size() ? V.y20[j] : 0.0)));
      rep.add(fmt("axial drift, k=%d", k), fmt("dim=%d", sp.N - 3), ysup, 0.0,
              1e-3);
    } else if (rp.case_id == 1 && st.converged) {
      // flat potential: the balance root has a closed form once B3 is
      // rebuilt at the solved geometry
      DoubledCircleConfig c;
      c.k = k;
      c.r_bar = st.r_bar;
      c.h_bar = st.h_bar;
      c.y2_bar.assign(size_t(sp.N - 3), 0.0);
      const auto [B3, B4] = const_B3_B4(sp, c, B2, nullptr);
      const double tstar =
          closed_form_tstar(sp, rp, B1, B3, V.V(st.r_bar, st.y2_bar));
      rep.add(fmt("balance point, k=%d", k), fmt("M1=%g", rp.M1), st.t, tstar,
              1e-6 * std::fabs(tstar));
    }
    double ysup = 0.0;
    for (double c : st.y2_bar) ysup = std::max(ysup, std::fabs(c));
    traj += fmt("%d,", k) + num(st.t) + "," + num(st.r_bar) + "," +
            num(st.h_bar) + "," + num(st.lambda) + "," + num(ysup) + "," +
            num(st.residual_norm) + "," + std::to_string(st.iterations) + "," +
            (st.used_bisection ? "1" : "0") + "," +
            (st.converged ? "1" : "0") + "\n";
  }

  if (V.has_critical) {
    DegreeRegion region;
    region.lo = Vec{V.r0 * 0.9, (V.y2_dim > 0 ? V.y20[0] : 0.0) - 0.1};
    region.hi = Vec{V.r0 * 1.1, (V.y2_dim > 0 ? V.y20[0] : 0.0) + 0.1};
    const double want = cfg.preset == "saddle2d" ? -1.0 : 1.0;
    rep.add("gradient degree", fmt("preset=%s", cfg.preset.c_str()),
            double(degree_of_gradient(sp, V, region)), want, 0.0);
  }

  rep.artifact_name = "solve_trajectory.csv";
  rep.artifact_csv = traj;
  rep.finalize();
  return rep;
}

Report cmd_pohozaev(const RunConfig& cfg) {
  for (double c : cfg.y20)
    if (c != 0.0)
      throw ConfigError(
          "pohozaev needs y20 = 0: the dilation rule is anchored on the "
          "symmetry axis");
  Report rep = make_report("pohozaev", cfg);
  const SpaceParams sp = cfg.space();
  const std::string ins = fmt("r0=%g delta=%g rho=%g n=%d", cfg.r0, cfg.delta,
                              cfg.window_rho, cfg.mass_samples);
  for (const CheckRow& row :
       pohozaev_report(sp, cfg.r0, cfg.delta, cfg.window_rho,
                       size_t(cfg.mass_samples), cfg.seed))
    rep.rows.push_back(ReportRow{row.name, ins, row.value, row.predicted,
                                 row.tolerance, false, row.pass});
  rep.finalize();
  return rep;
}

Report cmd_norms(const RunConfig& cfg) {
  Report rep = make_report("norms", cfg);
  const SpaceParams sp = cfg.space();
  sp.require_full_pipeline("cmd_norms");
  const CutoffProfile cut = make_cutoff(sp, cfg.r0, cfg.y20, cfg.delta);

  DoubledCircleConfig cc;
  cc.k = cfg.ansatz_k;
  cc.r_bar = cfg.r_bar;
  cc.h_bar = cfg.h_bar;
  cc.y2_bar = cfg.y20;
  const double lambda =
      cfg.lambda > 0.0
          ? cfg.lambda
          : 0.5 * std::pow(double(cc.k), regime_rho(sp, cfg.case_id));
  const AnsatzZ az = make_ansatz(sp, cc, lambda, cut);
  const double tau = tau_for_case(sp, cfg.case_id);
  const std::string ins =
      fmt("k=%d h_bar=%g lambda=%g tau=%g", cc.k, cc.h_bar, lambda, tau);

  const NonlinearCheck nc =
      nonlinear_estimate_check(az, tau, {1e-1, 1e-2, 1e-3, 1e-4}, cfg.seed);
  double lo = 1e300, hi = 0.0;
  for (const NonlinearRow& row : nc.rows)
    if (row.eps > 0.0) {
      lo = std::min(lo, row.ratio);
      hi = std::max(hi, row.ratio);
    }
  rep.add("nonlinear remainder order", ins, nc.exponent,
          std::min(2.0, sp.m_star - 1.0), 1e-12);
  rep.add("nonlinear band floor positive", ins, lo > 0.0 ? 1.0 : 0.0, 1.0,
          0.0);
  rep.add("nonlinear remainder band", ins, hi / lo, 1.0, 3.0);

  const size_t n = size_t(cfg.mass_samples);
  const AnnulusMass m1 = annulus_mass(az, {1e-4, tau}, n, cfg.seed);
  const AnnulusMass m2 = annulus_mass(az, {2e-4, tau}, n, cfg.seed);
  rep.add("shell mass resolution", ins, m1.mc_error / m1.value, 0.0, 0.02);
  rep.add("shell mass quadrupling", ins, m2.value / m1.value, 4.0, 0.08);
  rep.finalize();
  return rep;
}

Report run_command(const std::string& name, const RunConfig& cfg) {
  if (name == "constants") return cmd_constants(cfg);
  if (name == "lattice") return cmd_lattice(cfg);
  if (name == "residual-scan") return cmd_residual_scan(cfg);
  if (name == "solve") return cmd_solve(cfg);
  if (name == "pohozaev") return cmd_pohozaev(cfg);
  if (name == "norms") return cmd_norms(cfg);
  throw ConfigError("unknown command '" + name + "'");
}

}  // namespace polybubble

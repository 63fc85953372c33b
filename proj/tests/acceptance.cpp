// Acceptance gate: nine end-to-end criteria, one PASS/FAIL line each.
// Exit status is the number of failed criteria.
#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "nlslab/field.hpp"
#include "nlslab/geometry.hpp"
#include "nlslab/harness.hpp"
#include "nlslab/linprop.hpp"
#include "nlslab/modes.hpp"
#include "nlslab/nlsolve.hpp"
#include "nlslab/params.hpp"
#include "nlslab/transforms.hpp"
#include "nlslab/waveops.hpp"

using namespace nlslab;
namespace fs = std::filesystem;

static int g_failures = 0;

static void line(int k, const char* what, bool pass, const std::string& detail) {
  std::printf("%s  criterion %d  %-38s %s\n", pass ? "PASS" : "FAIL", k, what,
              detail.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

static std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), f, a, b, c);
  return buf;
}

static std::vector<double> geometric(double t0, double tend, double r) {
  std::vector<double> v;
  for (double t = t0 * r; t < tend * (1 - 1e-12); t *= r) v.push_back(t);
  v.push_back(tend);
  return v;
}

static Config cfg_of(const std::string& text) { return parse_config_text(text); }

static nlohmann::json run_and_report(const Config& cfg, const std::string& leaf) {
  fs::path d = fs::temp_directory_path() / "nlslab_acceptance" / leaf;
  fs::remove_all(d);
  run_experiment(cfg, d.string());
  std::ifstream is(d / "report.json");
  return nlohmann::json::parse(is);
}

static double flag_value(const nlohmann::json& rep, const std::string& id,
                         bool* pass) {
  for (const auto& f : rep["flags"])
    if (f["id"] == id) {
      if (pass) *pass = f["pass"].get<bool>();
      return f["value"].get<double>();
    }
  if (pass) *pass = false;
  return NAN;
}

// 1. zero-mode growth law: mean of w follows W(1)(1 + 2 i a^2 ln t) exactly
static void criterion1() {
  Params prm;
  prm.a = 1.0;
  Grid g(16.0, 32);
  SpectralField f(g, Rep::spectral);
  f.set_hat(g.slot(0), 1.0 / std::sqrt(double(g.n)));  // mean of w at t=1 is 1
  LinearRun run = run_linear(f, 1.0, geometric(1.0, 1e3, 2.0), prm);
  const double lt = std::log(1e3);
  const cplx W = std::sqrt(double(g.n)) * run.snaps.back().hat(g.slot(0)) *
                 std::exp(cplx(0.0, prm.a * prm.a * lt));
  const double err = std::abs(W - cplx(1.0, 2.0 * lt));
  line(1, "zero-mode growth law at t=1e3", err <= 1e-8, fmt("err=%.3g", err));
}

// 2. per-mode ceiling |uhat(t)| <= (t/t0)^{a^2}(|u0+| + |u0-|), constant 1
static void criterion2() {
  double worst = 0.0;
  for (double a : {0.25, 0.5, 1.0}) {
    Params prm;
    prm.a = a;
    Grid g(16.0, 64);
    Config dc = cfg_of("family = random-phase\namplitude = 0.1\nwidth = 2\n");
    SpectralField f = initial_data(dc, g, 11);
    GrowthCheck chk;
    run_linear(f, 1.0, geometric(1.0, 1e4, 2.0), prm, 1e-10, &chk);
    worst = std::max(worst, chk.max_ratio);
  }
  line(2, "mode growth ceiling, a in {1/4,1/2,1}", worst <= 1.0 + 1e-9,
       fmt("max ratio=%.12f", worst));
}

// 3. linear scattering rates: band data ~1/t, capped low-frequency data ~1/4-
static void criterion3() {
  auto band = run_and_report(
      cfg_of("kind = linear-scatter\na = 0.5\ngamma = 0\ndelta = 0.05\n"
             "grid_L = 16\ngrid_n = 64\nfamily = band\namplitude = 0.1\n"
             "band_lo = 0.25\nband_hi = 1\nt_end = 1e4\nfit_lo = 85\n"
             "exponent_min = 0.9\n"),
      "lin_band");
  auto cap = run_and_report(
      cfg_of("kind = linear-scatter\na = 0.5\ngamma = 0\ndelta = 0.05\n"
             "grid_L = 16\ngrid_n = 64\nfamily = lowfreq-cap\n"
             "amplitude = 0.05\ncap_gamma = 0\nt_end = 1e4\nfit_lo = 85\n"
             "exponent_min = 0.10\n"),
      "lin_cap");
  bool p1 = false, p2 = false;
  const double e1 = flag_value(band, "residual-exponent", &p1);
  const double e2 = flag_value(cap, "residual-exponent", &p2);
  line(3, "linear scattering decay exponents", p1 && p2,
       fmt("band=%.3f (>=0.9), capped=%.3f (>=0.10)", e1, e2));
}

// 4. conservation law, energy identity, and the constant background
static void criterion4() {
  Params prm;
  prm.a = 0.5;
  Grid g(16.0, 128);
  Config dc = cfg_of("family = gaussian\namplitude = 0.01\nwidth = 1\n");
  SpectralField v0 = v_from_u(initial_data(dc, g, 1), 1.0, prm);
  NonlinearOpts opts;
  opts.fixed_dt = 1e-3;
  NonlinearRun run = run_nonlinear(v0, 1.0, geometric(1.0, 4.0, std::sqrt(2.0)),
                                   prm, opts);
  const double drift =
      std::abs(run.diag.back().Q - run.diag.front().Q) / (4.0 - 1.0);
  double gmax = 0.0;
  for (double r : gp2_residual(run)) gmax = std::max(gmax, std::abs(r));
  SpectralField va(g, Rep::physical);
  for (std::size_t j = 0; j < g.n; ++j) va[j] = prm.a;
  const double Ea = std::abs(energy_E(va, 1.0, prm));
  NonlinearRun fixed = run_nonlinear(va, 1.0, geometric(1.0, 10.0, 2.0), prm);
  double dev = 0.0;
  SpectralField vend = fixed.v_snaps.back().to_physical();
  for (std::size_t j = 0; j < g.n; ++j)
    dev = std::max(dev, std::abs(vend[j] - cplx(prm.a)));
  const bool pass = drift <= 1e-8 && gmax <= 1e-5 && Ea <= 1e-12 && dev <= 1e-11;
  line(4, "charge drift, energy law, background", pass,
       fmt("drift=%.2e, energy-res=%.2e, fixed-point=%.2e", drift, gmax, dev));
}

// 5. nonlinear scattering: Cauchy pullback, decay rate, weighted state
static void criterion5() {
  Params prm;
  prm.a = 0.5;
  prm.gamma = 0.0;
  prm.delta = 0.05;
  Grid g(16.0, 128);
  Config dc = cfg_of("family = gaussian\namplitude = 0.01\nwidth = 1\n");
  SpectralField v0 = v_from_u(initial_data(dc, g, 1), 1.0, prm);
  auto times = geometric(1.0, 512.0, std::pow(2.0, 0.25));
  NonlinearRun run = run_nonlinear(v0, 1.0, times, prm);
  NonlinearScattering ns = nonlinear_scattering_state(run);
  RateFit rf = rate_fit(run.times, ns.residuals, 4.5, 512.0);
  auto weighted_max = [&](const SpectralField& fp) {
    double m = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) {
      const double axi = std::abs(g.xi(j));
      if (j == g.slot(0) || j == g.n / 2 || axi * axi > 1.0) continue;
      m = std::max(m, std::pow(axi, 2.0 * (prm.gamma + prm.delta)) *
                          std::abs(fp.hat(j)));
    }
    return m;
  };
  const double wmax = weighted_max(ns.f_plus);
  NonlinearOpts fine;
  fine.eta = 0.05;
  NonlinearRun run2 = run_nonlinear(v0, 1.0, times, prm, fine);
  const double wmax2 = weighted_max(nonlinear_scattering_state(run2).f_plus);
  const double rel = std::abs(wmax2 - wmax) / wmax;
  const bool pass = ns.cauchy_ok && rf.exponent >= 0.10 && std::isfinite(wmax) &&
                    rel <= 0.05;
  line(5, "nonlinear scattering and state bound", pass,
       fmt("exponent=%.3f, weighted-max=%.3g (refine rel %.2e)", rf.exponent,
           wmax, rel));
}

// 6. corner angle of the self-similar profile with refinement monotonicity
static void criterion6() {
  bool pass = true;
  std::ostringstream os;
  for (double a : {0.5, 1.0, 2.0}) {
    const double ref = std::exp(-M_PI * a * a / 2.0);
    double dev[3];
    int i = 0;
    for (double X : {250.0, 500.0, 1000.0}) {
      auto tl = tangent_limits(selfsimilar_profile(a, X, 0.05));
      dev[i++] = std::abs(tl.sin_half_theta - ref);
    }
    // monotone up to an absolute floor: once the deviation is orders of
    // magnitude under tolerance, window wobble may tick it back up
    pass = pass && dev[2] <= 1e-2 && dev[2] <= dev[1] + 1e-4 &&
           dev[1] <= dev[0] + 1e-4;
    os << fmt("a=%.1f:%.1e ", a, dev[2]);
  }
  line(6, "corner angle law sin(theta/2)", pass, os.str());
}

// 7. reconstruction: exact node agreement, deviation laws, trace rate
static void criterion7() {
  // (a) exact self-similar snapshots reproduce the exact curves
  const double a = 0.5;
  Params prm;
  prm.a = a;
  Grid g(5.0, 1024);
  std::vector<double> times;
  std::vector<SpectralField> psis;
  for (double t = 1.0; t > 0.1; t *= 0.85) {
    times.push_back(t);
    SpectralField psi(g, Rep::physical);
    for (std::size_t j = 0; j < g.n; ++j) {
      const double x = g.x(j);
      psi[j] = (a / std::sqrt(t)) * std::exp(cplx(0.0, x * x / (4.0 * t)));
    }
    psis.push_back(psi);
  }
  ReconstructOpts opts;
  opts.chi_init = Vec3(0.0, 0.0, 2.0 * a);
  Reconstruction rec = binormal_reconstruct(psis, times, prm, opts);
  double node_err = 0.0, ctau = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    ctau = std::max(ctau, std::max(rec.c_dev[k], rec.tau_dev[k]));
    const double tk = times[k];
    Curve ref = frenet_integrate_fn([&](double) { return a / std::sqrt(tk); },
                                    [&](double x) { return x / (2.0 * tk); },
                                    g.L - g.dx(), g.dx(), Frame{},
                                    Vec3(0.0, 0.0, 2.0 * a * std::sqrt(tk)));
    for (std::size_t j = 0; j < ref.size(); ++j)
      if (std::abs(ref.x[j]) <= 0.9 * g.L)
        node_err = std::max(node_err,
                            (rec.curves[k].chi[j + 1] - ref.chi[j]).norm());
  }
  // (b) chi-trace convergence rate on a deep exact ladder
  auto exact = run_and_report(
      cfg_of("kind = curve\na = 0.8\ngrid_L = 5\ngrid_n = 512\n"
             "amplitude = 0\nt_min = 0.0005\nrung_ratio = 0.85\n"),
      "curve_exact");
  bool ptr = false;
  const double trace = flag_value(exact, "trace-exponent", &ptr);
  // (c) perturbed run: deviation growth laws in the dispersed window
  auto pert = run_and_report(
      cfg_of("kind = curve\na = 0.5\ngamma = 0\ngrid_L = 128\ngrid_n = 512\n"
             "family = gaussian\namplitude = 0.01\nwidth = 0.5\n"
             "t_min = 0.01\nrung_ratio = 0.9\n"
             "ctau_fit_lo = 0.01\nctau_fit_hi = 0.1\n"),
      "curve_pert");
  bool pc = false, pt = false;
  const double cexp = flag_value(pert, "c-deviation-exponent", &pc);
  const double toff = flag_value(pert, "tau-exponent-offset", &pt);
  const bool pass = node_err <= 1e-4 && ctau <= 1e-8 && ptr && pc && pt;
  line(7, "curve reconstruction and deviation laws", pass,
       fmt("node=%.2e, trace-exp=%.3f, c-exp=%.3f", node_err, trace, cexp) +
           fmt(", tau-offset=%.3f", toff));
}

// 8. wave-operator round trips
static void criterion8() {
  Params prm;
  prm.a = 0.5;
  Grid g(16.0, 64);
  Config dc = cfg_of(
      "family = band\namplitude = 0.1\nband_lo = 0.25\nband_hi = 1\n");
  SpectralField up = initial_data(dc, g, 1);
  auto res = linear_wave_operator(up, prm, 1e4);
  LinearRun fwd = run_linear(res.u_at_1, 1.0, geometric(1.0, 1e4, 2.0), prm);
  SpectralField got = scattering_state(fwd).u_plus;
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < g.n; ++j) {
    num += std::norm(got.hat(j) - up.hat(j));
    den += std::norm(up.hat(j));
  }
  const double lin_err = std::sqrt(num / den);

  SpectralField fp(g, Rep::spectral);
  for (std::size_t j = 0; j < g.n; ++j) {
    if (j == g.n / 2) continue;
    const double xi = g.xi(j);
    fp.set_hat(j, 0.01 * std::exp(-xi * xi) * std::exp(cplx(0.0, 0.4 * xi)));
  }
  NonlinearWaveOpts wo;
  wo.T_infinity = 512.0;
  auto nres = nonlinear_wave_operator(fp, prm, wo);
  bool geometric_ok = nres.picard_diffs.size() >= 2;
  for (std::size_t i = 1; i + 1 < nres.picard_diffs.size(); ++i)
    if (nres.picard_diffs[i + 1] > 0.9 * nres.picard_diffs[i] + 1e-13)
      geometric_ok = false;
  SpectralField v0 = v_from_u(nres.u_at_1, 1.0, prm);
  std::vector<double> st(nres.times.begin() + 1, nres.times.end());
  NonlinearScattering ns =
      nonlinear_scattering_state(run_nonlinear(v0, 1.0, st, prm));
  SpectralField refp = linear_free_asymptote(fp, prm, wo.T_infinity);
  num = den = 0.0;
  for (std::size_t j = 0; j < g.n; ++j) {
    num += std::norm(ns.f_plus.hat(j) - refp.hat(j));
    den += std::norm(refp.hat(j));
  }
  const double nl_err = std::sqrt(num / den);
  const bool pass = lin_err <= 1e-3 && geometric_ok && nl_err <= 5e-3;
  line(8, "wave-operator round trips", pass,
       fmt("linear=%.2e (<=1e-3), nonlinear=%.2e (<=5e-3)", lin_err, nl_err));
}

// 9. scheme order: dt halving, grid doubling, transform round trips
static void criterion9() {
  Params prm;
  prm.a = 0.5;
  Grid g(16.0, 64);
  Config dc = cfg_of("family = gaussian\namplitude = 0.01\nwidth = 1\n");
  SpectralField v0 = v_from_u(initial_data(dc, g, 1), 1.0, prm);
  auto final_v = [&](double dt) {
    NonlinearOpts o;
    o.fixed_dt = dt;
    return run_nonlinear(v0, 1.0, {2.0}, prm, o).v_snaps.back().to_spectral();
  };
  SpectralField refv = final_v(2.5e-4);
  auto err_vs_ref = [&](const SpectralField& v) {
    double e = 0.0;
    for (std::size_t j = 0; j < g.n; ++j)
      e += std::norm(v.hat(j) - refv.hat(j));
    return std::sqrt(e);
  };
  const double e1 = err_vs_ref(final_v(4e-3));
  const double e2 = err_vs_ref(final_v(2e-3));
  const double ratio = e1 / e2;

  // grid doubling: band-limited linear results must be grid independent
  Grid g2(16.0, 128);
  Config bc = cfg_of(
      "family = band\namplitude = 0.1\nband_lo = 0.25\nband_hi = 1\n");
  SpectralField b1 = initial_data(bc, g, 1), b2 = initial_data(bc, g2, 1);
  SpectralField r1 = run_linear(b1, 1.0, {100.0}, prm).snaps.back();
  SpectralField r2 = run_linear(b2, 1.0, {100.0}, prm).snaps.back();
  double gd = 0.0;
  for (std::size_t j = 0; j < g.n; ++j) {
    const double xi = g.xi(j);
    if (j == g.n / 2) continue;
    // same physical frequency lives in a different slot on the finer grid
    const long k = std::lround(xi * (2.0 * g2.L) / (2.0 * M_PI));
    gd = std::max(gd, std::abs(r1.hat(j) - r2.hat(g2.slot(k))));
  }

  // transform round trips
  SpectralField rp = initial_data(
      cfg_of("family = random-phase\namplitude = 0.1\n"), g, 5);
  SpectralField rt = rp.to_physical().to_spectral();
  double fft_rt = 0.0;
  for (std::size_t j = 0; j < g.n; ++j)
    fft_rt = std::max(fft_rt, std::abs(rt.hat(j) - rp.hat(j)));
  SpectralField u0 = initial_data(dc, g, 1);
  SpectralField u_rt = u_from_v(v_from_u(u0, 3.0, prm), 3.0, prm);
  double gauge_rt = 0.0;
  {
    SpectralField d1 = u_rt.to_spectral();
    for (std::size_t j = 0; j < g.n; ++j)
      gauge_rt = std::max(gauge_rt, std::abs(d1.hat(j) - u0.hat(j)));
  }
  Grid gh(16.0, 256);
  CurvatureTorsion ct;
  ct.grid = gh;
  ct.c.resize(gh.n);
  ct.tau.resize(gh.n);
  ct.tau_valid.assign(gh.n, 1);
  for (std::size_t j = 0; j < gh.n; ++j) {
    const double x = gh.x(j);
    ct.c[j] = 1.0 + 0.3 * std::cos(M_PI * x / gh.L);
    ct.tau[j] = 0.2 * std::sin(M_PI * x / gh.L);
  }
  CurvatureTorsion ct2 = inverse_hasimoto(hasimoto(ct), DerivMethod::spectral);
  double hrt = 0.0;
  for (std::size_t j = 1; j + 1 < gh.n; ++j)
    hrt = std::max(hrt, std::max(std::abs(ct2.c[j] - ct.c[j]),
                                 std::abs(ct2.tau[j] - ct.tau[j])));
  const bool pass = ratio >= 3.0 && ratio <= 5.5 && gd < 1e-8 &&
                    fft_rt < 1e-12 && gauge_rt < 1e-12 && hrt < 1e-4;
  line(9, "scheme order and transform round trips", pass,
       fmt("dt-ratio=%.2f, grid=%.1e, transforms=%.1e", ratio, gd,
           std::max({fft_rt, gauge_rt, hrt})));
}

int main() {
  criterion1();
  criterion2();
  criterion3();
  criterion4();
  criterion5();
  criterion6();
  criterion7();
  criterion8();
  criterion9();
  if (g_failures == 0)
    std::printf("all 9 acceptance criteria passed\n");
  else
    std::printf("%d acceptance criteria FAILED\n", g_failures);
  return g_failures;
}

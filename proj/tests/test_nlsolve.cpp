#include <cmath>
#include <complex>

#include "doctest.h"
#include "nlslab/nlsolve.hpp"
#include "nlslab/norms.hpp"

using namespace nlslab;

namespace {
const cplx I(0.0, 1.0);

SpectralField small_u(const Grid& g, double amp) {
  return SpectralField::from_hat(g, [&](double xi) {
    const double m = std::abs(xi);
    return (m >= 0.3 && m <= 1.2) ? cplx(amp, -0.4 * amp) : cplx(0.0);
  });
}

std::vector<double> geometric_times(double t0, double t1, int per_octave) {
  std::vector<double> ts;
  const double r = std::pow(2.0, 1.0 / per_octave);
  for (double t = t0 * r; t < t1 * (1.0 - 1e-12); t *= r) ts.push_back(t);
  ts.push_back(t1);
  return ts;
}
}  // namespace

TEST_CASE("gauge maps invert each other") {
  Grid g(16.0, 64);
  Params prm;
  prm.a = 0.8;
  auto u = small_u(g, 0.05);
  auto v = v_from_u(u, 3.7, prm);
  auto back = u_from_v(v, 3.7, prm);
  auto up = u.to_physical();
  double err = 0.0;
  for (std::size_t j = 0; j < g.n; ++j)
    err = std::max(err, std::abs(back[j] - up[j]));
  CHECK(err < 1e-14);
}

TEST_CASE("F_of_u at t = 1 reduces to its w-form") {
  Grid g(16.0, 64);
  Params prm;
  prm.a = 0.7;
  auto u = small_u(g, 0.1);
  auto F = F_of_u(u, 1.0, prm, false);
  auto up = u.to_physical();
  for (std::size_t j = 0; j < g.n; j += 7) {
    const cplx w = up[j];  // gauge factor is 1 at t = 1
    const cplx expect = std::norm(w) * w + prm.a * (w * w + 2.0 * std::norm(w));
    CHECK(std::abs(F[j] - expect) < 1e-14);
  }
  // defocusing flips the overall sign
  prm.sign = Sign::defocusing;
  auto Fd = F_of_u(u, 1.0, prm, false);
  for (std::size_t j = 0; j < g.n; j += 7)
    CHECK(std::abs(Fd[j] + F[j]) < 1e-14);
}

TEST_CASE("constant background is an exact fixed point") {
  Grid g(16.0, 64);
  Params prm;
  prm.a = 1.3;
  auto v = SpectralField::from_physical(g, [&](double) { return cplx(1.3); });
  double t = 1.0;
  for (int i = 0; i < 50; ++i) {
    v = step_strang(v, t, 0.02, prm);
    t += 0.02;
  }
  for (std::size_t j = 0; j < g.n; ++j)
    CHECK(std::abs(v[j] - cplx(1.3)) < 1e-13);
}

TEST_CASE("vacuum v = 0: conserved charge and energy values") {
  Grid g(16.0, 64);
  const double a = 0.9;
  Params prm;
  prm.a = a;
  auto v = SpectralField::from_physical(g, [](double) { return cplx(0.0); });
  CHECK(conservation_Q(v, a) == doctest::Approx(-2.0 * g.L * a * a));
  const double t = 2.0;
  const double expectE = -1.0 / (4.0 * t) * 2.0 * g.L * a * a * a * a;
  CHECK(energy_E(v, t, prm) == doctest::Approx(expectE));
  prm.sign = Sign::defocusing;
  CHECK(energy_E(v, t, prm) == doctest::Approx(-expectE));
  // background itself has zero energy and charge
  auto va = SpectralField::from_physical(g, [&](double) { return cplx(a); });
  CHECK(std::abs(energy_E(va, t, prm)) < 1e-14);
  CHECK(std::abs(conservation_Q(va, a)) < 1e-13);
}

TEST_CASE("charge is conserved to roundoff along a run") {
  Grid g(16.0, 64);
  Params prm;
  prm.a = 0.5;
  auto v = v_from_u(small_u(g, 0.01), 1.0, prm);
  const double q0 = conservation_Q(v, prm.a);
  double t = 1.0;
  for (int i = 0; i < 200; ++i) {
    v = step_strang(v, t, 1e-3, prm);
    t += 1e-3;
  }
  CHECK(std::abs(conservation_Q(v, prm.a) - q0) < 1e-12);
}

TEST_CASE("Strang step is second order: halving dt quarters the error") {
  Grid g(16.0, 64);
  Params prm;
  prm.a = 0.5;
  auto v0 = v_from_u(small_u(g, 0.02), 1.0, prm);
  auto advance = [&](SpectralField v, double dt, int n) {
    double t = 1.0;
    for (int i = 0; i < n; ++i) {
      v = step_strang(v, t, dt, prm);
      t += dt;
    }
    return v;
  };
  auto ref = advance(v0, 0.2 / 64, 64);
  auto c1 = advance(v0, 0.2 / 4, 4);
  auto c2 = advance(v0, 0.2 / 8, 8);
  double e1 = 0.0, e2 = 0.0;
  for (std::size_t j = 0; j < g.n; ++j) {
    e1 = std::max(e1, std::abs(c1[j] - ref[j]));
    e2 = std::max(e2, std::abs(c2[j] - ref[j]));
  }
  const double ratio = e1 / e2;
  CHECK(ratio > 3.2);
  CHECK(ratio < 4.8);
}

TEST_CASE("v-form evolution matches direct integration of the u-form") {
  // independent oracle: RK4 method of lines on
  //   u_t = i u_xx + i s a^2 t^{-1} e^{-2 i s a^2 ln t} conj(u) + i F(u)/t
  Grid g(16.0, 64);
  Params prm;
  prm.a = 0.6;
  auto u0 = small_u(g, 0.02);
  const double t0 = 1.0, t1 = 1.5;

  auto rhs = [&](double t, const SpectralField& u) {
    SpectralField us = u.to_spectral();
    for (std::size_t j = 0; j < g.n; ++j) {
      const double xi = g.xi(j);
      us[j] *= -xi * xi;
    }
    SpectralField out = us.to_physical();
    SpectralField up = u.to_physical();
    SpectralField F = F_of_u(u, t, prm, false);
    const double s = sgn(prm.sign);
    const cplx coup = s * prm.a * prm.a / t *
                      std::exp(cplx(0.0, -2.0 * s * prm.a * prm.a * std::log(t)));
    for (std::size_t j = 0; j < g.n; ++j)
      out[j] = I * (out[j] + coup * std::conj(up[j]) + F[j] / t);
    return out;
  };
  SpectralField u = u0.to_physical();
  const int nsteps = 2000;
  const double dt = (t1 - t0) / nsteps;
  double t = t0;
  for (int i = 0; i < nsteps; ++i) {
    // classical RK4 on fields
    auto k1 = rhs(t, u);
    SpectralField tmp = u;
    for (std::size_t j = 0; j < g.n; ++j) tmp[j] = u[j] + 0.5 * dt * k1[j];
    auto k2 = rhs(t + 0.5 * dt, tmp);
    for (std::size_t j = 0; j < g.n; ++j) tmp[j] = u[j] + 0.5 * dt * k2[j];
    auto k3 = rhs(t + 0.5 * dt, tmp);
    for (std::size_t j = 0; j < g.n; ++j) tmp[j] = u[j] + dt * k3[j];
    auto k4 = rhs(t + dt, tmp);
    for (std::size_t j = 0; j < g.n; ++j)
      u[j] += dt / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]);
    t += dt;
  }

  auto v = v_from_u(u0, t0, prm);
  const int m = 5000;
  const double dtv = (t1 - t0) / m;
  double tv = t0;
  for (int i = 0; i < m; ++i) {
    v = step_strang(v, tv, dtv, prm, false);
    tv += dtv;
  }
  auto u_via_v = u_from_v(v, t1, prm);
  double err = 0.0;
  for (std::size_t j = 0; j < g.n; ++j)
    err = std::max(err, std::abs(u_via_v[j] - u[j]));
  CHECK(err < 1e-6);
}

TEST_CASE("run_nonlinear guards") {
  Grid g(16.0, 64);
  Params prm;
  prm.a = 0.5;
  // too large: refuse
  auto big = v_from_u(small_u(g, 1.0), 1.0, prm);
  CHECK_THROWS_AS(run_nonlinear(big, 1.0, {2.0}, prm), GuardRefusal);
  // Nyquist-band mass: refuse
  auto bad = v_from_u(small_u(g, 1e-3), 1.0, prm);
  SpectralField bs = u_from_v(bad, 1.0, prm).to_spectral();
  bs[g.n / 2 + 1] = cplx(1e-3);  // near-Nyquist mode
  auto vbad = v_from_u(bs, 1.0, prm);
  CHECK_THROWS_AS(run_nonlinear(vbad, 1.0, {2.0}, prm), GuardRefusal);
}

TEST_CASE("energy law holds along a dense run") {
  Grid g(16.0, 64);
  Params prm;
  prm.a = 0.5;
  auto v0 = v_from_u(small_u(g, 0.02), 1.0, prm);
  std::vector<double> times;
  for (int i = 1; i <= 40; ++i) times.push_back(1.0 + 0.01 * i);
  NonlinearOpts opts;
  opts.fixed_dt = 1e-3;
  auto run = run_nonlinear(v0, 1.0, times, prm, opts);
  auto res = gp2_residual(run);
  // scale of dE/dt itself
  const double scale =
      std::abs(run.diag.front().P) / (4.0 * 1.0) + 1e-300;
  for (double r : res) CHECK(r < 1e-4 * std::max(1.0, scale));
  // charge drift per unit time stays tiny
  CHECK(std::abs(run.diag.back().Q - run.diag.front().Q) /
            (run.times.back() - 1.0) <
        1e-10);
}

TEST_CASE("small-data run scatters: pullback is Cauchy with decaying residual") {
  Grid g(16.0, 64);
  Params prm;
  prm.a = 0.5;
  auto v0 = v_from_u(small_u(g, 0.02), 1.0, prm);
  auto times = geometric_times(1.0, 512.0, 4);
  auto run = run_nonlinear(v0, 1.0, times, prm);
  auto sc = nonlinear_scattering_state(run);
  CHECK(sc.cauchy_ok);
  CHECK(sc.residuals.back() < sc.residuals.front());
  CHECK(sc.f_plus.l2() > 0.0);
  // residual decays with a positive fitted exponent
  std::vector<double> ts(run.times.begin(), run.times.end());
  auto fit_ok = [&]() {
    std::vector<double> vals = sc.residuals;
    // guard against exact zeros in the window
    for (double& v : vals) v = std::max(v, 1e-300);
    return vals;
  }();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    if (ts[i] < 4.0) continue;
    sx += std::log(ts[i]);
    sy += std::log(fit_ok[i]);
    sxx += std::log(ts[i]) * std::log(ts[i]);
    sxy += std::log(ts[i]) * std::log(fit_ok[i]);
    ++n;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(-slope > 0.10);
}

TEST_CASE("zero-mode growth tracks the charge prediction") {
  Grid g(32.0, 128);
  Params prm;
  prm.a = 0.5;
  // real positive bump -> positive charge and Re mean
  auto u0 = SpectralField::from_physical(
      g, [](double x) { return cplx(0.008 * std::exp(-x * x / 4.0), 0.0); });
  auto v0 = v_from_u(u0, 1.0, prm);
  auto times = geometric_times(1.0, 256.0, 6);
  auto run = run_nonlinear(v0, 1.0, times, prm);
  auto zg = zero_mode_growth(run);
  CHECK(zg.sufficient_condition);
  CHECK(zg.Q_start > 0.0);
  CHECK(zg.slope_im_mean_w > 0.0);
  // the mean really grows: Im(int w) moved measurably
  CHECK(std::abs(run.diag.back().mean_w.imag() -
                 run.diag.front().mean_w.imag()) > 1e-3);
}

#include <cmath>
#include <complex>

#include "doctest.h"
#include "nlslab/linprop.hpp"
#include "nlslab/norms.hpp"

using namespace nlslab;

namespace {
const cplx I(0.0, 1.0);

SpectralField band_data(const Grid& g, double amp, double lo, double hi) {
  return SpectralField::from_hat(g, [&](double xi) {
    const double m = std::abs(xi);
    return (m >= lo && m <= hi) ? cplx(amp, 0.3 * amp) : cplx(0.0);
  });
}
}  // namespace

TEST_CASE("propagate with a = 0 is the free flow") {
  Grid g(16.0, 64);
  Params prm;
  prm.a = 0.0;
  auto f = band_data(g, 0.5, 0.3, 1.5);
  auto out = propagate(f, 1.0, 7.0, prm);
  for (std::size_t j = 0; j < g.n; ++j) {
    const double xi = g.xi(j);
    const cplx expect = f.hat(j) * std::exp(-I * xi * xi * 6.0);
    CHECK(std::abs(out.hat(j) - expect) < 1e-12);
  }
}

TEST_CASE("propagate backward undoes forward") {
  Grid g(16.0, 64);
  Params prm;
  prm.a = 0.7;
  auto f = band_data(g, 0.4, 0.4, 1.2);
  auto mid = propagate(f, 1.0, 40.0, prm);
  auto back = propagate(mid, 40.0, 1.0, prm);
  double err = 0.0;
  for (std::size_t j = 0; j < g.n; ++j)
    err = std::max(err, std::abs(back.hat(j) - f.hat(j)));
  CHECK(err < 1e-8);
}

TEST_CASE("run_linear keeps every pair under the growth ceiling") {
  Grid g(16.0, 64);
  Params prm;
  prm.a = 1.0;
  auto f = band_data(g, 1.0, 0.2, 1.5);
  std::vector<double> times;
  for (int i = 1; i <= 30; ++i) times.push_back(std::pow(10.0, 3.0 * i / 30.0));
  GrowthCheck chk;
  run_linear(f, 1.0, times, prm, 1e-10, &chk);
  CHECK(chk.ok);
}

TEST_CASE("duhamel increment matches the evolved pair") {
  Params prm;
  prm.a = 0.8;
  ModePair p{1.0, 2.0, cplx(0.4, -0.1), cplx(0.2, 0.3)};
  const double t2 = 9.0;
  auto q = evolve_pair(p, t2, prm, 1e-12);
  const cplx D = duhamel_A(p, t2, prm, 1e-12);
  const cplx expect =
      p.u_plus * std::exp(-I * p.xi * p.xi * (t2 - p.t)) + D;
  CHECK(std::abs(q.u_plus - expect) < 1e-8);
}

TEST_CASE("duhamel increments over [t, 2t] decay like 1/(xi^2 t)") {
  Params prm;
  prm.a = 0.6;
  ModePair p{1.0, 1.0, cplx(0.5, 0.0), cplx(0.3, -0.2)};
  const double base = std::abs(p.u_plus) + std::abs(p.u_minus);
  double prev = 1e300;
  for (double t1 : {5.0, 20.0, 80.0}) {
    auto at1 = evolve_pair(p, t1, prm, 1e-11);
    const double mag = std::abs(duhamel_A(at1, 2.0 * t1, prm, 1e-11));
    CHECK(mag < 4.0 * prm.a * prm.a * base / (p.xi * p.xi * t1));
    CHECK(mag < prev);
    prev = mag;
  }
}

TEST_CASE("rate_fit recovers pure power laws") {
  std::vector<double> ts, vs;
  for (int i = 0; i <= 40; ++i) {
    const double t = std::pow(10.0, 1.0 + 3.0 * i / 40.0);
    ts.push_back(t);
    vs.push_back(2.5 * std::pow(t, -0.5));
  }
  auto fit = rate_fit(ts, vs, 10.0, 1e4);
  CHECK(fit.exponent == doctest::Approx(0.5).epsilon(1e-10));
  CHECK(std::exp(fit.intercept) == doctest::Approx(2.5).epsilon(1e-9));
  CHECK(fit.r2 == doctest::Approx(1.0));
}

TEST_CASE("rate_fit with a log correction lands between the bounds") {
  std::vector<double> ts, vs;
  for (int i = 0; i <= 200; ++i) {
    const double t = 10.0 + (1e4 - 10.0) * i / 200.0;
    ts.push_back(t);
    vs.push_back(std::pow(t, -0.25) * (1.0 + std::log(t)));
  }
  auto fit = rate_fit(ts, vs, 10.0, 1e4);
  CHECK(fit.exponent >= 0.10);
  CHECK(fit.exponent <= 0.25);
}

TEST_CASE("rate_fit input guards") {
  std::vector<double> ts{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  std::vector<double> vs(10, 1.0);
  CHECK_THROWS_AS(rate_fit(ts, vs, 1.0, 10.0), ConfigError);  // < 2 decades
  std::vector<double> short_ts{1, 10, 100, 1000};
  std::vector<double> short_vs{1, 1, 1, 1};
  CHECK_THROWS_AS(rate_fit(short_ts, short_vs, 1.0, 1e3), ConfigError);
  std::vector<double> neg_vs(10, -1.0);
  std::vector<double> wide_ts;
  for (int i = 0; i < 10; ++i) wide_ts.push_back(std::pow(10.0, 0.3 * i));
  CHECK_THROWS_AS(rate_fit(wide_ts, neg_vs, 0.1, 1e4), ConfigError);
}

TEST_CASE("scattering state: residuals shrink toward the extracted state") {
  Grid g(16.0, 64);
  Params prm;
  prm.a = 0.5;
  auto f = band_data(g, 0.3, 0.5, 1.2);
  std::vector<double> times;
  for (int i = 1; i <= 24; ++i) times.push_back(std::pow(10.0, 3.0 * i / 24.0));
  auto run = run_linear(f, 1.0, times, prm, 1e-11);
  auto st = scattering_state(run);
  auto res = residual_series(run, st.u_plus);
  CHECK(res.back() < res.front());
  CHECK(res.back() < 2e-3 * f.l2());
  // decay rate of the residual should be near 1/t for band data
  auto fit = rate_fit(times, res, 10.0, 1e3);
  CHECK(fit.exponent > 0.8);
}

TEST_CASE("scattering state flags zero-mode log growth") {
  Grid g(16.0, 64);
  Params prm;
  prm.a = 1.0;
  auto f = SpectralField::from_hat(
      g, [](double xi) { return xi == 0.0 ? cplx(1.0) : cplx(0.0); });
  std::vector<double> times;
  for (int i = 1; i <= 24; ++i) times.push_back(std::pow(10.0, 3.0 * i / 24.0));
  auto run = run_linear(f, 1.0, times, prm);
  auto st = scattering_state(run);
  CHECK(st.zero_mode_log_growth);
  CHECK(std::abs(st.zero_mode_at_T) > 1.0);
  CHECK(st.u_plus.l2() == 0.0);  // mean is kept out of the scattering state
}

TEST_CASE("check_u_plus_lowfreq weights by |xi|^{2(gamma+delta)}") {
  Grid g(16.0, 64);
  Params prm;
  prm.gamma = 0.1;
  prm.delta = 0.05;
  auto up = SpectralField::from_hat(g, [](double xi) {
    return (xi != 0.0 && xi * xi <= 1.0) ? cplx(1.0) : cplx(0.0);
  });
  auto u0 = band_data(g, 1.0, 0.3, 1.0);
  auto chk = check_u_plus_lowfreq(up, u0, prm);
  CHECK(chk.max_ratio > 0.0);
  // the weight suppresses the smallest |xi| most; compare the smallest
  // positive frequency against the edge of the band
  double r_small = -1.0, r_edge = -1.0;
  double xi_small = 1e300, xi_edge = 0.0;
  for (auto& [xi, r] : chk.profile) {
    if (xi <= 0.0) continue;
    if (xi < xi_small) { xi_small = xi; r_small = r; }
    if (xi > xi_edge) { xi_edge = xi; r_edge = r; }
  }
  CHECK(r_small < r_edge);
}

TEST_CASE("strichartz diagnostic: free solutions have zero residual") {
  Grid g(16.0, 64);
  Params prm;
  prm.a = 0.0;
  auto f = band_data(g, 0.4, 0.4, 1.2);
  std::vector<double> times;
  for (int i = 1; i <= 16; ++i) times.push_back(std::pow(10.0, 2.0 * i / 16.0));
  auto run = run_linear(f, 1.0, times, prm);
  auto st = scattering_state(run);
  auto diag = strichartz_diagnostic(run, st.u_plus);
  CHECK(diag.residual_l4linf < 1e-10 * diag.solution_l4linf);
  CHECK(diag.solution_l4linf > 0.0);
  CHECK(diag.ratio_vs_initial_norm > 0.0);
}

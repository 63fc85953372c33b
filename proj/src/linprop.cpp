#include "nlslab/linprop.hpp"

#include <algorithm>
#include <cmath>

#include "nlslab/norms.hpp"

namespace nlslab {

namespace {
const cplx I(0.0, 1.0);
}

LinearRun run_linear(const SpectralField& f, double t_start,
                     const std::vector<double>& times, const Params& prm,
                     double rtol, GrowthCheck* check) {
  prm.validate();
  if (!(t_start > 0.0)) throw ConfigError("run_linear: t_start must be > 0");
  for (std::size_t i = 0; i < times.size(); ++i)
    if (!(times[i] > (i == 0 ? t_start : times[i - 1])))
      throw ConfigError("run_linear: times must increase beyond t_start");

  SpectralField fs = f.to_spectral();
  const Grid& g = fs.grid();
  LinearRun run;
  run.params = prm;
  run.t_start = t_start;
  run.times = times;
  run.snaps.assign(times.size(), SpectralField(g, Rep::spectral));

  // coupled pairs
  for (std::size_t k = 1; k < g.n / 2; ++k) {
    const std::size_t jp = g.slot(static_cast<long>(k));
    const std::size_t jm = g.slot(-static_cast<long>(k));
    if (fs[jp] == cplx(0.0) && fs[jm] == cplx(0.0)) continue;
    ModePair p{g.xi(jp), t_start, fs.hat(jp), fs.hat(jm)};
    auto path = evolve_pair_path(p, times, prm, rtol, check);
    for (std::size_t i = 0; i < times.size(); ++i) {
      run.snaps[i].set_hat(jp, path[i].u_plus);
      run.snaps[i].set_hat(jm, path[i].u_minus);
    }
  }
  // zero mode: closed-form law
  if (fs[g.slot(0)] != cplx(0.0)) {
    for (std::size_t i = 0; i < times.size(); ++i)
      run.snaps[i].set_hat(
          g.slot(0), zero_mode_u(fs.hat(g.slot(0)), t_start, times[i], prm));
  }
  // unpaired Nyquist slot: free rotation
  if (fs[g.n / 2] != cplx(0.0)) {
    const double xin = g.xi(g.n / 2);
    for (std::size_t i = 0; i < times.size(); ++i)
      run.snaps[i].set_hat(
          g.n / 2,
          fs.hat(g.n / 2) * std::exp(-I * xin * xin * (times[i] - t_start)));
  }
  return run;
}

SpectralField propagate(const SpectralField& f, double t_from, double t_to,
                        const Params& prm, double rtol) {
  if (t_to == t_from) return f.to_spectral();
  if (t_to > t_from) return run_linear(f, t_from, {t_to}, prm, rtol).snaps[0];
  // backward: evolve each pair directly
  SpectralField fs = f.to_spectral();
  const Grid& g = fs.grid();
  SpectralField out(g, Rep::spectral);
  for (std::size_t k = 1; k < g.n / 2; ++k) {
    const std::size_t jp = g.slot(static_cast<long>(k));
    const std::size_t jm = g.slot(-static_cast<long>(k));
    if (fs[jp] == cplx(0.0) && fs[jm] == cplx(0.0)) continue;
    ModePair p{g.xi(jp), t_from, fs.hat(jp), fs.hat(jm)};
    auto q = evolve_pair(p, t_to, prm, rtol);
    out.set_hat(jp, q.u_plus);
    out.set_hat(jm, q.u_minus);
  }
  if (fs[g.slot(0)] != cplx(0.0))
    out.set_hat(g.slot(0), zero_mode_u(fs.hat(g.slot(0)), t_from, t_to, prm));
  if (fs[g.n / 2] != cplx(0.0)) {
    const double xin = g.xi(g.n / 2);
    out.set_hat(g.n / 2, fs.hat(g.n / 2) *
                             std::exp(-I * xin * xin * (t_to - t_from)));
  }
  return out;
}

cplx duhamel_A(const ModePair& at_t1, double t2, const Params& prm,
               double rtol) {
  prm.validate();
  if (!(at_t1.xi > 0.0)) throw ConfigError("duhamel_A: xi must be > 0");
  if (!(t2 > at_t1.t)) throw ConfigError("duhamel_A: t2 must exceed t1");
  const double s = sgn(prm.sign);
  const double a2 = prm.a * prm.a;
  const double xi2 = at_t1.xi * at_t1.xi;

  // 5-point Gauss-Legendre nodes/weights on [-1, 1]
  static const double gx[] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                              0.5384693101056831, 0.9061798459386640};
  static const double gw[] = {0.2369268850561891, 0.4786286704993665,
                              0.5688888888888889, 0.4786286704993665,
                              0.2369268850561891};

  const double panel_cap = M_PI / (4.0 * xi2);
  const double span = t2 - at_t1.t;
  const long n_panels =
      std::max(4L, static_cast<long>(std::ceil(span / panel_cap)));
  const double h = span / static_cast<double>(n_panels);

  cplx acc(0.0);
  ModePair cur = at_t1;
  for (long pnl = 0; pnl < n_panels; ++pnl) {
    const double lo = at_t1.t + h * static_cast<double>(pnl);
    for (int q = 0; q < 5; ++q) {
      const double tau = lo + 0.5 * h * (1.0 + gx[q]);
      cur = evolve_pair(cur, tau, prm, rtol);
      const cplx kern =
          std::exp(-I * (t2 - tau) * xi2) * std::conj(cur.u_minus) *
          std::exp(cplx(0.0, -2.0 * s * a2 * std::log(tau))) / tau;
      acc += 0.5 * h * gw[q] * kern;
    }
  }
  return I * s * a2 * acc;
}

RateFit rate_fit(const std::vector<double>& times,
                 const std::vector<double>& values, double t_lo, double t_hi) {
  if (times.size() != values.size())
    throw ConfigError("rate_fit: size mismatch");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (times[i] < t_lo || times[i] > t_hi) continue;
    if (!(values[i] > 0.0))
      throw ConfigError("rate_fit: values must be positive in the window");
    lx.push_back(std::log(times[i]));
    ly.push_back(std::log(values[i]));
  }
  if (lx.size() < 8)
    throw ConfigError("rate_fit: need at least 8 samples in the window");
  if (lx.back() - lx.front() < 2.0 * std::log(10.0) - 1e-9)
    throw ConfigError("rate_fit: window must span two decades");
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
    syy += ly[i] * ly[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icept = (sy - slope * sx) / n;
  const double ssr = syy - sy * sy / n;
  double r2 = 1.0;
  if (ssr > 0.0) {
    double resid = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
      const double e = ly[i] - (icept + slope * lx[i]);
      resid += e * e;
    }
    r2 = 1.0 - resid / ssr;
  }
  RateFit fit;
  fit.exponent = -slope;
  fit.intercept = icept;
  fit.r2 = r2;
  fit.n_used = static_cast<int>(lx.size());
  return fit;
}

ScatteringState scattering_state(const LinearRun& run) {
  if (run.snaps.empty()) throw ConfigError("scattering_state: empty run");
  const SpectralField& last = run.snaps.back();
  const SpectralField& first = run.snaps.front();
  const double T = run.times.back();
  const Grid& g = last.grid();

  ScatteringState st;
  st.u_plus = SpectralField(g, Rep::spectral);
  double worst_C = 0.0;
  for (std::size_t k = 1; k < g.n / 2; ++k) {
    const std::size_t jp = g.slot(static_cast<long>(k));
    const std::size_t jm = g.slot(-static_cast<long>(k));
    const cplx up = last.hat(jp), um = last.hat(jm);
    if (up == cplx(0.0) && um == cplx(0.0)) continue;
    ModePair p{g.xi(jp), T, up, um};
    auto am = asymptotic_mode(p, run.params);
    st.u_plus.set_hat(jp, am.u_plus_hat);
    st.u_plus.set_hat(jm, am.u_plus_hat_minus);
    st.tail_bound = std::max(st.tail_bound, am.tail_bound);
    // consistency: the raw free pullback must sit inside the 1/(xi^2 T)
    // envelope of the extracted state
    const double xi2 = p.xi * p.xi;
    const cplx direct = up * std::exp(I * xi2 * T);
    const double base =
        std::abs(first.hat(jp)) + std::abs(first.hat(jm));
    if (base <= 0.0) continue;
    const double dev = std::abs(direct - am.u_plus_hat);
    const double C = dev * xi2 * T / base;
    worst_C = std::max(worst_C, C);
    if (C > 50.0)
      throw NumericalFailure(
          "scattering_state: free pullback disagrees with the extracted "
          "state beyond the 1/(xi^2 T) envelope");
  }
  st.fitted_C = worst_C;
  st.zero_mode_at_T = last.hat(g.slot(0));
  st.zero_mode_log_growth =
      std::abs(st.zero_mode_at_T) >
      std::abs(run.snaps.front().hat(g.slot(0))) * (1.0 + 1e-9);
  return st;
}

SpectralField free_state(const SpectralField& u_plus, double t) {
  SpectralField s = u_plus.to_spectral();
  const Grid& g = s.grid();
  for (std::size_t j = 0; j < g.n; ++j) {
    const double xi = g.xi(j);
    s[j] *= std::exp(-I * xi * xi * t);
  }
  return s;
}

std::vector<double> residual_series(const LinearRun& run,
                                    const SpectralField& u_plus) {
  const SpectralField up = u_plus.to_spectral();
  const Grid& g = up.grid();
  std::vector<double> out;
  out.reserve(run.times.size());
  for (std::size_t i = 0; i < run.times.size(); ++i) {
    const double t = run.times[i];
    double acc = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) {
      if (j == g.slot(0) || j == g.n / 2) continue;
      const double xi = g.xi(j);
      const cplx freev = up[j] * std::exp(-I * xi * xi * t);
      acc += std::norm(run.snaps[i][j] - freev);
    }
    out.push_back(std::sqrt(g.dx() * acc));
  }
  return out;
}

LowfreqCheck check_u_plus_lowfreq(const SpectralField& u_plus,
                                  const SpectralField& u_at_t0,
                                  const Params& prm) {
  prm.validate();
  const double base = norm_X(u_at_t0, prm.t0, prm.gamma);
  if (!(base > 0.0)) throw ConfigError("check_u_plus_lowfreq: empty data");
  SpectralField up = u_plus.to_spectral();
  const Grid& g = up.grid();
  LowfreqCheck chk;
  for (std::size_t j = 0; j < g.n; ++j) {
    const double xi = g.xi(j);
    if (xi == 0.0 || xi * xi > 1.0) continue;
    const double r =
        std::pow(std::abs(xi), 2.0 * (prm.gamma + prm.delta)) *
        std::abs(up.hat(j)) / base;
    chk.profile.emplace_back(xi, r);
    chk.max_ratio = std::max(chk.max_ratio, r);
  }
  std::sort(chk.profile.begin(), chk.profile.end());
  return chk;
}

StrichartzDiagnostic strichartz_diagnostic(const LinearRun& run,
                                           const SpectralField& u_plus) {
  if (run.times.size() < 2)
    throw ConfigError("strichartz_diagnostic: need >= 2 snapshots");
  std::vector<SpectralField> sol, res;
  for (std::size_t i = 0; i < run.times.size(); ++i) {
    sol.push_back(run.snaps[i].to_physical());
    SpectralField d = run.snaps[i];
    const SpectralField fv = free_state(u_plus, run.times[i]);
    for (std::size_t j = 0; j < d.size(); ++j) d[j] -= fv[j];
    res.push_back(d.to_physical());
  }
  StrichartzDiagnostic out;
  out.solution_l4linf = norm_L4Linf(run.times, sol);
  out.residual_l4linf = norm_L4Linf(run.times, res);
  out.ratio_vs_initial_norm =
      out.solution_l4linf /
      norm_X(run.snaps.front(), run.params.t0, run.params.gamma);
  return out;
}

}  // namespace nlslab

#include "nlslab/nlsolve.hpp"

#include <algorithm>
#include <cmath>

#include "nlslab/linprop.hpp"
#include "nlslab/norms.hpp"

namespace nlslab {

namespace {
const cplx I(0.0, 1.0);

cplx gauge(double t, const Params& prm) {
  return std::exp(cplx(0.0, sgn(prm.sign) * prm.a * prm.a * std::log(t)));
}

SpectralField dealias_23(const SpectralField& f) {
  SpectralField s = f.to_spectral();
  const Grid& g = s.grid();
  const long cut = static_cast<long>(g.n) / 3;
  for (std::size_t j = 0; j < g.n; ++j)
    if (std::abs(g.k_of(j)) > cut) s[j] = cplx(0.0);
  return f.rep() == Rep::physical ? s.to_physical() : s;
}

SpectralField half_free(const SpectralField& v_spec, double dt) {
  SpectralField s = v_spec;
  const Grid& g = s.grid();
  for (std::size_t j = 0; j < g.n; ++j) {
    const double xi = g.xi(j);
    s[j] *= std::exp(-I * xi * xi * (0.5 * dt));
  }
  return s;
}
}  // namespace

SpectralField u_from_v(const SpectralField& v, double t, const Params& prm) {
  SpectralField u = v.to_physical();
  const cplx gi = std::conj(gauge(t, prm));
  for (std::size_t j = 0; j < u.size(); ++j) u[j] = (u[j] - prm.a) * gi;
  return u;
}

SpectralField v_from_u(const SpectralField& u, double t, const Params& prm) {
  SpectralField v = u.to_physical();
  const cplx gt = gauge(t, prm);
  for (std::size_t j = 0; j < v.size(); ++j) v[j] = prm.a + v[j] * gt;
  return v;
}

SpectralField F_of_u(const SpectralField& u, double t, const Params& prm,
                     bool dealias) {
  const double s = sgn(prm.sign);
  const cplx gt = gauge(t, prm);
  SpectralField up = u.to_physical();
  SpectralField out(up.grid(), Rep::physical);
  for (std::size_t j = 0; j < up.size(); ++j) {
    const cplx w = up[j] * gt;
    const double w2 = std::norm(w);
    out[j] = s * (w2 * w + prm.a * (w * w + 2.0 * w2)) * std::conj(gt);
  }
  return dealias ? dealias_23(out) : out;
}

SpectralField step_strang(const SpectralField& v, double t, double dt,
                          const Params& prm, bool dealias) {
  const double s = sgn(prm.sign);
  SpectralField cur = half_free(v.to_spectral(), dt).to_physical();
  const double lg = std::log((t + dt) / t);
  for (std::size_t j = 0; j < cur.size(); ++j) {
    const double pot = std::norm(cur[j]) - prm.a * prm.a;
    cur[j] *= std::exp(I * (s * pot * lg));
  }
  if (dealias) {
    // remove the aliased tail the cubic phase just generated, but keep the
    // background exactly: the zero mode is never touched by the 2/3 cut
    cur = dealias_23(cur);
  }
  return half_free(cur.to_spectral(), dt).to_physical();
}

double conservation_Q(const SpectralField& v, double a) {
  SpectralField p = v.to_physical();
  double acc = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) acc += std::norm(p[j]) - a * a;
  return acc * p.grid().dx();
}

double quartic_P(const SpectralField& v, double a) {
  SpectralField p = v.to_physical();
  double acc = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double d = std::norm(p[j]) - a * a;
    acc += d * d;
  }
  return acc * p.grid().dx();
}

double energy_E(const SpectralField& v, double t, const Params& prm) {
  SpectralField s = v.to_spectral();
  const Grid& g = s.grid();
  double kin = 0.0;
  for (std::size_t j = 0; j < g.n; ++j) {
    const double xi = g.xi(j);
    kin += xi * xi * std::norm(s[j]);
  }
  kin *= 0.5 * g.dx();
  return kin - sgn(prm.sign) / (4.0 * t) * quartic_P(v, prm.a);
}

NonlinearRun run_nonlinear(const SpectralField& v0, double t_start,
                           const std::vector<double>& snap_times,
                           const Params& prm, const NonlinearOpts& opts) {
  prm.validate();
  if (!(t_start > 0.0)) throw ConfigError("run_nonlinear: t_start must be > 0");
  for (std::size_t i = 0; i < snap_times.size(); ++i)
    if (!(snap_times[i] > (i == 0 ? t_start : snap_times[i - 1])))
      throw ConfigError("run_nonlinear: snapshot times must increase");

  SpectralField v = v0.to_physical();
  const Grid& g = v.grid();

  // guards
  SpectralField u0 = u_from_v(v, t_start, prm);
  if (u0.high_band_fraction(0.9) > opts.nyquist_mass)
    throw GuardRefusal("run_nonlinear: data carry mass near the Nyquist band");
  if (prm.a > 0.0) {
    const double nx = norm_X(u0, prm.t0, prm.gamma);
    if (nx > opts.guard_frac * prm.a)
      throw GuardRefusal("run_nonlinear: initial data fail the smallness guard");
  }

  // step policy
  double dt_cap = opts.fixed_dt;
  if (dt_cap <= 0.0) {
    double xi_act = opts.xi_active;
    if (xi_act <= 0.0) {
      SpectralField s0 = u0.to_spectral();
      double peak = 0.0;
      for (std::size_t j = 0; j < g.n; ++j)
        peak = std::max(peak, std::abs(s0[j]));
      double xmax = 0.0;
      for (std::size_t j = 0; j < g.n; ++j)
        if (std::abs(s0[j]) > 1e-12 * peak)
          xmax = std::max(xmax, std::abs(g.xi(j)));
      // cubic interactions triple the band; never beyond the 2/3 cut
      xi_act = std::min(3.0 * xmax, 2.0 / 3.0 * g.xi_nyquist());
    }
    dt_cap = std::min(opts.dt_max, opts.eta / std::max(xi_act * xi_act, 1.0));
  }

  const double blow_cap = opts.blow_factor * (prm.a + v.linf() + 1e-300);

  NonlinearRun run;
  run.params = prm;
  run.opts = opts;
  run.t_start = t_start;
  run.times.push_back(t_start);
  run.v_snaps.push_back(v);

  auto record = [&](double t, const SpectralField& vf) {
    DiagRow row;
    row.t = t;
    row.Q = conservation_Q(vf, prm.a);
    row.E = energy_E(vf, t, prm);
    row.P = quartic_P(vf, prm.a);
    SpectralField u = u_from_v(vf, t, prm);
    row.l2_u = u.l2();
    row.linf_u = u.linf();
    double xacc = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j)
      xacc += std::norm(u[j]) * g.x(j) * g.x(j);
    row.xu_l2 = std::sqrt(g.dx() * xacc);
    cplx wsum(0.0);
    for (std::size_t j = 0; j < vf.size(); ++j) wsum += vf[j] - prm.a;
    row.mean_w = wsum * g.dx();
    row.mean_u = row.mean_w * std::conj(gauge(t, prm));
    run.diag.push_back(row);
  };
  record(t_start, v);

  double t = t_start;
  for (double target : snap_times) {
    const double span = target - t;
    const long nsteps = std::max(1L, static_cast<long>(std::ceil(span / dt_cap)));
    const double dt = span / static_cast<double>(nsteps);
    for (long i = 0; i < nsteps; ++i) {
      v = step_strang(v, t, dt, prm, opts.dealias);
      t += dt;
      if (!(v.linf() < blow_cap))
        throw NumericalFailure("run_nonlinear: amplitude blow-up at t = " +
                               std::to_string(t));
    }
    t = target;
    run.times.push_back(t);
    run.v_snaps.push_back(v);
    record(t, v);
  }
  return run;
}

std::vector<double> gp2_residual(const NonlinearRun& run) {
  if (run.times.size() < 3)
    throw ConfigError("gp2_residual: need >= 3 snapshots");
  std::vector<double> out;
  for (std::size_t i = 1; i + 1 < run.times.size(); ++i) {
    const double dEdt = (run.diag[i + 1].E - run.diag[i - 1].E) /
                        (run.times[i + 1] - run.times[i - 1]);
    const double law = sgn(run.params.sign) * run.diag[i].P /
                       (4.0 * run.times[i] * run.times[i]);
    out.push_back(std::abs(dEdt - law));
  }
  return out;
}

NonlinearScattering nonlinear_scattering_state(const NonlinearRun& run,
                                               int average_last) {
  if (run.times.size() < 4)
    throw ConfigError("nonlinear_scattering_state: need >= 4 snapshots");
  const Grid& g = run.v_snaps.front().grid();
  const double t0 = run.t_start;

  std::vector<SpectralField> pulls;
  for (std::size_t i = 0; i < run.times.size(); ++i) {
    SpectralField u = u_from_v(run.v_snaps[i], run.times[i], run.params)
                          .to_spectral();
    for (std::size_t j = 0; j < g.n; ++j) {
      const double xi = g.xi(j);
      u[j] *= std::exp(I * xi * xi * (run.times[i] - t0));
    }
    pulls.push_back(u);
  }

  NonlinearScattering out;
  auto dist = [&](const SpectralField& x, const SpectralField& y) {
    double acc = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) {
      if (j == g.slot(0) || j == g.n / 2) continue;
      acc += std::norm(x[j] - y[j]);
    }
    return std::sqrt(g.dx() * acc);
  };
  for (std::size_t i = 1; i < pulls.size(); ++i)
    out.pullback_increments.push_back(dist(pulls[i], pulls[i - 1]));

  const std::size_t m = out.pullback_increments.size();
  const std::size_t q = std::max<std::size_t>(1, m / 4);
  double head = 0.0, tail = 0.0;
  for (std::size_t i = 0; i < q; ++i) head += out.pullback_increments[i];
  for (std::size_t i = m - q; i < m; ++i) tail += out.pullback_increments[i];
  out.cauchy_ok = tail < head;
  if (tail > 2.0 * head + 1e-300)
    throw NumericalFailure(
        "nonlinear_scattering_state: pullback increments are growing; no "
        "scattering limit at these times");

  const int navg = std::min<int>(average_last, static_cast<int>(pulls.size()));
  SpectralField fp(g, Rep::spectral);
  for (int i = 0; i < navg; ++i) {
    const SpectralField& p = pulls[pulls.size() - 1 - static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < g.n; ++j) fp[j] += p[j];
  }
  for (std::size_t j = 0; j < g.n; ++j) fp[j] /= static_cast<double>(navg);
  fp[g.slot(0)] = cplx(0.0);  // the mean does not scatter
  fp[g.n / 2] = cplx(0.0);
  out.f_plus = fp;

  for (std::size_t i = 0; i < pulls.size(); ++i)
    out.residuals.push_back(dist(pulls[i], fp));
  out.mean_w_final = run.diag.back().mean_w;
  return out;
}

ZeroModeGrowth zero_mode_growth(const NonlinearRun& run) {
  if (run.times.size() < 4)
    throw ConfigError("zero_mode_growth: need >= 4 snapshots");
  ZeroModeGrowth z;
  const double s = sgn(run.params.sign);
  z.Q_start = run.diag.front().Q;
  z.sufficient_condition = z.Q_start > 0.0;
  z.predicted_linear =
      2.0 * s * run.params.a * run.params.a * run.diag.front().mean_w.real();
  z.predicted_leading = s * run.params.a * z.Q_start;

  // least squares of Im(mean_w) against ln t
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(run.times.size());
  for (std::size_t i = 0; i < run.times.size(); ++i) {
    const double x = std::log(run.times[i]);
    const double y = run.diag[i].mean_w.imag();
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  z.slope_im_mean_w = (n * sxy - sx * sy) / (n * sxx - sx * sx);

  // ||x u|| growth, if the series is fittable
  bool pos = true;
  for (const auto& r : run.diag) pos = pos && r.xu_l2 > 0.0;
  if (pos && run.times.back() / run.times.front() > 3.0) {
    double tx = 0, ty = 0, txx = 0, txy = 0;
    for (std::size_t i = 0; i < run.times.size(); ++i) {
      const double x = std::log(run.times[i]);
      const double y = std::log(run.diag[i].xu_l2);
      tx += x;
      ty += y;
      txx += x * x;
      txy += x * y;
    }
    z.xu_growth_exponent = (n * txy - tx * ty) / (n * txx - tx * tx);
  }
  return z;
}

}  // namespace nlslab

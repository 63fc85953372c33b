#include "nlslab/waveops.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "nlslab/modes.hpp"
#include "nlslab/nlsolve.hpp"
#include "nlslab/norms.hpp"

namespace nlslab {

namespace {

const cplx I(0.0, 1.0);

struct RingVec {
  cplx Y, Z;
};

// Solve ring(theta) = ring_at_Theta - int_theta^Theta M ring on a uniform
// grid by Picard iteration; returns ring at the lower end and diagnostics.
RingVec picard_ring(double theta_lo, double Theta, const RingVec& at_Theta,
                    const Params& prm, double tol, int max_iter,
                    double theta_step, double* ratio_out, int* iters_out) {
  const double s = sgn(prm.sign);
  const double a2 = prm.a * prm.a;
  const std::size_t N = std::max<std::size_t>(
      8, static_cast<std::size_t>(std::ceil((Theta - theta_lo) / theta_step)));
  const double h = (Theta - theta_lo) / static_cast<double>(N);

  std::vector<double> coef(N + 1);
  std::vector<cplx> osc(N + 1);  // e^{2 i Phi}
  for (std::size_t i = 0; i <= N; ++i) {
    const double th = theta_lo + h * static_cast<double>(i);
    const double al = alpha_factor(th, prm.a, prm.sign);
    coef[i] = s * a2 / (2.0 * th * th * al * al);
    osc[i] = std::exp(cplx(0.0, 2.0 * phase_Phi(th, prm.a, 1e-12, prm.sign)));
  }

  std::vector<RingVec> cur(N + 1, at_Theta), nxt(N + 1);
  const double scale = std::abs(at_Theta.Y) + std::abs(at_Theta.Z) + 1e-300;
  double prev_diff = 0.0, ratio = 0.0;
  int bad = 0, m = 0;
  for (m = 1; m <= max_iter; ++m) {
    // reverse cumulative trapezoid of M * cur
    cplx accY(0.0), accZ(0.0);
    cplx gY_hi = coef[N] * (-cur[N].Y + std::conj(osc[N]) * cur[N].Z);
    cplx gZ_hi = coef[N] * (osc[N] * cur[N].Y - cur[N].Z);
    nxt[N] = at_Theta;
    double diff = 0.0;
    for (std::size_t i = N; i-- > 0;) {
      const cplx gY = coef[i] * (-cur[i].Y + std::conj(osc[i]) * cur[i].Z);
      const cplx gZ = coef[i] * (osc[i] * cur[i].Y - cur[i].Z);
      accY += 0.5 * h * (gY + gY_hi);
      accZ += 0.5 * h * (gZ + gZ_hi);
      gY_hi = gY;
      gZ_hi = gZ;
      nxt[i].Y = at_Theta.Y - accY;
      nxt[i].Z = at_Theta.Z - accZ;
      diff = std::max(diff, std::abs(nxt[i].Y - cur[i].Y) +
                                std::abs(nxt[i].Z - cur[i].Z));
    }
    cur.swap(nxt);
    if (m > 1 && prev_diff > 1e-14 * scale) {
      ratio = std::max(ratio, diff / prev_diff);
      if (diff >= prev_diff && ++bad >= 2)
        throw NumericalFailure(
            "linear_wave_operator: Picard iteration is not contracting");
    }
    prev_diff = diff;
    if (diff <= tol * scale) break;
  }
  if (prev_diff > tol * scale)
    throw NumericalFailure(
        "linear_wave_operator: Picard iteration did not converge");
  if (ratio_out) *ratio_out = std::max(*ratio_out, ratio);
  if (iters_out) *iters_out = std::max(*iters_out, m);
  return cur[0];
}

}  // namespace

LinearWaveResult linear_wave_operator(const SpectralField& u_plus,
                                      const Params& prm, double T_infinity,
                                      cplx zero_mode_at_T, double picard_tol,
                                      int max_iter, double theta_step) {
  prm.validate();
  if (!(T_infinity > 1.0))
    throw ConfigError("linear_wave_operator: T_infinity must exceed 1");
  SpectralField up = u_plus.to_spectral();
  const Grid& g = up.grid();
  LinearWaveResult res{SpectralField(g, Rep::spectral), 0.0, 0, 0.0};

  if (prm.a == 0.0) {
    for (std::size_t j = 0; j < g.n; ++j) {
      const double xi = g.xi(j);
      res.u_at_1.set_hat(j, up.hat(j) * std::exp(-I * xi * xi));
    }
    res.u_at_1.set_hat(g.slot(0), zero_mode_at_T);
    return res;
  }

  const double a2 = prm.a * prm.a;
  const double s = sgn(prm.sign);
  for (std::size_t k = 1; k < g.n / 2; ++k) {
    const std::size_t jp = g.slot(static_cast<long>(k));
    const std::size_t jm = g.slot(-static_cast<long>(k));
    if (up[jp] == cplx(0.0) && up[jm] == cplx(0.0)) continue;
    const double xi = g.xi(jp);
    const double xi2 = xi * xi;
    const double Theta = xi2 * T_infinity;
    // keep the Volterra range strictly inside the diagonalized regime (the
    // phase series needs theta > 4 a^2); the short stretch down to t = 1 is
    // bridged by direct backward integration afterwards
    const double theta_lo = std::max(xi2, 4.5 * a2);
    if (!(Theta > theta_lo * (1.0 + 1e-6)))
      throw GuardRefusal(
          "linear_wave_operator: T_infinity too small for a low mode");

    const cplx gauge = std::exp(cplx(0.0, s * a2 * std::log(xi2)));
    RingVec plus;  // limits of the diagonalized variables
    plus.Z = up.hat(jp) / (2.0 * gauge);
    plus.Y = std::conj(up.hat(jm) / (2.0 * gauge));
    res.tail_bound = std::max(
        res.tail_bound, a2 / Theta * (std::abs(plus.Y) + std::abs(plus.Z)));

    // the diagonal tail flow between Theta and infinity is the exact
    // sqrt(alpha) factor; invert it to get the value at Theta
    const double alT = alpha_factor(Theta, prm.a, prm.sign);
    RingVec at_Theta{plus.Y / std::sqrt(alT), plus.Z / std::sqrt(alT)};

    RingVec r0 = picard_ring(theta_lo, Theta, at_Theta, prm, picard_tol,
                             max_iter, theta_step, &res.worst_ratio,
                             &res.max_iterations);
    RingState ring{theta_lo, r0.Y, r0.Z};
    RescaledModes m = ring_to_rescaled(ring, prm.a, prm.sign);
    ModePair p = rescaled_to_pair(m, xi, prm);
    if (p.t > 1.0 + 1e-12) p = evolve_pair(p, 1.0, prm, 1e-11);
    res.u_at_1.set_hat(jp, p.u_plus);
    res.u_at_1.set_hat(jm, p.u_minus);
  }

  if (zero_mode_at_T != cplx(0.0))
    res.u_at_1.set_hat(g.slot(0),
                       zero_mode_u(zero_mode_at_T, T_infinity, 1.0, prm));
  if (up[g.n / 2] != cplx(0.0)) {
    const double xin = g.xi(g.n / 2);
    res.u_at_1.set_hat(g.n / 2, up.hat(g.n / 2) * std::exp(-I * xin * xin));
  }
  return res;
}

BackwardEstimateReport check_backward_estimates(const LinearRun& run,
                                                double delta1, double delta2) {
  if (run.times.size() < 2)
    throw ConfigError("check_backward_estimates: need at least two times");
  const Grid& g = run.snaps[0].grid();
  BackwardEstimateReport rep;
  double absmax = 0.0;
  for (const auto& sn : run.snaps)
    for (std::size_t j = 0; j < g.n; ++j)
      absmax = std::max(absmax, std::abs(sn.hat(j)));
  double hf_min = 0.0, hf_max = 0.0;
  for (std::size_t i1 = 0; i1 < run.times.size(); ++i1) {
    for (std::size_t i2 = i1 + 1; i2 < run.times.size(); ++i2) {
      const double t1 = run.times[i1], t2 = run.times[i2];
      double pair_C = 0.0, pair_hf = 0.0;
      for (std::size_t k = 1; k < g.n / 2; ++k) {
        const std::size_t jp = g.slot(static_cast<long>(k));
        const std::size_t jm = g.slot(-static_cast<long>(k));
        const double xi2 = g.xi(jp) * g.xi(jp);
        const double sum2 = std::abs(run.snaps[i2].hat(jp)) +
                            std::abs(run.snaps[i2].hat(jm));
        if (sum2 < 1e-15 * absmax) continue;
        const double env = (1.0 + std::pow(t1 * xi2, -delta1)) *
                           (1.0 + std::pow(t2 * xi2, -delta2)) * sum2;
        const double num = std::max(std::abs(run.snaps[i1].hat(jp)),
                                    std::abs(run.snaps[i1].hat(jm)));
        const double ratio = num / env;
        pair_C = std::max(pair_C, ratio);
        if (t1 * xi2 >= 1.0 && t2 * xi2 >= 1.0)
          pair_hf = std::max(pair_hf, ratio);
      }
      rep.per_pair_C.push_back(pair_C);
      rep.fitted_C = std::max(rep.fitted_C, pair_C);
      if (pair_hf > 0.0) {
        rep.highfreq_C = std::max(rep.highfreq_C, pair_hf);
        hf_min = (hf_min == 0.0) ? pair_hf : std::min(hf_min, pair_hf);
        hf_max = std::max(hf_max, pair_hf);
      }
    }
  }
  rep.highfreq_spread = (hf_min > 0.0) ? hf_max / hf_min : 0.0;
  return rep;
}

namespace {

double active_frequency(const SpectralField& f) {
  SpectralField fs = f.to_spectral();
  const Grid& g = fs.grid();
  double peak = 0.0;
  for (std::size_t j = 0; j < g.n; ++j)
    peak = std::max(peak, std::abs(fs.hat(j)));
  double xi_max = 0.0;
  for (std::size_t j = 0; j < g.n; ++j)
    if (j != g.n / 2 && std::abs(fs.hat(j)) > 1e-12 * peak)
      xi_max = std::max(xi_max, std::abs(g.xi(j)));
  return std::min(3.0 * xi_max, (2.0 / 3.0) * g.xi_nyquist());
}

// One backward split step for the Duhamel sweep: dI/dt = Lin(t) I + i F(U)/t
// and dU/dt = Lin(t) U, with Lin split into the exact free flow and the
// pointwise conjugate coupling (frozen at the midpoint).
void split_step_backward(SpectralField& Iacc, SpectralField& U, double t,
                         double dt, const Params& prm, bool force_linear) {
  const Grid& g = Iacc.grid();
  auto free_half = [&](SpectralField& f) {
    SpectralField fs = f.to_spectral();
    for (std::size_t j = 0; j < g.n; ++j) {
      const double xi = g.xi(j);
      fs[j] *= std::exp(-I * xi * xi * (0.5 * dt));
    }
    f = fs;
  };
  free_half(Iacc);
  free_half(U);

  const double tm = t + 0.5 * dt;
  const double s = sgn(prm.sign);
  const double a2 = prm.a * prm.a;
  const cplx kap = s * a2 / tm * std::exp(cplx(0.0, -2.0 * s * a2 * std::log(tm)));
  const double mk = std::abs(kap);
  auto couple = [&](SpectralField& f) {
    if (mk == 0.0) return;
    SpectralField fp = f.to_physical();
    const double ch = std::cosh(mk * dt), sh = std::sinh(mk * dt) / mk;
    for (std::size_t j = 0; j < g.n; ++j)
      fp[j] = ch * fp[j] + I * kap * sh * std::conj(fp[j]);
    f = fp;
  };
  couple(U);
  couple(Iacc);
  if (!force_linear) {
    SpectralField F = F_of_u(U, tm, prm, true);
    SpectralField Ip = Iacc.to_physical();
    SpectralField Fp = F.to_physical();
    for (std::size_t j = 0; j < g.n; ++j)
      Ip[j] += dt * I * Fp[j] / tm;
    Iacc = Ip;
  }
  free_half(Iacc);
  free_half(U);
}

}  // namespace

namespace {

NonlinearWaveResult nonlinearwave_zero(const Grid& g,
                                       const std::vector<double>& ladder) {
  NonlinearWaveResult res;
  res.u_at_1 = SpectralField(g, Rep::spectral);
  res.times = ladder;
  res.u_snaps.assign(ladder.size(), SpectralField(g, Rep::spectral));
  return res;
}

}  // namespace

NonlinearWaveResult nonlinear_wave_operator(const SpectralField& f_plus,
                                            const Params& prm,
                                            const NonlinearWaveOpts& opts) {
  prm.validate();
  if (!(opts.T_infinity > 1.0) || !(opts.ladder_ratio > 1.0))
    throw ConfigError("nonlinear_wave_operator: bad ladder settings");
  SpectralField fp = f_plus.to_spectral();
  const Grid& g = fp.grid();

  std::vector<double> ladder{1.0};
  while (ladder.back() * opts.ladder_ratio < opts.T_infinity * (1.0 - 1e-12))
    ladder.push_back(ladder.back() * opts.ladder_ratio);
  ladder.push_back(opts.T_infinity);
  const std::size_t m = ladder.size();

  if (fp.l2() == 0.0) return nonlinearwave_zero(g, ladder);
  const double nx = norm_X(fp, 1.0, prm.gamma);
  if (prm.a > 0.0 && nx > opts.guard_frac * prm.a)
    throw GuardRefusal("nonlinear_wave_operator: data too large for a");

  NonlinearWaveResult res;
  res.times = ladder;
  res.tail_bound =
      nx * std::pow(opts.T_infinity, -(0.25 - prm.gamma - prm.delta));

  // S(t, 1) f_plus at the rungs
  LinearRun lin = run_linear(
      fp, 1.0, std::vector<double>(ladder.begin() + 1, ladder.end()), prm);
  std::vector<SpectralField> lin_rungs;
  lin_rungs.push_back(fp);
  for (auto& sn : lin.snaps) lin_rungs.push_back(sn);

  const double xa = active_frequency(fp);
  const double dt_cap = opts.eta / std::max(xa * xa, 1.0);

  std::vector<SpectralField> u_cur = lin_rungs;
  const double fnorm = fp.l2();
  for (int it = 1; it <= opts.max_iter; ++it) {
    std::vector<SpectralField> u_next(m, SpectralField(g, Rep::spectral));
    u_next[m - 1] = lin_rungs[m - 1];
    SpectralField Iacc(g, Rep::spectral);  // zero at the truncation time
    double diff = 0.0;
    for (std::size_t l = m - 1; l-- > 0;) {
      SpectralField U = u_cur[l + 1];
      const double span = ladder[l + 1] - ladder[l];
      const int ns =
          std::max(1, static_cast<int>(std::ceil(span / dt_cap)));
      const double dt = -span / ns;
      double t = ladder[l + 1];
      for (int q = 0; q < ns; ++q) {
        split_step_backward(Iacc, U, t, dt, prm, opts.force_linear);
        t += dt;
      }
      SpectralField un = lin_rungs[l].to_spectral();
      SpectralField Is = Iacc.to_spectral();
      for (std::size_t j = 0; j < g.n; ++j) un[j] += Is[j];
      u_next[l] = un;
    }
    for (std::size_t l = 0; l < m; ++l) {
      SpectralField d = u_next[l].to_spectral();
      const SpectralField o = u_cur[l].to_spectral();
      for (std::size_t j = 0; j < g.n; ++j) d[j] -= o[j];
      diff = std::max(diff, d.l2() / fnorm);
    }
    res.picard_diffs.push_back(diff);
    u_cur.swap(u_next);
    res.iterations = it;
    if (diff <= opts.picard_tol) break;
    if (res.picard_diffs.size() >= 2) {
      const double prev = res.picard_diffs[res.picard_diffs.size() - 2];
      if (prev > 1e-13 && diff > 0.9 * prev)
        throw NumericalFailure(
            "nonlinear_wave_operator: Picard differences not geometric "
            "(data too large)");
    }
  }
  if (res.picard_diffs.empty() || res.picard_diffs.back() > opts.picard_tol)
    throw NumericalFailure(
        "nonlinear_wave_operator: fixed point did not converge");
  res.u_snaps = u_cur;
  res.u_at_1 = u_cur[0];
  return res;
}

SpectralField linear_free_asymptote(const SpectralField& f_plus,
                                    const Params& prm, double T,
                                    int average_last) {
  if (average_last < 1 || !(T > 2.0))
    throw ConfigError("linear_free_asymptote: bad settings");
  SpectralField fp = f_plus.to_spectral();
  const Grid& g = fp.grid();
  const double r = 1.1892071150027210667;  // 2^{1/4}
  std::vector<double> times;
  for (int q = average_last - 1; q >= 0; --q)
    times.push_back(T / std::pow(r, q));
  LinearRun run = run_linear(fp, 1.0, times, prm);
  SpectralField acc(g, Rep::spectral);
  for (std::size_t i = 0; i < times.size(); ++i) {
    for (std::size_t j = 0; j < g.n; ++j) {
      if (j == g.slot(0) || j == g.n / 2) continue;
      const double xi = g.xi(j);
      acc[j] += run.snaps[i][j] * std::exp(I * xi * xi * (times[i] - 1.0));
    }
  }
  for (std::size_t j = 0; j < g.n; ++j)
    acc[j] /= static_cast<double>(times.size());
  return acc;
}

}  // namespace nlslab

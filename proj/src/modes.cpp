#include "nlslab/modes.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>

#include "nlslab/rk.hpp"

namespace nlslab {

namespace {
using Vec2c = Eigen::Vector2cd;
const cplx I(0.0, 1.0);

// Phi without quadrature: theta - s a^2 ln theta - tail, tail summed from
// the series of sqrt(1-x) with x = 2 s a^2 / theta (|x| <= 1/2 for
// theta >= 4 a^2).  Used inside the ring right-hand side where Phi is
// evaluated per integrator stage.
double phi_fast(double theta, double a, Sign sign) {
  return theta - sgn(sign) * a * a * std::log(theta) -
         phi_tail_series(theta, a, sign);
}

double theta_switch(double a) { return 4.0 * a * a; }

}  // namespace

std::pair<cplx, cplx> pair_rhs(const ModePair& p, const Params& prm) {
  const double s = sgn(prm.sign);
  const double a2 = prm.a * prm.a;
  const cplx coupling =
      I * s * a2 / p.t * std::exp(cplx(0.0, -2.0 * s * a2 * std::log(p.t)));
  const cplx rot = -I * p.xi * p.xi;
  return {rot * p.u_plus + coupling * std::conj(p.u_minus),
          rot * p.u_minus + coupling * std::conj(p.u_plus)};
}

RescaledModes pair_to_rescaled(const ModePair& p, const Params& prm) {
  const double s = sgn(prm.sign);
  const cplx gauge = std::exp(cplx(0.0, s * prm.a * prm.a * std::log(p.t)));
  const cplx wp = p.u_plus * gauge;
  const cplx wm = p.u_minus * gauge;
  RescaledModes m;
  m.theta = p.xi * p.xi * p.t;
  m.Y = 0.5 * (wp + std::conj(wm));
  m.Z = (wp - std::conj(wm)) / (2.0 * I);
  return m;
}

ModePair rescaled_to_pair(const RescaledModes& m, double xi, const Params& prm) {
  const double s = sgn(prm.sign);
  ModePair p;
  p.xi = xi;
  p.t = m.theta / (xi * xi);
  const cplx gauge = std::exp(cplx(0.0, -s * prm.a * prm.a * std::log(p.t)));
  p.u_plus = (m.Y + I * m.Z) * gauge;
  p.u_minus = (std::conj(m.Y) + I * std::conj(m.Z)) * gauge;
  return p;
}

double alpha_factor(double theta, double a, Sign sign) {
  const double q = 1.0 - 2.0 * sgn(sign) * a * a / theta;
  if (!(q > 0.0)) throw ConfigError("alpha_factor: theta too small");
  return std::sqrt(q);
}

double phi_tail_series(double theta, double a, Sign sign) {
  if (a == 0.0) return 0.0;
  const double X = 2.0 * sgn(sign) * a * a / theta;
  if (!(std::abs(X) <= 0.5 + 1e-12))
    throw ConfigError("phi_tail_series: requires theta >= 4 a^2");
  double bk = -0.5;  // series coefficient of sqrt(1-x), starting at k=1
  double Xk = X;
  double sum = 0.0;
  for (int k = 2; k <= 200; ++k) {
    bk *= (static_cast<double>(k) - 1.5) / static_cast<double>(k);
    Xk *= X;
    const double term = bk * Xk / static_cast<double>(k - 1);
    sum += term;
    if (std::abs(term) < 1e-18 * (1.0 + std::abs(sum))) break;
  }
  return theta * sum;
}

double phi_tail_quadrature(double theta, double a, double S, double quad_tol,
                           Sign sign) {
  if (!(S >= theta)) throw ConfigError("phi_tail_quadrature: S < theta");
  const double s = sgn(sign);
  const double a2 = a * a;
  auto integrand = [&](double sp) {
    const double x = 2.0 * s * a2 / sp;
    if (std::abs(x) < 1e-4) {
      // sqrt(1-x) - 1 + x/2 to avoid cancellation
      return -x * x / 8.0 - x * x * x / 16.0 - 5.0 * x * x * x * x / 128.0;
    }
    return std::sqrt(1.0 - x) - 1.0 + x / 2.0;
  };
  // substitute s = theta/y so the decaying tail becomes a bounded
  // integrand on (theta/S, 1]
  auto compressed = [&](double y) {
    const double sp = theta / y;
    return integrand(sp) * theta / (y * y);
  };
  const double body = adaptive_simpson(compressed, theta / S, 1.0, quad_tol);
  const double remainder = -a2 * a2 / (2.0 * S) - s * a2 * a2 * a2 / (4.0 * S * S);
  return body + remainder;
}

double phase_Phi(double theta, double a, double quad_tol, Sign sign) {
  if (!(theta > theta_switch(a)))
    throw ConfigError("phase_Phi: requires theta > 4 a^2");
  if (a == 0.0) return theta;
  const double a8 = std::pow(a, 8.0);
  const double S =
      std::max({2.0 * theta, std::cbrt(5.0 * a8 / (12.0 * quad_tol)), 10.0});
  return theta - sgn(sign) * a * a * std::log(theta) -
         phi_tail_quadrature(theta, a, S, quad_tol, sign);
}

RingState rescaled_to_ring(const RescaledModes& m, double a, Sign sign) {
  const double al = alpha_factor(m.theta, a, sign);
  const double Phi = phi_fast(m.theta, a, sign);
  const cplx em = std::exp(-I * Phi), ep = std::exp(I * Phi);
  RingState r;
  r.theta = m.theta;
  r.Yr = em * (0.5 * m.Y - I * m.Z / (2.0 * al));
  r.Zr = ep * (0.5 * m.Y + I * m.Z / (2.0 * al));
  return r;
}

RescaledModes ring_to_rescaled(const RingState& r, double a, Sign sign) {
  const double al = alpha_factor(r.theta, a, sign);
  const double Phi = phi_fast(r.theta, a, sign);
  const cplx em = std::exp(-I * Phi), ep = std::exp(I * Phi);
  RescaledModes m;
  m.theta = r.theta;
  m.Y = ep * r.Yr + em * r.Zr;
  m.Z = I * al * (ep * r.Yr - em * r.Zr);
  return m;
}

std::pair<cplx, cplx> ring_rhs(const RingState& r, double a, Sign sign) {
  const double al2 = 1.0 - 2.0 * sgn(sign) * a * a / r.theta;
  const double g = sgn(sign) * a * a / (2.0 * r.theta * r.theta * al2);
  const double Phi = phi_fast(r.theta, a, sign);
  const cplx e2m = std::exp(-2.0 * I * Phi);
  return {g * (-r.Yr + e2m * r.Zr), g * (std::conj(e2m) * r.Yr - r.Zr)};
}

namespace {

RescaledModes advance_rescaled(RescaledModes m, double theta_to,
                               const Params& prm, double rtol) {
  const double s = sgn(prm.sign);
  const double a2 = prm.a * prm.a;
  const double ts = theta_switch(prm.a);
  const double atol = rtol * 1e-2;

  auto yz_rhs = [&](double th, const Vec2c& y) {
    return Vec2c(y[1], (-1.0 + 2.0 * s * a2 / th) * y[0]);
  };
  auto rg_rhs = [&](double th, const Vec2c& y) {
    RingState r{th, y[0], y[1]};
    auto [dy, dz] = ring_rhs(r, prm.a, prm.sign);
    return Vec2c(dy, dz);
  };

  auto run_yz = [&](RescaledModes mm, double target) {
    Vec2c y(mm.Y, mm.Z);
    y = dopri5(yz_rhs, y, mm.theta, target, rtol, atol);
    mm.theta = target;
    mm.Y = y[0];
    mm.Z = y[1];
    return mm;
  };
  auto run_ring = [&](RescaledModes mm, double target) {
    RingState r = rescaled_to_ring(mm, prm.a, prm.sign);
    Vec2c y(r.Yr, r.Zr);
    y = dopri5(rg_rhs, y, mm.theta, target, rtol, atol);
    r.theta = target;
    r.Yr = y[0];
    r.Zr = y[1];
    return ring_to_rescaled(r, prm.a, prm.sign);
  };

  while (m.theta != theta_to) {
    if (theta_to > m.theta) {
      if (m.theta < ts)
        m = run_yz(m, std::min(ts, theta_to));
      else
        m = run_ring(m, theta_to);
    } else {
      if (m.theta > ts)
        m = run_ring(m, std::max(ts, theta_to));
      else
        m = run_yz(m, theta_to);
    }
  }
  return m;
}

void update_growth(GrowthCheck* check, const ModePair& now, double t0,
                   double base, double a, double slack = 1e-9) {
  if (!check || base <= 0.0 || now.t < t0) return;
  const double ceiling = std::pow(now.t / t0, a * a) * base;
  const double r =
      std::max(std::abs(now.u_plus), std::abs(now.u_minus)) / ceiling;
  check->max_ratio = std::max(check->max_ratio, r);
  if (r > 1.0 + slack) check->ok = false;
}

}  // namespace

ModePair evolve_pair(const ModePair& p, double t1, const Params& prm,
                     double rtol, GrowthCheck* check) {
  prm.validate();
  if (!(p.xi > 0.0)) throw ConfigError("evolve_pair: xi must be > 0");
  if (!(p.t > 0.0) || !(t1 > 0.0))
    throw ConfigError("evolve_pair: times must be > 0");
  const double base = std::abs(p.u_plus) + std::abs(p.u_minus);

  ModePair out;
  if (prm.a == 0.0) {
    const cplx ph = std::exp(-I * p.xi * p.xi * (t1 - p.t));
    out = ModePair{p.xi, t1, p.u_plus * ph, p.u_minus * ph};
  } else {
    RescaledModes m = pair_to_rescaled(p, prm);
    m = advance_rescaled(m, p.xi * p.xi * t1, prm, rtol);
    out = rescaled_to_pair(m, p.xi, prm);
    out.t = t1;  // kill roundoff from theta/xi^2
  }
  update_growth(check, out, p.t, base, prm.a);
  return out;
}

std::vector<ModePair> evolve_pair_path(const ModePair& p,
                                       const std::vector<double>& times,
                                       const Params& prm, double rtol,
                                       GrowthCheck* check) {
  const double base = std::abs(p.u_plus) + std::abs(p.u_minus);
  std::vector<ModePair> out;
  out.reserve(times.size());
  ModePair cur = p;
  for (double t : times) {
    cur = evolve_pair(cur, t, prm, rtol, nullptr);
    update_growth(check, cur, p.t, base, prm.a);
    out.push_back(cur);
  }
  return out;
}

AsymptoticMode asymptotic_mode(const ModePair& at_T, const Params& prm) {
  prm.validate();
  if (!(at_T.xi > 0.0)) throw ConfigError("asymptotic_mode: xi must be > 0");
  const double theta = at_T.xi * at_T.xi * at_T.t;
  AsymptoticMode am;
  if (prm.a == 0.0) {
    const cplx ph = std::exp(I * at_T.xi * at_T.xi * at_T.t);
    am.u_plus_hat = at_T.u_plus * ph;
    am.u_plus_hat_minus = at_T.u_minus * ph;
    am.Z_ring_plus = 0.5 * am.u_plus_hat;
    am.Y_ring_plus = 0.5 * std::conj(am.u_plus_hat_minus);
    am.tail_bound = 0.0;
    return am;
  }
  if (!(theta > theta_switch(prm.a)))
    throw ConfigError("asymptotic_mode: xi^2 T must exceed 4 a^2");
  RescaledModes m = pair_to_rescaled(at_T, prm);
  RingState r = rescaled_to_ring(m, prm.a, prm.sign);
  const double al = alpha_factor(theta, prm.a, prm.sign);
  // The diagonal part of the remaining flow integrates in closed form to a
  // sqrt(alpha) factor; the oscillatory off-diagonal part is O(a^2/theta^2).
  am.Z_ring_plus = std::sqrt(al) * r.Zr;
  am.Y_ring_plus = std::sqrt(al) * r.Yr;
  am.tail_bound =
      prm.a * prm.a / theta * (std::abs(r.Yr) + std::abs(r.Zr));
  const cplx gauge = std::exp(
      cplx(0.0, sgn(prm.sign) * prm.a * prm.a * std::log(at_T.xi * at_T.xi)));
  am.u_plus_hat = 2.0 * gauge * am.Z_ring_plus;
  am.u_plus_hat_minus = 2.0 * gauge * std::conj(am.Y_ring_plus);
  return am;
}

cplx zero_mode_w(cplx w0, double t_from, double t_to, const Params& prm) {
  if (!(t_from > 0.0) || !(t_to > 0.0))
    throw ConfigError("zero_mode_w: times must be > 0");
  const double s = sgn(prm.sign);
  return w0 + 2.0 * I * s * prm.a * prm.a * w0.real() * std::log(t_to / t_from);
}

cplx zero_mode_u(cplx u0, double t_from, double t_to, const Params& prm) {
  const double s = sgn(prm.sign);
  const cplx w0 = u0 * std::exp(cplx(0.0, s * prm.a * prm.a * std::log(t_from)));
  const cplx wt = zero_mode_w(w0, t_from, t_to, prm);
  return wt * std::exp(cplx(0.0, -s * prm.a * prm.a * std::log(t_to)));
}

BoundsReport check_controls_bounds(const std::vector<ModePair>& history,
                                   const Params& prm, double slack) {
  if (history.size() < 2)
    throw ConfigError("check_controls_bounds: need >= 2 samples");
  const double t0 = history.front().t;
  const double base = std::abs(history.front().u_plus) +
                      std::abs(history.front().u_minus);
  if (base <= 0.0)
    throw ConfigError("check_controls_bounds: empty baseline pair");
  BoundsReport rep;
  rep.ceiling_ok = true;
  double decade_edge = t0 * 10.0;
  double decade_max = 0.0;
  for (const auto& p : history) {
    const double amp = std::max(std::abs(p.u_plus), std::abs(p.u_minus));
    const double ratio = amp / (std::pow(p.t / t0, prm.a * prm.a) * base);
    rep.ceiling_max_ratio = std::max(rep.ceiling_max_ratio, ratio);
    if (ratio > 1.0 + slack) rep.ceiling_ok = false;
    const double flat = amp / base;
    rep.fitted_C = std::max(rep.fitted_C, flat);
    while (p.t > decade_edge) {
      rep.per_decade_C.push_back(decade_max);
      decade_max = 0.0;
      decade_edge *= 10.0;
    }
    decade_max = std::max(decade_max, flat);
  }
  rep.per_decade_C.push_back(decade_max);
  return rep;
}

}  // namespace nlslab

#pragma once

#include <utility>
#include <vector>

#include "nlslab/field.hpp"
#include "nlslab/params.hpp"

namespace nlslab {

// State of the coupled Fourier pair (uhat(t, xi), uhat(t, -xi)), xi > 0,
// for the linear equation i u_t + u_xx +- a^2 t^{-1 -+ 2 i a^2} conj(u) = 0.
struct ModePair {
  double xi = 0.0;
  double t = 1.0;
  cplx u_plus;   // uhat(t, +xi)
  cplx u_minus;  // uhat(t, -xi)
};

// Right-hand side of the pair system at the current state.
//   d/dt uhat(+-xi) = -i xi^2 uhat(+-xi)
//                     + i s a^2 t^{-1} e^{-2 i s a^2 ln t} conj(uhat(-+xi)).
std::pair<cplx, cplx> pair_rhs(const ModePair& p, const Params& prm);

struct GrowthCheck {
  double max_ratio = 0.0;  // |uhat(t)| / ((t/t0)^{a^2} (|u0+| + |u0-|))
  bool ok = true;          // ratio <= 1 + slack throughout
};

// Evolve a pair to time t1 (forward or backward, t1 > 0).  Internally uses
// the real/imaginary mode system in rescaled time theta = xi^2 t, switching
// to the diagonalized (ring) variables once theta > 4 a^2.  For a forward
// run, growth against the (t/t0)^{a^2} ceiling is monitored.
ModePair evolve_pair(const ModePair& p, double t1, const Params& prm,
                     double rtol = 1e-10, GrowthCheck* check = nullptr);

// Sequential evolution through a list of times; returns the state at each.
std::vector<ModePair> evolve_pair_path(const ModePair& p,
                                       const std::vector<double>& times,
                                       const Params& prm, double rtol = 1e-10,
                                       GrowthCheck* check = nullptr);

// --- rescaled real/imaginary modes -------------------------------------
// Y = (what(xi) + conj(what(-xi)))/2, Z = (what(xi) - conj(what(-xi)))/(2i)
// where what = uhat * e^{s i a^2 ln t}; in theta = xi^2 t they satisfy
// Y' = Z, Z' = (-1 + 2 s a^2/theta) Y.
struct RescaledModes {
  double theta = 0.0;
  cplx Y, Z;
};

RescaledModes pair_to_rescaled(const ModePair& p, const Params& prm);
ModePair rescaled_to_pair(const RescaledModes& m, double xi, const Params& prm);

// --- diagonalized (ring) variables, theta > 4 a^2 ----------------------
// alpha(theta) = sqrt(1 - 2 s a^2/theta); focusing needs theta > 4 a^2 to
// keep alpha away from 0.
double alpha_factor(double theta, double a, Sign sign = Sign::focusing);

// Phi(theta) = theta - s a^2 ln theta - tail(theta), with
// tail(theta) = integral_theta^inf (alpha(s') - 1 + s a^2/s') ds'.
// Contract form: adaptive quadrature to a truncation point plus the
// analytic remainder -a^4/(2S) - a^6/(4S^2).
double phase_Phi(double theta, double a, double quad_tol = 1e-12,
                 Sign sign = Sign::focusing);
// Tail by quadrature on [theta, S] plus the remainder; exposed for tests.
double phi_tail_quadrature(double theta, double a, double S, double quad_tol,
                           Sign sign = Sign::focusing);
// Same tail summed from the convergent series in 2 s a^2/theta.
double phi_tail_series(double theta, double a, Sign sign = Sign::focusing);

struct RingState {
  double theta = 0.0;
  cplx Yr, Zr;
};

RingState rescaled_to_ring(const RescaledModes& m, double a,
                           Sign sign = Sign::focusing);
RescaledModes ring_to_rescaled(const RingState& r, double a,
                               Sign sign = Sign::focusing);

// d/dtheta of (Yr, Zr):
//   (s a^2 / (2 theta^2 alpha^2)) [[-1, e^{-2iPhi}], [e^{2iPhi}, -1]].
std::pair<cplx, cplx> ring_rhs(const RingState& r, double a,
                               Sign sign = Sign::focusing);

// --- asymptotic state per mode ------------------------------------------
struct AsymptoticMode {
  cplx Z_ring_plus;   // limit of Zr as theta -> inf
  cplx Y_ring_plus;   // limit of Yr; equals conj of Zr-limit at -xi
  cplx u_plus_hat;    // 2 e^{s i a^2 ln xi^2} Z_ring_plus
  cplx u_plus_hat_minus;  // asymptotic coefficient at -xi
  double tail_bound = 0.0;
};

// Extract the scattering coefficients from the pair state at a (large)
// time T with theta = xi^2 T > 4 a^2.  The remaining tail is absorbed to
// leading order by the exact diagonal flow (a sqrt(alpha) factor); the
// reported bound is the conservative a^2/theta envelope.
AsymptoticMode asymptotic_mode(const ModePair& at_T, const Params& prm);

// --- zero mode ----------------------------------------------------------
// Closed-form law for the spatial mean: with W(t) = integral of w(t),
//   W(t) = W(t0) + 2 i s a^2 Re(W(t0)) ln(t/t0).
cplx zero_mode_w(cplx w0, double t_from, double t_to, const Params& prm);
// Same law transported to uhat(t, 0) = e^{-s i a^2 ln t} What(t).
cplx zero_mode_u(cplx u0, double t_from, double t_to, const Params& prm);

// --- a-priori bound diagnostics -----------------------------------------
struct BoundsReport {
  double ceiling_max_ratio = 0.0;   // vs (t/t0)^{a^2}(|u0+|+|u0-|), const 1
  bool ceiling_ok = false;          // within 1e-9 slack
  double fitted_C = 0.0;            // best constant for the flat-sum bound
  std::vector<double> per_decade_C; // stability of that constant per decade
};

BoundsReport check_controls_bounds(const std::vector<ModePair>& history,
                                   const Params& prm, double slack = 1e-9);

}  // namespace nlslab

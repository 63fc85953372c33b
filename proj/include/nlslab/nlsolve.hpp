#pragma once

#include <vector>

#include "nlslab/field.hpp"
#include "nlslab/params.hpp"

namespace nlslab {

// Gauge maps between the flat-background form v (fixed point v == a) and
// the scattering form u: v = a + u * e^{s i a^2 ln t}.
SpectralField u_from_v(const SpectralField& v, double t, const Params& prm);
SpectralField v_from_u(const SpectralField& u, double t, const Params& prm);

// Nonlinear remainder of the scattering form:
//   F(u) = s (|w|^2 w + a (w^2 + 2|w|^2)) e^{-s i a^2 ln t},  w = u e^{s i a^2 ln t};
// the equation carries it as F(u)/t.  Output is 2/3-rule de-aliased.
SpectralField F_of_u(const SpectralField& u, double t, const Params& prm,
                     bool dealias = true);

// One Strang step of i v_t + v_xx + s (|v|^2 - a^2) v / t = 0:
// half exact free step, exact gauge substep (the potential flow preserves
// |v| pointwise and integrates to a log phase), half free step.
SpectralField step_strang(const SpectralField& v, double t, double dt,
                          const Params& prm, bool dealias = true);

double conservation_Q(const SpectralField& v, double a);
// E(t) = 1/2 int |v_x|^2 - s/(4t) int (|v|^2 - a^2)^2
double energy_E(const SpectralField& v, double t, const Params& prm);
// int (|v|^2 - a^2)^2, the quartic driving the energy drift
double quartic_P(const SpectralField& v, double a);

struct NonlinearOpts {
  double dt_max = 0.05;
  double eta = 0.1;          // step = eta / (active frequency)^2
  double xi_active = 0.0;    // 0: infer from the initial spectrum
  double fixed_dt = 0.0;     // > 0: override the step policy entirely
  bool dealias = true;
  double guard_frac = 0.1;   // refuse if norm_X(u) > guard_frac * a
  double nyquist_mass = 1e-6;
  double blow_factor = 1e3;
};

struct DiagRow {
  double t = 0.0;
  double Q = 0.0;
  double E = 0.0;
  double P = 0.0;       // quartic integral
  double l2_u = 0.0;
  double linf_u = 0.0;
  double xu_l2 = 0.0;   // ||x u||_{L2}, weighted-mass growth diagnostic
  cplx mean_w;          // integral of w = v - a
  cplx mean_u;          // integral of u
};

struct NonlinearRun {
  Params params;
  NonlinearOpts opts;
  double t_start = 1.0;
  std::vector<double> times;           // includes t_start as first entry
  std::vector<SpectralField> v_snaps;  // physical rep
  std::vector<DiagRow> diag;
};

// Evolve v from t_start through the given times.  Refuses data that fail
// the smallness guard or carry Nyquist-band mass; aborts on blow-up.
NonlinearRun run_nonlinear(const SpectralField& v0, double t_start,
                           const std::vector<double>& snap_times,
                           const Params& prm, const NonlinearOpts& opts = {});

// Central-difference residual of the energy law dE/dt = s P / (4 t^2) at
// the interior snapshot times.
std::vector<double> gp2_residual(const NonlinearRun& run);

struct NonlinearScattering {
  SpectralField f_plus;                   // spectral; uhat(t) ~ e^{-i(t-t_start) xi^2} fhat+
  std::vector<double> pullback_increments;
  std::vector<double> residuals;          // ||uhat(t) - free pullforward|| per time
  bool cauchy_ok = false;
  cplx mean_w_final;
};

// Free pullback of u along the ladder; the asymptotic state is the average
// of the last few rungs.  Throws if the pullback increments grow.
NonlinearScattering nonlinear_scattering_state(const NonlinearRun& run,
                                               int average_last = 4);

struct ZeroModeGrowth {
  double slope_im_mean_w = 0.0;   // d Im(int w) / d ln t, least squares
  double predicted_linear = 0.0;  // 2 s a^2 Re(int w at t_start)
  double predicted_leading = 0.0; // s a Q(t_start)
  double Q_start = 0.0;
  bool sufficient_condition = false;  // Q(t_start) > 0
  double xu_growth_exponent = 0.0;    // ||x u|| ~ t^e fit (0 if not fittable)
};

ZeroModeGrowth zero_mode_growth(const NonlinearRun& run);

}  // namespace nlslab

#pragma once

#include <vector>

#include "nlslab/field.hpp"
#include "nlslab/modes.hpp"
#include "nlslab/params.hpp"

namespace nlslab {

// A linear evolution captured at a ladder of times (spectral snapshots).
struct LinearRun {
  Params params;
  double t_start = 1.0;
  std::vector<double> times;
  std::vector<SpectralField> snaps;  // spectral rep, one per time
};

// Evolve every Fourier pair of f from t_start through the given increasing
// times.  The zero mode follows its closed-form law; the unpaired Nyquist
// slot rotates freely (it must stay numerically empty for honest runs).
LinearRun run_linear(const SpectralField& f, double t_start,
                     const std::vector<double>& times, const Params& prm,
                     double rtol = 1e-10, GrowthCheck* check = nullptr);

// Single-target convenience wrapper.
SpectralField propagate(const SpectralField& f, double t_from, double t_to,
                        const Params& prm, double rtol = 1e-10);

// Duhamel increment for one pair: returns D with
//   uhat(t2, xi) = e^{-i xi^2 (t2 - t1)} uhat(t1, xi) + D.
// Gauss panels are capped at pi/(4 xi^2) so the free phase is resolved.
cplx duhamel_A(const ModePair& at_t1, double t2, const Params& prm,
               double rtol = 1e-10);

struct RateFit {
  double exponent = 0.0;   // decay rate: value ~ t^{-exponent}
  double intercept = 0.0;  // ln of the prefactor
  double r2 = 0.0;
  int n_used = 0;
};

// Least squares of ln(value) against ln(t) on [t_lo, t_hi]; requires at
// least 8 positive samples spanning two decades.
RateFit rate_fit(const std::vector<double>& times,
                 const std::vector<double>& values, double t_lo, double t_hi);

struct ScatteringState {
  SpectralField u_plus;       // spectral; uhat(t) ~ e^{-i t xi^2} u_plus
  cplx zero_mode_at_T;        // the non-scattering mean, stored separately
  bool zero_mode_log_growth = false;
  double fitted_C = 0.0;      // envelope constant actually observed
  double tail_bound = 0.0;    // max per-mode extraction tail bound
};

// Extract the scattering state from the last snapshot of a run; verifies
// the direct free pullback agrees within the 1/(xi^2 T) envelope.
ScatteringState scattering_state(const LinearRun& run);

// e^{-i t xi^2} u_plus as a spectral field (zero/Nyquist slots untouched).
SpectralField free_state(const SpectralField& u_plus, double t);

// ||uhat(t) - e^{-i t xi^2} u_plus||_{L2} per snapshot, zero mode and
// Nyquist slot excluded.
std::vector<double> residual_series(const LinearRun& run,
                                    const SpectralField& u_plus);

struct LowfreqCheck {
  double max_ratio = 0.0;
  std::vector<std::pair<double, double>> profile;  // (xi, weighted ratio)
};

// sup over 0 < xi^2 <= 1 of |xi|^{2(gamma+delta)} |u_plus_hat| relative to
// norm_X of the initial state.
LowfreqCheck check_u_plus_lowfreq(const SpectralField& u_plus,
                                  const SpectralField& u_at_t0,
                                  const Params& prm);

struct StrichartzDiagnostic {
  double solution_l4linf = 0.0;
  double residual_l4linf = 0.0;
  double ratio_vs_initial_norm = 0.0;  // solution value / norm_X(u(t0))
};

StrichartzDiagnostic strichartz_diagnostic(const LinearRun& run,
                                           const SpectralField& u_plus);

}  // namespace nlslab

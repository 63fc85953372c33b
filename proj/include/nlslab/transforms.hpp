#pragma once

#include <utility>
#include <vector>

#include "nlslab/field.hpp"
#include "nlslab/params.hpp"

namespace nlslab {

// Curvature/torsion profile on a uniform arclength grid.  Where the
// curvature drops below the threshold the torsion is undefined (masked).
struct CurvatureTorsion {
  Grid grid;
  std::vector<double> c, tau;
  std::vector<char> tau_valid;
};

// psi(x) = c(x) exp(i integral_0^x tau), cumulative trapezoid from x = 0.
SpectralField hasimoto(const CurvatureTorsion& ct);

enum class DerivMethod {
  spectral,  // tau = Im(psi_x / psi), psi_x by spectral derivative
  phase_fd   // tau_j = arg(psi_{j+1} conj(psi_{j-1})) / (2 dx); local, and
             // exact for quadratic phases, so safe for non-periodic fields
};

CurvatureTorsion inverse_hasimoto(const SpectralField& psi,
                                  DerivMethod method = DerivMethod::spectral,
                                  double threshold = 1e-8);

// Trigonometric (band-limited) evaluation of a periodic field at y.
cplx trig_eval(const SpectralField& f_spectral, double y);

// psi(t, x) = e^{i x^2 / 4t} / sqrt(t) * conj(v)(x / t) on the scaled grid
// (t * L_v, same n), where the map is a pointwise node-aligned bijection.
SpectralField psi_from_v(const SpectralField& v, double t);
// Inverse map; recovers v on the grid (L_psi / t, same n).
SpectralField v_from_psi(const SpectralField& psi, double t);

// Full filament profile from the scattering form u sampled at time 1/t:
//   psi = psi_a + e^{s i a^2 ln t} T[u],  psi_a = a e^{i x^2/4t}/sqrt(t).
SpectralField assemble_psi(const SpectralField& u_at_inv_t, double t,
                           const Params& prm);

// Same profile evaluated on a caller-chosen grid (band-limited resampling
// of u at the pulled-back points x/t).  Errors if the target leaves the
// covered window |x/t| <= L_u.
SpectralField assemble_psi_on(const SpectralField& u_at_inv_t, double t,
                              const Params& prm, const Grid& target);

// min and max of sqrt(t) |psi|; the perturbative regime needs this inside
// [a/2, 3a/2].
std::pair<double, double> amplitude_window(const SpectralField& psi, double t);

}  // namespace nlslab

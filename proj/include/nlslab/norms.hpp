#pragma once

#include <vector>

#include "nlslab/field.hpp"

namespace nlslab {

// t0^{-1/4} ||f||_{L2} + t0^{gamma - 1/2} * max over grid xi with xi^2 <= 1
// of |xi|^{2 gamma} |fhat(xi)|.  Ties at xi^2 == 1 are included.  Requires
// at least one nonzero grid frequency inside the unit band (L >= pi).
double norm_X(const SpectralField& f, double t0, double gamma);

// sup over the sampled trajectory of
//   t0^{-1/4} ||g(t)||_{L2} + (t0/t)^{a^2} t0^{gamma-1/2} max |xi|^{2g}|ghat|.
double norm_Y_sample(const std::vector<double>& times,
                     const std::vector<SpectralField>& snaps, double t0,
                     double gamma, double a);

// (integral of ||g(t)||_inf^4 dt)^{1/4}, trapezoid on the given times.
double norm_L4Linf(const std::vector<double>& times,
                   const std::vector<SpectralField>& snaps);

}  // namespace nlslab

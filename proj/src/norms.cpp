#include "nlslab/norms.hpp"

#include <cmath>

namespace nlslab {

namespace {

// max_{xi^2 <= 1} |xi|^{2 gamma} |fhat(xi)|, with 0^0 == 1 (so the zero
// mode participates when gamma == 0 and drops out otherwise).
double lowfreq_weighted_max(const SpectralField& fs, double gamma) {
  const Grid& g = fs.grid();
  bool nonzero_in_band = false;
  double m = 0.0;
  for (std::size_t j = 0; j < g.n; ++j) {
    const double xi = g.xi(j);
    if (xi * xi > 1.0) continue;
    if (xi != 0.0) nonzero_in_band = true;
    m = std::max(m, std::pow(std::abs(xi), 2.0 * gamma) * std::abs(fs.hat(j)));
  }
  if (!nonzero_in_band)
    throw ConfigError("norm: no nonzero grid frequency with xi^2 <= 1 (box too small)");
  return m;
}

}  // namespace

double norm_X(const SpectralField& f, double t0, double gamma) {
  if (!(t0 >= 1.0)) throw ConfigError("norm_X: t0 must be >= 1");
  if (!(gamma >= 0.0)) throw ConfigError("norm_X: gamma must be >= 0");
  SpectralField fs = f.to_spectral();
  return std::pow(t0, -0.25) * fs.l2() +
         std::pow(t0, gamma - 0.5) * lowfreq_weighted_max(fs, gamma);
}

double norm_Y_sample(const std::vector<double>& times,
                     const std::vector<SpectralField>& snaps, double t0,
                     double gamma, double a) {
  if (times.size() != snaps.size() || times.empty())
    throw ConfigError("norm_Y_sample: need matching nonempty samples");
  double best = 0.0;
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!(times[i] >= t0)) throw ConfigError("norm_Y_sample: sample before t0");
    SpectralField fs = snaps[i].to_spectral();
    const double val = std::pow(t0, -0.25) * fs.l2() +
                       std::pow(t0 / times[i], a * a) *
                           std::pow(t0, gamma - 0.5) *
                           lowfreq_weighted_max(fs, gamma);
    best = std::max(best, val);
  }
  return best;
}

double norm_L4Linf(const std::vector<double>& times,
                   const std::vector<SpectralField>& snaps) {
  if (times.size() != snaps.size() || times.size() < 2)
    throw ConfigError("norm_L4Linf: need >= 2 samples");
  std::vector<double> p4(times.size());
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    const double m = snaps[i].to_physical().linf();
    p4[i] = m * m * m * m;
  }
  double s = 0.0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (!(times[i] > times[i - 1]))
      throw ConfigError("norm_L4Linf: times must increase");
    s += 0.5 * (p4[i] + p4[i - 1]) * (times[i] - times[i - 1]);
  }
  return std::pow(s, 0.25);
}

}  // namespace nlslab

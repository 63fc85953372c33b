#include "nlslab/transforms.hpp"

#include <algorithm>
#include <cmath>

namespace nlslab {

namespace {
const cplx I(0.0, 1.0);
}

SpectralField hasimoto(const CurvatureTorsion& ct) {
  const Grid& g = ct.grid;
  if (ct.c.size() != g.n || ct.tau.size() != g.n)
    throw ConfigError("hasimoto: profile size mismatch");
  const std::size_t j0 = g.n / 2;  // x = 0
  std::vector<double> S(g.n, 0.0);
  for (std::size_t j = j0 + 1; j < g.n; ++j)
    S[j] = S[j - 1] + 0.5 * (ct.tau[j - 1] + ct.tau[j]) * g.dx();
  for (std::size_t j = j0; j-- > 0;)
    S[j] = S[j + 1] - 0.5 * (ct.tau[j] + ct.tau[j + 1]) * g.dx();
  SpectralField psi(g, Rep::physical);
  for (std::size_t j = 0; j < g.n; ++j)
    psi[j] = ct.c[j] * std::exp(I * S[j]);
  return psi;
}

CurvatureTorsion inverse_hasimoto(const SpectralField& psi, DerivMethod method,
                                  double threshold) {
  SpectralField p = psi.to_physical();
  const Grid& g = p.grid();
  CurvatureTorsion ct;
  ct.grid = g;
  ct.c.resize(g.n);
  ct.tau.assign(g.n, 0.0);
  ct.tau_valid.assign(g.n, 0);
  for (std::size_t j = 0; j < g.n; ++j) ct.c[j] = std::abs(p[j]);

  if (method == DerivMethod::spectral) {
    SpectralField ds = p.to_spectral();
    for (std::size_t j = 0; j < g.n; ++j) ds[j] *= I * g.xi(j);
    SpectralField px = ds.to_physical();
    for (std::size_t j = 0; j < g.n; ++j) {
      if (ct.c[j] <= threshold) continue;
      ct.tau[j] = (px[j] / p[j]).imag();
      ct.tau_valid[j] = 1;
    }
  } else {
    const double dx = g.dx();
    for (std::size_t j = 0; j < g.n; ++j) {
      if (ct.c[j] <= threshold) continue;
      if (j == 0) {
        if (ct.c[1] > threshold) {
          ct.tau[j] = std::arg(p[1] * std::conj(p[0])) / dx;
          ct.tau_valid[j] = 1;
        }
      } else if (j == g.n - 1) {
        if (ct.c[j - 1] > threshold) {
          ct.tau[j] = std::arg(p[j] * std::conj(p[j - 1])) / dx;
          ct.tau_valid[j] = 1;
        }
      } else if (ct.c[j - 1] > threshold && ct.c[j + 1] > threshold) {
        ct.tau[j] = std::arg(p[j + 1] * std::conj(p[j - 1])) / (2.0 * dx);
        ct.tau_valid[j] = 1;
      }
    }
  }
  return ct;
}

cplx trig_eval(const SpectralField& f_spectral, double y) {
  if (f_spectral.rep() != Rep::spectral)
    throw ConfigError("trig_eval: field must be spectral");
  const Grid& g = f_spectral.grid();
  cplx acc(0.0);
  for (std::size_t j = 0; j < g.n; ++j)
    acc += f_spectral[j] * std::exp(I * g.xi(j) * y);
  return acc / std::sqrt(static_cast<double>(g.n));
}

SpectralField psi_from_v(const SpectralField& v, double t) {
  if (!(t > 0.0)) throw ConfigError("psi_from_v: t must be > 0");
  SpectralField vp = v.to_physical();
  const Grid& gv = vp.grid();
  Grid gp(t * gv.L, gv.n);
  SpectralField psi(gp, Rep::physical);
  const double rt = std::sqrt(t);
  for (std::size_t j = 0; j < gp.n; ++j) {
    const double x = gp.x(j);
    psi[j] = std::exp(I * (x * x / (4.0 * t))) / rt * std::conj(vp[j]);
  }
  return psi;
}

SpectralField v_from_psi(const SpectralField& psi, double t) {
  if (!(t > 0.0)) throw ConfigError("v_from_psi: t must be > 0");
  SpectralField pp = psi.to_physical();
  const Grid& gp = pp.grid();
  Grid gv(gp.L / t, gp.n);
  SpectralField v(gv, Rep::physical);
  const double rt = std::sqrt(t);
  for (std::size_t j = 0; j < gv.n; ++j) {
    const double x = gp.x(j);
    v[j] = std::conj(rt * pp[j] * std::exp(-I * (x * x / (4.0 * t))));
  }
  return v;
}

SpectralField assemble_psi(const SpectralField& u_at_inv_t, double t,
                           const Params& prm) {
  prm.validate();
  if (!(t > 0.0)) throw ConfigError("assemble_psi: t must be > 0");
  SpectralField up = u_at_inv_t.to_physical();
  const Grid& gu = up.grid();
  Grid gp(t * gu.L, gu.n);
  SpectralField psi(gp, Rep::physical);
  const double rt = std::sqrt(t);
  const cplx gt = std::exp(cplx(0.0, sgn(prm.sign) * prm.a * prm.a * std::log(t)));
  for (std::size_t j = 0; j < gp.n; ++j) {
    const double x = gp.x(j);
    psi[j] = std::exp(I * (x * x / (4.0 * t))) / rt *
             (prm.a + gt * std::conj(up[j]));
  }
  return psi;
}

SpectralField assemble_psi_on(const SpectralField& u_at_inv_t, double t,
                              const Params& prm, const Grid& target) {
  prm.validate();
  if (!(t > 0.0)) throw ConfigError("assemble_psi_on: t must be > 0");
  SpectralField uh = u_at_inv_t.to_spectral();
  const Grid& gu = uh.grid();
  SpectralField psi(target, Rep::physical);
  const double rt = std::sqrt(t);
  const cplx gt = std::exp(cplx(0.0, sgn(prm.sign) * prm.a * prm.a * std::log(t)));
  for (std::size_t j = 0; j < target.n; ++j) {
    const double x = target.x(j);
    const double y = x / t;
    if (std::abs(y) > gu.L)
      throw GuardRefusal("assemble_psi_on: target node outside covered window");
    psi[j] = std::exp(I * (x * x / (4.0 * t))) / rt *
             (prm.a + gt * std::conj(trig_eval(uh, y)));
  }
  return psi;
}

std::pair<double, double> amplitude_window(const SpectralField& psi, double t) {
  SpectralField p = psi.to_physical();
  const double rt = std::sqrt(t);
  double lo = 1e300, hi = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) {
    const double m = rt * std::abs(p[j]);
    lo = std::min(lo, m);
    hi = std::max(hi, m);
  }
  return {lo, hi};
}

}  // namespace nlslab

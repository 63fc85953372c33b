#include "nlslab/field.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace nlslab {

namespace {
bool is_pow2(std::size_t n) { return n >= 2 && (n & (n - 1)) == 0; }

std::string fmt_g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}
}  // namespace

Grid::Grid(double half_length, std::size_t points) : L(half_length), n(points) {
  if (!(L > 0.0) || !std::isfinite(L))
    throw ConfigError("grid: half-length must be finite and positive");
  if (!is_pow2(n)) throw ConfigError("grid: point count must be a power of two >= 2");
}

namespace {

// Iterative radix-2 decimation-in-time, in place, unscaled.
void fft_raw(std::vector<cplx>& a, bool invert) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = 2.0 * M_PI / static_cast<double>(len) * (invert ? 1.0 : -1.0);
    const cplx wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      cplx w(1.0);
      for (std::size_t j = 0; j < len / 2; ++j) {
        cplx u = a[i + j], v = a[i + j + len / 2] * w;
        a[i + j] = u + v;
        a[i + j + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

// Physical nodes start at -L, not 0; coefficients against exp(i xi_k x)
// with x_j = -L + j dx differ from the standard DFT by (-1)^k, and k has
// the parity of its storage slot.
void apply_origin_twiddle(std::vector<cplx>& a) {
  for (std::size_t j = 1; j < a.size(); j += 2) a[j] = -a[j];
}

}  // namespace

void fft_forward(const Grid& g, std::vector<cplx>& v) {
  if (v.size() != g.n) throw ConfigError("fft: size mismatch");
  fft_raw(v, false);
  const double s = 1.0 / std::sqrt(static_cast<double>(g.n));
  for (auto& z : v) z *= s;
  apply_origin_twiddle(v);
}

void fft_inverse(const Grid& g, std::vector<cplx>& v) {
  if (v.size() != g.n) throw ConfigError("fft: size mismatch");
  apply_origin_twiddle(v);
  fft_raw(v, true);
  const double s = 1.0 / std::sqrt(static_cast<double>(g.n));
  for (auto& z : v) z *= s;
}

SpectralField SpectralField::from_physical(Grid g, std::function<cplx(double)> f) {
  SpectralField out(g, Rep::physical);
  for (std::size_t j = 0; j < g.n; ++j) out[j] = f(g.x(j));
  return out;
}

SpectralField SpectralField::from_hat(Grid g, std::function<cplx(double)> fhat) {
  SpectralField out(g, Rep::spectral);
  const double scale = 1.0 / (g.dx() * std::sqrt(static_cast<double>(g.n)));
  for (std::size_t j = 0; j < g.n; ++j) out[j] = fhat(g.xi(j)) * scale;
  return out;
}

SpectralField SpectralField::to_spectral() const {
  if (rep_ == Rep::spectral) return *this;
  SpectralField out = *this;
  fft_forward(grid_, out.v_);
  out.rep_ = Rep::spectral;
  return out;
}

SpectralField SpectralField::to_physical() const {
  if (rep_ == Rep::physical) return *this;
  SpectralField out = *this;
  fft_inverse(grid_, out.v_);
  out.rep_ = Rep::physical;
  return out;
}

cplx SpectralField::hat(std::size_t j) const {
  if (rep_ != Rep::spectral) throw ConfigError("hat: field not in spectral rep");
  return v_[j] * (grid_.dx() * std::sqrt(static_cast<double>(grid_.n)));
}

void SpectralField::set_hat(std::size_t j, cplx value) {
  if (rep_ != Rep::spectral) throw ConfigError("set_hat: field not in spectral rep");
  v_[j] = value / (grid_.dx() * std::sqrt(static_cast<double>(grid_.n)));
}

double SpectralField::l2() const {
  double s = 0.0;
  for (const auto& z : v_) s += std::norm(z);
  return std::sqrt(grid_.dx() * s);
}

double SpectralField::linf() const {
  if (rep_ != Rep::physical) throw ConfigError("linf: field not in physical rep");
  double m = 0.0;
  for (const auto& z : v_) m = std::max(m, std::abs(z));
  return m;
}

double SpectralField::high_band_fraction(double frac) const {
  SpectralField s = to_spectral();
  const double cut = frac * grid_.xi_nyquist();
  double total = 0.0, high = 0.0;
  for (std::size_t j = 0; j < grid_.n; ++j) {
    const double m = std::norm(s[j]);
    total += m;
    if (std::abs(grid_.xi(j)) >= cut) high += m;
  }
  return total > 0.0 ? high / total : 0.0;
}

void write_field_csv(std::ostream& os, const SpectralField& f) {
  const bool spec = f.rep() == Rep::spectral;
  os << "L," << fmt_g17(f.grid().L) << ",n," << f.grid().n
     << ",rep," << (spec ? "spectral" : "physical") << "\n";
  os << "index," << (spec ? "xi" : "x") << ",re,im\n";
  for (std::size_t j = 0; j < f.size(); ++j) {
    const double c = spec ? f.grid().xi(j) : f.grid().x(j);
    os << j << "," << fmt_g17(c) << ","
       << fmt_g17(f[j].real()) << ","
       << fmt_g17(f[j].imag()) << "\n";
  }
}

SpectralField read_field_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ConfigError("field csv: empty stream");
  std::stringstream hdr(line);
  std::string tag, Ls, ns, reps;
  std::getline(hdr, tag, ',');
  std::getline(hdr, Ls, ',');
  std::getline(hdr, tag, ',');
  std::getline(hdr, ns, ',');
  std::getline(hdr, tag, ',');
  std::getline(hdr, reps, ',');
  Grid g(std::stod(Ls), static_cast<std::size_t>(std::stoul(ns)));
  SpectralField f(g, reps == "spectral" ? Rep::spectral : Rep::physical);
  if (!std::getline(is, line)) throw ConfigError("field csv: missing column header");
  for (std::size_t j = 0; j < g.n; ++j) {
    if (!std::getline(is, line)) throw ConfigError("field csv: truncated");
    std::stringstream row(line);
    std::string idx, coord, re, im;
    std::getline(row, idx, ',');
    std::getline(row, coord, ',');
    std::getline(row, re, ',');
    std::getline(row, im, ',');
    f[j] = cplx(std::stod(re), std::stod(im));
  }
  return f;
}

}  // namespace nlslab

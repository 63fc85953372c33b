#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include "nlslab/params.hpp"

namespace nlslab {

using cplx = std::complex<double>;

// Uniform periodic grid on [-L, L) with n points, n a power of two.
// Physical nodes x_j = -L + j*dx.  Fourier frequencies xi_k = pi*k/L for
// k in [-n/2, n/2-1]; the unpaired Nyquist index k = -n/2 is expected to
// stay (numerically) empty for all fields we evolve.
struct Grid {
  double L = 0.0;
  std::size_t n = 0;

  Grid() = default;
  Grid(double half_length, std::size_t points);

  double dx() const { return 2.0 * L / static_cast<double>(n); }
  double x(std::size_t j) const { return -L + dx() * static_cast<double>(j); }
  // Signed frequency index for storage slot j.
  long k_of(std::size_t j) const {
    return j < n / 2 ? static_cast<long>(j)
                     : static_cast<long>(j) - static_cast<long>(n);
  }
  double xi(std::size_t j) const {
    return M_PI * static_cast<double>(k_of(j)) / L;
  }
  double xi_nyquist() const { return M_PI * static_cast<double>(n / 2) / L; }
  // Storage slot of signed index k (k in [-n/2, n/2-1]).
  std::size_t slot(long k) const {
    return static_cast<std::size_t>(k >= 0 ? k : k + static_cast<long>(n));
  }

  bool operator==(const Grid& o) const { return L == o.L && n == o.n; }
};

enum class Rep { physical, spectral };

// A complex field together with its grid and current representation.
// Spectral data are unitary-DFT coefficients c_k with respect to
// exp(i xi_k x) on [-L, L): sum_j |f_j|^2 == sum_k |c_k|^2.
class SpectralField {
 public:
  SpectralField() = default;
  SpectralField(Grid g, Rep r) : grid_(g), rep_(r), v_(g.n, cplx(0.0)) {}

  static SpectralField from_physical(Grid g, std::function<cplx(double)> f);
  // hat(xi) here and below means dx*sqrt(n)*c_k, i.e. the trapezoid
  // approximation of the integral transform of f against exp(-i xi x).
  static SpectralField from_hat(Grid g, std::function<cplx(double)> fhat);

  const Grid& grid() const { return grid_; }
  Rep rep() const { return rep_; }
  std::size_t size() const { return grid_.n; }
  cplx& operator[](std::size_t j) { return v_[j]; }
  const cplx& operator[](std::size_t j) const { return v_[j]; }
  const std::vector<cplx>& data() const { return v_; }
  std::vector<cplx>& data() { return v_; }

  SpectralField to_spectral() const;
  SpectralField to_physical() const;

  // Integral-normalized coefficient at storage slot j (spectral rep only).
  cplx hat(std::size_t j) const;
  void set_hat(std::size_t j, cplx value);

  double l2() const;      // sqrt(dx * sum |.|^2), valid in either rep
  double linf() const;    // physical rep only
  // Fraction of the l2 mass carried by |xi| >= frac * xi_nyquist.
  double high_band_fraction(double frac = 0.9) const;

 private:
  Grid grid_;
  Rep rep_ = Rep::physical;
  std::vector<cplx> v_;
};

// In-place unitary radix-2 transforms used by SpectralField; exposed for
// tests.  forward maps physical samples to coefficients c_k (storage order),
// inverse is its adjoint.
void fft_forward(const Grid& g, std::vector<cplx>& v);
void fft_inverse(const Grid& g, std::vector<cplx>& v);

// CSV snapshot of a field (RFC 4180, '.' decimal separator, LF endings).
// Columns: index, coordinate (x or xi by representation), re, im.
void write_field_csv(std::ostream& os, const SpectralField& f);
SpectralField read_field_csv(std::istream& is);

}  // namespace nlslab

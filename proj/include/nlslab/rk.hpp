#pragma once

#include <algorithm>
#include <cmath>
#include <functional>

#include "nlslab/params.hpp"

namespace nlslab {

// Dormand-Prince 5(4) embedded pair with step-size control.  Vec is any
// Eigen-style vector type (supports +, scalar *, cwiseAbs, size()).
// Integrates y' = rhs(t, y) from t0 to t1 (either direction).

struct OdeStats {
  long steps = 0;
  long rejected = 0;
};

template <class Vec, class Rhs>
Vec dopri5(Rhs&& rhs, Vec y, double t0, double t1, double rtol, double atol,
           double max_step = 0.0, OdeStats* stats = nullptr) {
  if (t1 == t0) return y;
  const double dir = t1 > t0 ? 1.0 : -1.0;
  const double span = std::abs(t1 - t0);
  double h = std::min(span, max_step > 0.0 ? max_step : span) * 0.1;
  h = std::max(h, span * 1e-12);
  double t = t0;
  long steps = 0, rejected = 0;

  static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5,
                          c5 = 8.0 / 9;
  static constexpr double a21 = 1.0 / 5;
  static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
  static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
  static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187,
                          a53 = 64448.0 / 6561, a54 = -212.0 / 729;
  static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33,
                          a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                          a65 = -5103.0 / 18656;
  static constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                          b5 = -2187.0 / 6784, b6 = 11.0 / 84;
  static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695,
                          e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                          e6 = 22.0 / 525, e7 = -1.0 / 40;

  Vec k1 = rhs(t, y);
  while (dir * (t1 - t) > 0.0) {
    h = std::min(h, std::abs(t1 - t));
    if (max_step > 0.0) h = std::min(h, max_step);
    const double hd = dir * h;

    Vec y2 = y + hd * a21 * k1;
    Vec k2 = rhs(t + c2 * hd, y2);
    Vec y3 = y + hd * (a31 * k1 + a32 * k2);
    Vec k3 = rhs(t + c3 * hd, y3);
    Vec y4 = y + hd * (a41 * k1 + a42 * k2 + a43 * k3);
    Vec k4 = rhs(t + c4 * hd, y4);
    Vec y5 = y + hd * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    Vec k5 = rhs(t + c5 * hd, y5);
    Vec y6 = y + hd * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    Vec k6 = rhs(t + hd, y6);
    Vec ynew = y + hd * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    Vec k7 = rhs(t + hd, ynew);
    Vec errv = hd * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double err = 0.0;
    for (long i = 0; i < static_cast<long>(y.size()); ++i) {
      const double sc =
          atol + rtol * std::max(std::abs(y[i]), std::abs(ynew[i]));
      const double q = std::abs(errv[i]) / sc;
      err = std::max(err, q);
    }
    if (err <= 1.0) {
      t += hd;
      y = ynew;
      k1 = k7;  // FSAL
      ++steps;
      if (steps > 200000000L)
        throw NumericalFailure("dopri5: step budget exhausted");
    } else {
      ++rejected;
      if (rejected > 100000000L)
        throw NumericalFailure("dopri5: too many rejected steps");
    }
    double fac = 0.9 * std::pow(std::max(err, 1e-10), -0.2);
    fac = std::clamp(fac, 0.2, 5.0);
    h *= fac;
    if (!(h > 0.0) || h < span * 1e-14)
      throw NumericalFailure("dopri5: step size underflow");
  }
  if (stats) {
    stats->steps += steps;
    stats->rejected += rejected;
  }
  return y;
}

// Classical fixed-step RK4; used by oracles and frame transport.
template <class Vec, class Rhs>
Vec rk4_step(Rhs&& rhs, const Vec& y, double t, double h) {
  Vec k1 = rhs(t, y);
  Vec k2 = rhs(t + 0.5 * h, Vec(y + 0.5 * h * k1));
  Vec k3 = rhs(t + 0.5 * h, Vec(y + 0.5 * h * k2));
  Vec k4 = rhs(t + h, Vec(y + h * k3));
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Adaptive Simpson quadrature.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double tol);

inline double simpson_recurse(const std::function<double(double)>& f, double a,
                              double b, double fa, double fm, double fb,
                              double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0) throw NumericalFailure("adaptive_simpson: max depth reached");
  if (std::abs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson_recurse(f, a, m, fa, flm, fm, left, tol * 0.5, depth - 1) +
         simpson_recurse(f, m, b, fm, frm, fb, right, tol * 0.5, depth - 1);
}

inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double tol) {
  if (a == b) return 0.0;
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_recurse(f, a, b, fa, fm, fb, whole, tol, 60);
}

}  // namespace nlslab

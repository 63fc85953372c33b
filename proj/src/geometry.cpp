#include "nlslab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace nlslab {

namespace {

Mat3 skew(const Vec3& w) {
  Mat3 S;
  S << 0.0, -w.z(), w.y(),
       w.z(), 0.0, -w.x(),
       -w.y(), w.x(), 0.0;
  return S;
}

// Catmull-Rom through four equispaced values, u in [0, 1] between f1 and f2.
double catmull(double f0, double f1, double f2, double f3, double u) {
  const double a = -0.5 * f0 + 1.5 * f1 - 1.5 * f2 + 0.5 * f3;
  const double b = f0 - 2.5 * f1 + 2.0 * f2 - 0.5 * f3;
  const double c = -0.5 * f0 + 0.5 * f2;
  return ((a * u + b) * u + c) * u + f1;
}

// Index access with cubic extrapolation past the ends, so boundary cells
// keep full interpolation order.
template <class F>
double ghosted(const F& f, long i, long nmax) {
  if (i >= 0 && i <= nmax) return f(i);
  if (i < 0) return 4.0 * f(0) - 6.0 * f(1) + 4.0 * f(2) - f(3);
  return 4.0 * f(nmax) - 6.0 * f(nmax - 1) + 4.0 * f(nmax - 2) - f(nmax - 3);
}

constexpr double kGauss1 = 0.5 - 0.28867513459481287;  // 1/2 - sqrt(3)/6
constexpr double kGauss2 = 0.5 + 0.28867513459481287;
constexpr double kCf4A1 = (3.0 - 2.0 * 1.7320508075688772) / 12.0;
constexpr double kCf4A2 = (3.0 + 2.0 * 1.7320508075688772) / 12.0;

using ScalarFn = std::function<double(double)>;

// One fourth-order commutator-free step for R' = R K(x), K with body axis
// vector (tau, 0, c).
void cf4_step(Mat3& R, double x, double h, const ScalarFn& c,
              const ScalarFn& tau) {
  const double x1 = x + kGauss1 * h, x2 = x + kGauss2 * h;
  const Vec3 w1(tau(x1), 0.0, c(x1));
  const Vec3 w2(tau(x2), 0.0, c(x2));
  R = R * rot_exp(h * (kCf4A2 * w1 + kCf4A1 * w2)) *
      rot_exp(h * (kCf4A1 * w1 + kCf4A2 * w2));
}

// Advance frame and position across [x, x+h]; Simpson in x for chi using
// tangents at the cell start, midpoint and end of each substep.
void advance_cell(Mat3& R, Vec3& chi, double x, double h, const ScalarFn& c,
                  const ScalarFn& tau) {
  double w = 0.0;
  for (double xs : {x, x + 0.5 * h, x + h})
    w = std::max(w, std::hypot(c(xs), tau(xs)));
  const int ns = std::max(1, static_cast<int>(std::ceil(std::abs(h) * w / 0.35)));
  const double hs = h / ns;
  for (int i = 0; i < ns; ++i) {
    const double xs = x + i * hs;
    const Vec3 t0 = R.col(0);
    cf4_step(R, xs, 0.5 * hs, c, tau);
    const Vec3 tm = R.col(0);
    cf4_step(R, xs + 0.5 * hs, 0.5 * hs, c, tau);
    chi += (hs / 6.0) * (t0 + 4.0 * tm + R.col(0));
  }
}

struct MarchResult {
  std::vector<Mat3> R;
  std::vector<Vec3> chi;
};

// Frames/positions at x0 + k*h for k = 0..steps (h may be negative).
MarchResult march(Mat3 R, Vec3 chi, double x0, double h, std::size_t steps,
                  const ScalarFn& c, const ScalarFn& tau) {
  MarchResult out;
  out.R.reserve(steps + 1);
  out.chi.reserve(steps + 1);
  out.R.push_back(R);
  out.chi.push_back(chi);
  for (std::size_t k = 0; k < steps; ++k) {
    advance_cell(R, chi, x0 + static_cast<double>(k) * h, h, c, tau);
    if ((k & 63u) == 63u) orthonormalize(R);
    out.R.push_back(R);
    out.chi.push_back(chi);
  }
  return out;
}

Curve assemble_curve(const std::vector<double>& xs,
                     const MarchResult& neg, const MarchResult& pos) {
  // neg holds nodes 0..j0 in descending x (neg.R[i] at xs[j0 - i]),
  // pos holds nodes j0..end in ascending x.
  Curve cv;
  const std::size_t j0 = neg.R.size() - 1;
  cv.x = xs;
  const std::size_t n = xs.size();
  cv.chi.resize(n);
  cv.T.resize(n);
  cv.N.resize(n);
  cv.B.resize(n);
  auto put = [&](std::size_t j, const Mat3& R, const Vec3& p) {
    cv.chi[j] = p;
    cv.T[j] = R.col(0);
    cv.N[j] = R.col(1);
    cv.B[j] = R.col(2);
  };
  for (std::size_t i = 0; i < neg.R.size(); ++i) put(j0 - i, neg.R[i], neg.chi[i]);
  for (std::size_t i = 0; i < pos.R.size(); ++i) put(j0 + i, pos.R[i], pos.chi[i]);
  return cv;
}

}  // namespace

Mat3 rot_exp(const Vec3& w) {
  const double th = w.norm();
  const Mat3 S = skew(w);
  if (th < 1e-8) {
    // series through second order keeps orthogonality to machine accuracy
    return Mat3::Identity() + S + 0.5 * (S * S);
  }
  const double s = std::sin(th) / th;
  const double c = (1.0 - std::cos(th)) / (th * th);
  return Mat3::Identity() + s * S + c * (S * S);
}

void orthonormalize(Mat3& R) {
  Vec3 t = R.col(0).normalized();
  Vec3 n = R.col(1) - t.dot(R.col(1)) * t;
  n.normalize();
  Vec3 b = t.cross(n);
  R.col(0) = t;
  R.col(1) = n;
  R.col(2) = b;
}

Curve frenet_integrate_fn(const ScalarFn& c, const ScalarFn& tau,
                          double X_max, double h, const Frame& init,
                          const Vec3& chi0) {
  if (!(h > 0.0) || !(X_max > 0.0))
    throw ConfigError("frenet_integrate_fn: need positive h and X_max");
  const std::size_t K = static_cast<std::size_t>(std::llround(X_max / h));
  if (K == 0) throw ConfigError("frenet_integrate_fn: X_max < h");
  std::vector<double> xs(2 * K + 1);
  for (std::size_t j = 0; j < xs.size(); ++j)
    xs[j] = (static_cast<double>(j) - static_cast<double>(K)) * h;
  MarchResult pos = march(init.R, chi0, 0.0, h, K, c, tau);
  MarchResult neg = march(init.R, chi0, 0.0, -h, K, c, tau);
  return assemble_curve(xs, neg, pos);
}

Curve frenet_integrate(const CurvatureTorsion& ct, const Frame& init,
                       const Vec3& chi0) {
  const Grid& g = ct.grid;
  for (std::size_t j = 0; j < g.n; ++j)
    if (!ct.tau_valid[j])
      throw GuardRefusal("frenet_integrate: torsion undefined at a node");
  const double dx = g.dx();
  auto sample = [&](const std::vector<double>& f, double xq) {
    const double s = (xq + g.L) / dx;
    double jf = std::floor(s);
    double u = s - jf;
    long j = static_cast<long>(jf);
    const long nmax = static_cast<long>(g.n) - 1;
    auto raw = [&](long i) { return f[static_cast<std::size_t>(i)]; };
    auto at = [&](long i) { return ghosted(raw, i, nmax); };
    return catmull(at(j - 1), at(j), at(j + 1), at(j + 2), u);
  };
  ScalarFn cf = [&](double xq) { return sample(ct.c, xq); };
  ScalarFn tf = [&](double xq) { return sample(ct.tau, xq); };
  std::vector<double> xs(g.n);
  for (std::size_t j = 0; j < g.n; ++j) xs[j] = g.x(j);
  const std::size_t j0 = g.n / 2;
  MarchResult pos = march(init.R, chi0, 0.0, dx, g.n - 1 - j0, cf, tf);
  MarchResult neg = march(init.R, chi0, 0.0, -dx, j0, cf, tf);
  return assemble_curve(xs, neg, pos);
}

Curve selfsimilar_profile(double a, double X_max, double h) {
  if (!(a > 0.0)) throw ConfigError("selfsimilar_profile: a must be > 0");
  Frame init;
  return frenet_integrate_fn([a](double) { return a; },
                             [](double x) { return 0.5 * x; }, X_max, h, init,
                             Vec3(0.0, 0.0, 2.0 * a));
}

TangentLimits tangent_limits(const Curve& curve) {
  if (curve.size() < 16) throw ConfigError("tangent_limits: curve too short");
  const double X = std::min(std::abs(curve.x.front()), curve.x.back());
  const double lo = X / 10.0;
  auto side_mean = [&](bool positive, double wlo, double whi) {
    Vec3 acc = Vec3::Zero();
    std::size_t cnt = 0;
    for (std::size_t j = 0; j < curve.size(); ++j) {
      const double xv = positive ? curve.x[j] : -curve.x[j];
      if (xv >= wlo && xv <= whi) {
        acc += curve.T[j];
        ++cnt;
      }
    }
    if (cnt == 0) throw NumericalFailure("tangent_limits: empty averaging block");
    return Vec3(acc / static_cast<double>(cnt));
  };
  TangentLimits out;
  double wobble = 0.0;
  for (int side = 0; side < 2; ++side) {
    const bool positive = (side == 0);
    Vec3 m = side_mean(positive, lo, X);
    Vec3 dir = m.normalized();
    for (int blk = 0; blk < 4; ++blk) {
      const double bl = lo + (X - lo) * blk / 4.0;
      const double bh = lo + (X - lo) * (blk + 1) / 4.0;
      Vec3 bm = side_mean(positive, bl, bh).normalized();
      wobble = std::max(wobble, (bm - dir).norm());
    }
    if (positive)
      out.A_plus = dir;
    else
      out.A_minus = dir;
  }
  out.wobble = wobble;
  double cth = out.A_plus.dot(-out.A_minus);
  cth = std::clamp(cth, -1.0, 1.0);
  out.theta = std::acos(cth);
  out.sin_half_theta = std::sqrt(std::max(0.0, 0.5 * (1.0 - cth)));
  return out;
}

namespace {

// Values at x = 0 needed to carry the frame in time.
struct AxisData {
  double c0 = 0.0, cx0 = 0.0, tau0 = 0.0, gamma0 = 0.0;
};

AxisData axis_data(const CurvatureTorsion& ct) {
  const Grid& g = ct.grid;
  if (g.n < 8) throw ConfigError("binormal_reconstruct: grid too small");
  const std::size_t j0 = g.n / 2;
  const double dx = g.dx();
  auto cv = [&](long d) { return ct.c[j0 + d]; };
  AxisData ad;
  ad.c0 = cv(0);
  ad.cx0 = (-cv(2) + 8.0 * cv(1) - 8.0 * cv(-1) + cv(-2)) / (12.0 * dx);
  const double cxx =
      (-cv(2) + 16.0 * cv(1) - 30.0 * cv(0) + 16.0 * cv(-1) - cv(-2)) /
      (12.0 * dx * dx);
  if (!(ad.c0 > 0.0))
    throw GuardRefusal("binormal_reconstruct: vanishing amplitude at x = 0");
  ad.tau0 = ct.tau[j0];
  ad.gamma0 = cxx / ad.c0 - ad.tau0 * ad.tau0;
  return ad;
}

// Clamped Catmull-Rom in lambda = ln t through the per-snapshot axis values.
struct AxisSpline {
  std::vector<double> lam;  // decreasing
  std::vector<AxisData> val;
  AxisData eval(double q) const {
    const long m = static_cast<long>(lam.size());
    long k = 0;
    while (k + 2 < m && q < lam[k + 1]) ++k;  // q in [lam[k+1], lam[k]]
    const double u = (lam[k] - q) / (lam[k] - lam[k + 1]);
    auto comp = [&](double AxisData::*fld) {
      auto raw = [&](long i) { return val[static_cast<std::size_t>(i)].*fld; };
      auto at = [&](long i) { return ghosted(raw, i, m - 1); };
      return catmull(at(k - 1), at(k), at(k + 1), at(k + 2), u);
    };
    AxisData out;
    out.c0 = comp(&AxisData::c0);
    out.cx0 = comp(&AxisData::cx0);
    out.tau0 = comp(&AxisData::tau0);
    out.gamma0 = comp(&AxisData::gamma0);
    return out;
  }
};

}  // namespace

Reconstruction binormal_reconstruct(const std::vector<SpectralField>& psis,
                                    const std::vector<double>& times,
                                    const Params& prm,
                                    const ReconstructOpts& opts) {
  prm.validate();
  const std::size_t m = times.size();
  if (m < 4 || psis.size() != m)
    throw ConfigError("binormal_reconstruct: need >= 4 matching snapshots");
  for (std::size_t k = 0; k + 1 < m; ++k)
    if (!(times[k] > times[k + 1]) || !(times[k + 1] > 0.0))
      throw ConfigError("binormal_reconstruct: times must decrease and stay > 0");
  const Grid& g = psis[0].grid();
  for (const auto& p : psis)
    if (p.grid().n != g.n || p.grid().L != g.L)
      throw ConfigError("binormal_reconstruct: snapshots must share one grid");

  std::vector<CurvatureTorsion> cts;
  cts.reserve(m);
  AxisSpline sp;
  for (std::size_t k = 0; k < m; ++k) {
    cts.push_back(
        inverse_hasimoto(psis[k], DerivMethod::phase_fd, opts.amp_threshold));
    sp.lam.push_back(std::log(times[k]));
    sp.val.push_back(axis_data(cts[k]));
  }

  Reconstruction rec;
  rec.times = times;
  const double win =
      opts.tau_window > 0.0 ? opts.tau_window : 0.5 * g.L;

  // Carry frame and position at x = 0 down in time.  In s = sqrt(t) the
  // frame obeys R' = 2 s R S(w) with body axis w = (gamma, -c_x, -c tau)
  // and the position moves with 2 s c B.
  Mat3 R = opts.init.R;
  Vec3 p = opts.chi_init;
  std::vector<Mat3> frames(m);
  std::vector<Vec3> anchors(m);
  frames[0] = R;
  anchors[0] = p;
  auto rhs = [&](double s, const Mat3& Rc, const Vec3&, Mat3& dR, Vec3& dp) {
    const AxisData ad = sp.eval(2.0 * std::log(s));
    const Vec3 w(ad.gamma0, -ad.cx0, -ad.c0 * ad.tau0);
    dR = 2.0 * s * (Rc * skew(w));
    dp = 2.0 * s * ad.c0 * Rc.col(2);
  };
  for (std::size_t k = 0; k + 1 < m; ++k) {
    const double s0 = std::sqrt(times[k]), s1 = std::sqrt(times[k + 1]);
    const int ns = std::max(1, opts.substeps);
    const double h = (s1 - s0) / ns;
    for (int i = 0; i < ns; ++i) {
      const double s = s0 + i * h;
      Mat3 k1R, k2R, k3R, k4R;
      Vec3 k1p, k2p, k3p, k4p;
      rhs(s, R, p, k1R, k1p);
      rhs(s + 0.5 * h, R + 0.5 * h * k1R, p + 0.5 * h * k1p, k2R, k2p);
      rhs(s + 0.5 * h, R + 0.5 * h * k2R, p + 0.5 * h * k2p, k3R, k3p);
      rhs(s + h, R + h * k3R, p + h * k3p, k4R, k4p);
      R += (h / 6.0) * (k1R + 2.0 * k2R + 2.0 * k3R + k4R);
      p += (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    }
    orthonormalize(R);
    frames[k + 1] = R;
    anchors[k + 1] = p;
  }

  for (std::size_t k = 0; k < m; ++k) {
    Frame fr;
    fr.R = frames[k];
    rec.curves.push_back(frenet_integrate(cts[k], fr, anchors[k]));
    const double rt = std::sqrt(times[k]);
    double cd = 0.0, td = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) {
      cd = std::max(cd, std::abs(cts[k].c[j] - prm.a / rt));
      const double xj = g.x(j);
      if (std::abs(xj) <= win)
        td = std::max(td, std::abs(cts[k].tau[j] - xj / (2.0 * times[k])));
    }
    rec.c_dev.push_back(cd);
    rec.tau_dev.push_back(td);
  }

  // Small-time trace: chi0 = chi(t_first) - integral of c B dt over the
  // covered times, trapezoid in sqrt(t) across the snapshot ladder.
  rec.chi0 = rec.curves[0].chi;
  for (std::size_t k = 0; k + 1 < m; ++k) {
    const double s0 = std::sqrt(times[k]), s1 = std::sqrt(times[k + 1]);
    const double wgt = 0.5 * (s0 - s1);
    for (std::size_t j = 0; j < g.n; ++j) {
      const Vec3 gk = 2.0 * s0 * cts[k].c[j] * rec.curves[k].B[j];
      const Vec3 gk1 = 2.0 * s1 * cts[k + 1].c[j] * rec.curves[k + 1].B[j];
      rec.chi0[j] -= wgt * (gk + gk1);
    }
  }
  return rec;
}

std::vector<double> chi_trace_distance(const Reconstruction& rec) {
  std::vector<double> out;
  out.reserve(rec.curves.size());
  for (const auto& cv : rec.curves) {
    double d = 0.0;
    for (std::size_t j = 0; j < cv.size(); ++j)
      d = std::max(d, (cv.chi[j] - rec.chi0[j]).norm());
    out.push_back(d);
  }
  return out;
}

}  // namespace nlslab

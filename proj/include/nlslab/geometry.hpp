#pragma once
// Space curves from (curvature, torsion) data: Frenet frame integration,
// the self-similar corner profile, and reconstruction of a curve family
// from amplitude/phase snapshots together with its small-time trace.

#include <Eigen/Dense>
#include <functional>
#include <vector>

#include "nlslab/params.hpp"
#include "nlslab/transforms.hpp"

namespace nlslab {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

// Orthonormal frame stored as a 3x3 rotation, columns (T, N, B).
struct Frame {
  Mat3 R = Mat3::Identity();
  Vec3 T() const { return R.col(0); }
  Vec3 N() const { return R.col(1); }
  Vec3 B() const { return R.col(2); }
};

// Rotation exp of the skew matrix with axis vector w (Rodrigues).
Mat3 rot_exp(const Vec3& w);

// Re-orthonormalize a nearly orthogonal frame (modified Gram-Schmidt).
void orthonormalize(Mat3& R);

// Arclength-parametrized curve sampled on nodes x[j].
struct Curve {
  std::vector<double> x;
  std::vector<Vec3> chi;
  std::vector<Vec3> T, N, B;
  std::size_t size() const { return x.size(); }
};

// Integrate the frame system T' = cN, N' = -cT + tauB, B' = -tauN together
// with chi' = T from x = 0 outward in both directions, with coefficients
// given as callables.  Nodes are x = k*h for |k| <= round(X_max/h), and the
// initial frame/position applies at x = 0.  Fourth-order commutator-free
// Magnus steps with adaptive substepping.
Curve frenet_integrate_fn(const std::function<double(double)>& c,
                          const std::function<double(double)>& tau,
                          double X_max, double h,
                          const Frame& init = Frame{},
                          const Vec3& chi0 = Vec3::Zero());

// Same, with (c, tau) sampled on a periodic grid (cubic interpolation
// between nodes).  The curve nodes coincide with the grid nodes; x = 0 is
// slot n/2 and carries the initial data.  All torsion samples must be valid.
Curve frenet_integrate(const CurvatureTorsion& ct,
                       const Frame& init = Frame{},
                       const Vec3& chi0 = Vec3::Zero());

// Profile with c = a, tau = x/2 on |x| <= X_max, canonical initial data
// (identity frame, chi(0) = (0, 0, 2a)).
Curve selfsimilar_profile(double a, double X_max, double h);

struct TangentLimits {
  Vec3 A_plus, A_minus;   // averaged unit tangents toward +/- infinity
  double theta;           // angle between A_plus and -A_minus
  double sin_half_theta;
  double wobble;          // max block deviation from the window mean
};

// Tangent limits by averaging T over the outer window [X/10, X] on each
// side (the oscillatory part of T averages out; wobble reports how far
// quarter-block means stray from the window mean).
TangentLimits tangent_limits(const Curve& curve);

// Curve family chi(t_k, x) reconstructed from profile snapshots psi(t_k, .)
// on one common grid, plus its trace as t -> 0.
struct Reconstruction {
  std::vector<double> times;    // strictly decreasing, times[0] is the anchor
  std::vector<Curve> curves;    // one per time, common nodes
  std::vector<Vec3> chi0;       // limit trace on the same nodes
  std::vector<double> c_dev;    // sup_x |c - a/sqrt(t)| per snapshot
  std::vector<double> tau_dev;  // windowed sup_x |tau - x/2t| per snapshot
};

struct ReconstructOpts {
  double tau_window = 0.0;   // half-width for tau_dev; 0 = 0.5 * grid half-length
  int substeps = 16;         // time substeps between consecutive snapshots
  double amp_threshold = 1e-8;
  Frame init{};              // frame at (times[0], x = 0)
  Vec3 chi_init{0.0, 0.0, 0.0};  // position there; callers often use (0,0,2a)
};

// From snapshots at decreasing times: recover (c, tau) per snapshot, carry
// the frame and position at x = 0 down in time through the induced ODE
// (integrated in sqrt(t)), integrate each snapshot's Frenet system in x,
// and accumulate the t -> 0 position trace by quadrature of the normal
// velocity, truncated at times.back().
Reconstruction binormal_reconstruct(const std::vector<SpectralField>& psis,
                                    const std::vector<double>& times,
                                    const Params& prm,
                                    const ReconstructOpts& opts = {});

// Sup-node distances max_j |chi(t_k, x_j) - chi0(x_j)|, one per snapshot.
std::vector<double> chi_trace_distance(const Reconstruction& rec);

}  // namespace nlslab

#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace nlslab {

// Configuration or domain-precondition violation: bad inputs, bad grids,
// out-of-range parameters.  Distinct from NumericalFailure so callers can
// map them to different exit codes.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// A smallness / stability guard declined to run the requested computation.
struct GuardRefusal : std::runtime_error {
  explicit GuardRefusal(const std::string& what) : std::runtime_error(what) {}
};

// An integration, quadrature, or fixed-point loop failed to converge or
// blew up mid-run.
struct NumericalFailure : std::runtime_error {
  explicit NumericalFailure(const std::string& what) : std::runtime_error(what) {}
};

// Sign of the cubic term: +1 focusing, -1 defocusing.
enum class Sign : int { focusing = +1, defocusing = -1 };

inline double sgn(Sign s) { return s == Sign::focusing ? 1.0 : -1.0; }

struct Params {
  double a = 1.0;        // background amplitude, a >= 0
  Sign sign = Sign::focusing;
  double gamma = 0.0;    // low-frequency weight exponent, 0 <= gamma
  double delta = 0.05;   // auxiliary exponent, 0 < delta
  double t0 = 1.0;       // reference time, >= 1

  void validate() const {
    if (!(a >= 0.0) || !std::isfinite(a))
      throw ConfigError("params: a must be finite and >= 0");
    if (!(gamma >= 0.0)) throw ConfigError("params: gamma must be >= 0");
    if (!(delta > 0.0)) throw ConfigError("params: delta must be > 0");
    if (!(gamma + delta < 0.25))
      throw ConfigError("params: gamma + delta must be < 1/4");
    if (!(t0 >= 1.0)) throw ConfigError("params: t0 must be >= 1");
  }
};

}  // namespace nlslab

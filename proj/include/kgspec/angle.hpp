#ifndef KGSPEC_ANGLE_HPP
#define KGSPEC_ANGLE_HPP

#include <cmath>
#include <complex>
#include <numbers>

namespace kgspec {

inline constexpr double two_pi = 2.0 * std::numbers::pi;

/// Reduce an angle into [0, 2pi).
inline double wrap_angle(double theta) {
  double r = std::fmod(theta, two_pi);
  if (r < 0.0) r += two_pi;
  // fmod of a value just below a multiple of 2pi can round up to 2pi
  if (r >= two_pi) r = 0.0;
  return r;
}

/// Principal complex arccos. Both +w and -w (mod 2pi) solve cos(w) = z.
inline std::complex<double> principal_acos(std::complex<double> z) { return std::acos(z); }

}  // namespace kgspec

#endif  // KGSPEC_ANGLE_HPP

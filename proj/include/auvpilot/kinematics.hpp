#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "auvpilot/types.hpp"

namespace auvpilot {

inline constexpr double kPi = std::numbers::pi;

/// Euler-rate map is undefined near theta = +-pi/2; guard on |cos(theta)|.
inline constexpr double kAttitudeSingularityGuard = 1e-6;

/// Thrown when the Euler-rate map is evaluated too close to gimbal lock.
class GimbalLockError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Wrap an angle to (-pi, pi].
inline double wrap_angle(double a) {
  double r = std::fmod(a + kPi, 2.0 * kPi);
  if (r <= 0.0) r += 2.0 * kPi;
  return r - kPi;
}

/// Wrap the attitude entries of a pose to (-pi, pi]; positions untouched.
inline Vec6 wrap_angles(Vec6 eta) {
  for (int i = 3; i < 6; ++i) eta[i] = wrap_angle(eta[i]);
  return eta;
}

/// Body-to-earth rotation of linear velocity: Rz(psi) * Ry(theta) * Rx(phi).
inline Mat3 attitude_rotation(const Vec6& eta) {
  const double cphi = std::cos(eta[3]), sphi = std::sin(eta[3]);
  const double cth = std::cos(eta[4]), sth = std::sin(eta[4]);
  const double cpsi = std::cos(eta[5]), spsi = std::sin(eta[5]);
  Mat3 r;
  // clang-format off
  r << cpsi * cth, -spsi * cphi + cpsi * sth * sphi,  spsi * sphi + cpsi * cphi * sth,
       spsi * cth,  cpsi * cphi + sphi * sth * spsi, -cpsi * sphi + sth * spsi * cphi,
             -sth,                       cth * sphi,                       cth * cphi;
  // clang-format on
  return r;
}

/// Body angular rate to Euler angle rates. Throws GimbalLockError when
/// |cos(theta)| < kAttitudeSingularityGuard.
inline Mat3 euler_rate_map(const Vec6& eta) {
  const double cphi = std::cos(eta[3]), sphi = std::sin(eta[3]);
  const double cth = std::cos(eta[4]), sth = std::sin(eta[4]);
  if (std::abs(cth) < kAttitudeSingularityGuard) {
    throw GimbalLockError("euler_rate_map: attitude within singularity guard of theta = +-pi/2");
  }
  const double tth = sth / cth;
  Mat3 t;
  // clang-format off
  t << 1.0, sphi * tth, cphi * tth,
       0.0,       cphi,      -sphi,
       0.0, sphi / cth, cphi / cth;
  // clang-format on
  return t;
}

/// Block-diagonal 6x6 kinematic transform: eta_dot = transform(eta) * nu.
inline Mat6 transform(const Vec6& eta) {
  Mat6 j = Mat6::Zero();
  j.topLeftCorner<3, 3>() = attitude_rotation(eta);
  j.bottomRightCorner<3, 3>() = euler_rate_map(eta);
  return j;
}

/// Velocity relative to the fluid for a body-fixed current [u_c v_c w_c].
/// Rotational components are unaffected by an irrotational current.
inline Vec6 relative_velocity(const Vec6& nu, const Vec3& current) {
  Vec6 r = nu;
  r.head<3>() -= current;
  return r;
}

}  // namespace auvpilot

#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "auvpilot/csv.hpp"
#include "auvpilot/kinematics.hpp"
#include "auvpilot/types.hpp"

namespace auvpilot {

/// Thrown when the line-of-sight angles toward a waypoint are undefined
/// because the horizontal and vertical displacements both vanish.
class CoincidentWaypointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct WaypointPlan {
  std::vector<Waypoint> waypoints;
  double acceptance_radius_m = 2.0;

  void validate() const {
    if (waypoints.empty()) throw std::invalid_argument("WaypointPlan: no waypoints");
    if (!(acceptance_radius_m > 0.0)) {
      throw std::invalid_argument("WaypointPlan: acceptance radius must be positive");
    }
  }
};

struct LosAngles {
  double theta_d = 0.0;  ///< pitch reference
  double psi_d = 0.0;    ///< heading reference
};

/// Line-of-sight references toward a waypoint: the heading points along the
/// horizontal displacement, the pitch along the vertical displacement over
/// the surge displacement (z down, so a deeper waypoint pitches positive).
inline LosAngles los_angles(const Vec6& eta, const Waypoint& wp) {
  const double dx = wp.x - eta[0];
  const double dy = wp.y - eta[1];
  const double dz = wp.z - eta[2];
  if ((std::abs(dy) < 1e-9 && std::abs(dx) < 1e-9) ||
      (std::abs(dz) < 1e-9 && std::abs(dx) < 1e-9)) {
    throw CoincidentWaypointError("los_angles: waypoint coincides with vehicle position");
  }
  return {std::atan2(dz, dx), std::atan2(dy, dx)};
}

/// Sphere-of-acceptance test, boundary inclusive.
inline bool within_acceptance(const Vec6& eta, const Waypoint& wp, double radius) {
  const double dx = wp.x - eta[0];
  const double dy = wp.y - eta[1];
  const double dz = wp.z - eta[2];
  return dx * dx + dy * dy + dz * dz <= radius * radius;
}

/// Distance from the vehicle position to the infinite line through two
/// waypoints; degenerate legs fall back to the distance to the endpoint.
inline double cross_track_error(const Vec6& eta, const Waypoint& from, const Waypoint& to) {
  const Vec3 p(eta[0], eta[1], eta[2]);
  const Vec3 a(from.x, from.y, from.z);
  const Vec3 b(to.x, to.y, to.z);
  const Vec3 ab = b - a;
  const double len2 = ab.squaredNorm();
  if (len2 < 1e-18) return (p - a).norm();
  return ab.cross(p - a).norm() / std::sqrt(len2);
}

/// References handed to the controller each tick.
struct References {
  double u_d = 0.0;
  double psi_d = 0.0;
  double theta_d = 0.0;
  double z_d = 0.0;
  bool mission_complete = false;
  std::size_t target_index = 0;
};

/// Waypoint progression: advances at most one waypoint per tick when the
/// sphere of acceptance is entered, monotonically, and holds the last
/// references with zero speed once the plan is exhausted.
class GuidanceState {
 public:
  References advance(const Vec6& eta, const WaypointPlan& plan) {
    plan.validate();
    if (!complete_ && within_acceptance(eta, plan.waypoints[index_], plan.acceptance_radius_m)) {
      ++index_;
      if (index_ >= plan.waypoints.size()) {
        complete_ = true;
        index_ = plan.waypoints.size() - 1;
        if (!have_refs_) {
          last_ = {0.0, eta[5], eta[4], eta[2], true, index_};
        }
        last_.u_d = 0.0;
        last_.mission_complete = true;
      }
    }
    if (complete_) return last_;
    const Waypoint& wp = plan.waypoints[index_];
    const LosAngles los = los_angles(eta, wp);
    last_ = {wp.u_d, los.psi_d, los.theta_d, wp.z, false, index_};
    have_refs_ = true;
    return last_;
  }

  std::size_t target_index() const { return index_; }
  bool mission_complete() const { return complete_; }

  void reset() {
    index_ = 0;
    complete_ = false;
    have_refs_ = false;
    last_ = References{};
  }

 private:
  std::size_t index_ = 0;
  bool complete_ = false;
  bool have_refs_ = false;
  References last_{};
};

}  // namespace auvpilot

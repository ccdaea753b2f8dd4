#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "auvpilot/kinematics.hpp"
#include "auvpilot/types.hpp"

namespace auvpilot {

/// Thrown when a demanded force exceeds what the propeller can deliver at
/// the revolution-speed limit for that direction.
class ThrustInfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when a demanded wrench has a component in the actuated subspace
/// that the allocation cannot reproduce.
class UnattainableWrenchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Static and dynamic limits of one motor plus its first-order response.
/// Revolution speeds are rpm throughout.
struct MotorModel {
  double n_max_pos = 2000.0;   ///< upper saturation, rpm
  double n_max_neg = -2000.0;  ///< lower saturation, rpm (negative)
  double n_min_pos = 50.0;     ///< smallest sustainable forward speed, rpm
  double n_min_neg = -50.0;    ///< smallest sustainable reverse speed, rpm (negative)
  double n_acc = 800.0;        ///< rate bound while |n| grows, rpm/s
  double n_dec = 800.0;        ///< rate bound while |n| shrinks, rpm/s
  double gain = 1.0;           ///< static gain K_V of the response
  double lag_s = 0.2;          ///< time constant T_1, s
  double dead_time_s = 0.0;    ///< transport delay T_t, s
};

/// Characteristic curve F = p1(sign) |n| n + p2(sign) |n| V_a with n in rpm
/// and V_a the advance velocity along the propeller axis in m/s.
/// p1 carries N/rpm^2, p2 carries N/(rpm m/s); both bundle rho_F and the
/// propeller diameter.
struct PropellerCurve {
  double p1_pos = 2.0e-5;
  double p1_neg = 1.6e-5;
  double p2_pos = -2.0e-3;
  double p2_neg = -1.6e-3;
};

/// Deadband-and-saturation map applied to a demanded revolution speed:
/// demands above the usable band saturate, demands inside the deadband snap
/// outward to the smallest sustainable speed, and zero stays zero.
inline double static_limit(const MotorModel& m, double n_d) {
  if (n_d >= m.n_max_pos) return m.n_max_pos;
  if (n_d > 0.0 && n_d < m.n_min_pos) return m.n_min_pos;
  if (n_d == 0.0) return 0.0;
  if (n_d < 0.0 && n_d > m.n_min_neg) return m.n_min_neg;
  if (n_d <= m.n_max_neg) return m.n_max_neg;
  return n_d;
}

/// Slew limit between consecutive commands: n_acc bounds the step while the
/// magnitude grows, n_dec while it shrinks.
inline double rate_limit(const MotorModel& m, double n_prev, double n_d, double dt) {
  const double rate = (std::abs(n_d) > std::abs(n_prev)) ? m.n_acc : m.n_dec;
  const double bound = rate * dt;
  return n_prev + std::clamp(n_d - n_prev, -bound, bound);
}

/// Discrete first-order lag with transport delay. The pole is the exact
/// zero-order-hold image exp(-dt/T_1); the delay is round(T_t/dt) buffered
/// steps, so the step response is exact at the sampling instants.
class LagState {
 public:
  /// Advances one step of length dt and returns the new output.
  double step(const MotorModel& m, double input, double dt) {
    if (!initialized_ || dt != dt_) init(m, dt);
    double delayed = input;
    if (!buffer_.empty()) {
      delayed = buffer_[head_];
      buffer_[head_] = input;
      head_ = (head_ + 1) % buffer_.size();
    }
    const double pole = std::exp(-dt / m.lag_s);
    output_ = pole * output_ + (1.0 - pole) * m.gain * delayed;
    return output_;
  }

  double output() const { return output_; }

  void reset() {
    initialized_ = false;
    output_ = 0.0;
    buffer_.clear();
    head_ = 0;
  }

 private:
  void init(const MotorModel& m, double dt) {
    const auto steps = static_cast<std::size_t>(std::llround(m.dead_time_s / dt));
    buffer_.assign(steps, 0.0);
    head_ = 0;
    output_ = 0.0;
    dt_ = dt;
    initialized_ = true;
  }

  bool initialized_ = false;
  double output_ = 0.0;
  double dt_ = 0.0;
  std::vector<double> buffer_;
  std::size_t head_ = 0;
};

/// Free-function form of one lag update (see LagState::step).
inline double lag_step(const MotorModel& m, LagState& state, double input, double dt) {
  return state.step(m, input, dt);
}

/// Propeller force from actual revolution speed and advance velocity.
inline double thrust(const PropellerCurve& c, double n, double v_a) {
  const double p1 = n >= 0.0 ? c.p1_pos : c.p1_neg;
  const double p2 = n >= 0.0 ? c.p2_pos : c.p2_neg;
  return p1 * std::abs(n) * n + p2 * std::abs(n) * v_a;
}

/// Revolution speed that produces force f_d at advance velocity v_a; the
/// direction-specific branch of the curve is selected by sign(f_d).
/// Throws ThrustInfeasibleError when |f_d| exceeds the force available at
/// the saturation speed for that direction.
inline double inverse_thrust(const PropellerCurve& c, const MotorModel& m, double f_d,
                             double v_a) {
  if (f_d == 0.0) return 0.0;
  if (f_d > 0.0) {
    const double cap = thrust(c, m.n_max_pos, v_a);
    if (f_d > cap) {
      throw ThrustInfeasibleError("inverse_thrust: demanded force above forward capability");
    }
    // p1 n^2 + p2 v_a n - f_d = 0, positive root.
    const double b = c.p2_pos * v_a;
    return (-b + std::sqrt(b * b + 4.0 * c.p1_pos * f_d)) / (2.0 * c.p1_pos);
  }
  const double cap = thrust(c, m.n_max_neg, v_a);
  if (f_d < cap) {
    throw ThrustInfeasibleError("inverse_thrust: demanded force above reverse capability");
  }
  // With n = -s, s > 0: p1 s^2 - p2 v_a s + f_d = 0, positive root.
  const double b = c.p2_neg * v_a;
  const double s = (b + std::sqrt(b * b - 4.0 * c.p1_neg * f_d)) / (2.0 * c.p1_neg);
  return -s;
}

/// Actuator indices: four stern propellers inclined by alpha (splay from the
/// centre plane) and beta (tilt out of the horizontal plane), plus two
/// vertical tunnel thrusters.
enum ActuatorIndex : int {
  kSternStarboardUpper = 0,
  kSternStarboardLower = 1,
  kSternPortUpper = 2,
  kSternPortLower = 3,
  kVerticalBow = 4,
  kVerticalStern = 5,
};

inline constexpr int kActuatorCount = 6;
inline constexpr int kSternCount = 4;

/// Mounting geometry: common inclination angles for the stern group and a
/// body-frame lever arm per actuator.
struct ActuatorGeometry {
  double alpha_rad = 15.0 * kPi / 180.0;  ///< horizontal splay of the stern props
  double beta_rad = 15.0 * kPi / 180.0;   ///< vertical tilt of the stern props
  std::array<Vec3, kActuatorCount> lever_arm_m{
      Vec3(-1.10, 0.18, -0.12),  // stern starboard upper
      Vec3(-1.10, 0.18, 0.12),   // stern starboard lower
      Vec3(-1.10, -0.18, -0.12), // stern port upper
      Vec3(-1.10, -0.18, 0.12),  // stern port lower
      Vec3(0.85, 0.0, 0.0),      // vertical bow
      Vec3(-0.85, 0.0, 0.0),     // vertical stern
  };
};

/// Unit force directions in the body frame. The stern props share a common
/// surge component; starboard and port mirror in sway, upper and lower
/// mirror in heave. Vertical thrusters push along +z (down).
inline std::array<Vec3, kActuatorCount> force_directions(const ActuatorGeometry& g) {
  const double ca = std::cos(g.alpha_rad), sa = std::sin(g.alpha_rad);
  const double cb = std::cos(g.beta_rad), sb = std::sin(g.beta_rad);
  return {
      Vec3(cb * ca, cb * sa, -sb),  // starboard upper
      Vec3(cb * ca, cb * sa, sb),   // starboard lower
      Vec3(cb * ca, -cb * sa, -sb), // port upper
      Vec3(cb * ca, -cb * sa, sb),  // port lower
      Vec3(0.0, 0.0, 1.0),          // vertical bow
      Vec3(0.0, 0.0, 1.0),          // vertical stern
  };
}

/// Actuator configuration matrix: column i stacks the force direction and
/// its moment contribution, so tau = B * f for per-actuator forces f.
inline Mat6 actuator_matrix(const ActuatorGeometry& g) {
  const auto dirs = force_directions(g);
  Mat6 b;
  for (int i = 0; i < kActuatorCount; ++i) {
    b.col(i).head<3>() = dirs[i];
    b.col(i).tail<3>() = g.lever_arm_m[i].cross(dirs[i]);
  }
  return b;
}

/// Total body wrench produced by per-actuator scalar forces.
inline Vec6 assemble_tau(const ActuatorGeometry& g, const std::array<double, 6>& forces) {
  Vec6 f;
  for (int i = 0; i < kActuatorCount; ++i) f[i] = forces[i];
  return actuator_matrix(g) * f;
}

/// Minimum-norm force allocation through the pseudo-inverse of the actuator
/// matrix. The configuration leaves sway unactuated, so B is rank-deficient
/// by design; demands outside the actuated subspace are projected out, and
/// only an irreproducible component inside the actuated subspace raises
/// UnattainableWrenchError.
class Allocator {
 public:
  explicit Allocator(const Mat6& b, double condition_limit = 1e8)
      : b_(b), svd_(b, Eigen::ComputeFullU | Eigen::ComputeFullV) {
    const auto& sv = svd_.singularValues();
    const double tol = sv(0) * 1e-10;
    rank_ = 0;
    while (rank_ < 6 && sv(rank_) > tol) ++rank_;
    if (rank_ == 0 || sv(0) / sv(rank_ - 1) >= condition_limit) {
      throw std::domain_error("Allocator: actuator matrix is ill-conditioned");
    }
  }

  explicit Allocator(const ActuatorGeometry& g) : Allocator(actuator_matrix(g)) {}

  const Mat6& matrix() const { return b_; }
  int rank() const { return rank_; }

  /// Minimum-norm least-squares forces for a demanded wrench. Throws when
  /// the residual inside the actuated subspace exceeds tolerance.
  Vec6 allocate(const Vec6& tau_d) const {
    const Vec6 f = solve(tau_d);
    const Vec6 residual = b_ * f - tau_d;
    const auto u_r = svd_.matrixU().leftCols(rank_);
    const double in_span = (u_r.transpose() * residual).norm();
    if (in_span > 1e-8 * std::max(1.0, tau_d.norm())) {
      throw UnattainableWrenchError("Allocator: wrench not reproducible in actuated subspace");
    }
    return f;
  }

  /// Best-effort variant: projects the demand onto the actuated subspace
  /// without raising. Used by the closed-loop controller.
  Vec6 solve(const Vec6& tau_d) const {
    const auto& sv = svd_.singularValues();
    Vec6 y = svd_.matrixU().transpose() * tau_d;
    for (int i = 0; i < 6; ++i) y[i] = (i < rank_) ? y[i] / sv(i) : 0.0;
    return svd_.matrixV() * y;
  }

 private:
  Mat6 b_;
  Eigen::JacobiSVD<Mat6> svd_;
  int rank_ = 0;
};

/// Hardware description shared by simulation, identification and control:
/// mounting geometry, the common motor model, and the characteristic curves
/// of the stern and vertical propeller groups.
struct Plant {
  ActuatorGeometry geometry;
  MotorModel motor;
  PropellerCurve stern_curve;
  PropellerCurve vertical_curve;

  const PropellerCurve& curve_for(int actuator) const {
    return actuator < kSternCount ? stern_curve : vertical_curve;
  }
};

/// Per-actuator motor/curve set plus the shared geometry; owns the dynamic
/// state of the six motor responses between steps.
class ActuatorBank {
 public:
  ActuatorBank(const ActuatorGeometry& geometry, const MotorModel& motor,
               const PropellerCurve& stern_curve, const PropellerCurve& vertical_curve)
      : geometry_(geometry), matrix_(actuator_matrix(geometry)) {
    motors_.fill(motor);
    curves_ = {stern_curve, stern_curve, stern_curve, stern_curve,
               vertical_curve, vertical_curve};
  }

  explicit ActuatorBank(const Plant& plant)
      : ActuatorBank(plant.geometry, plant.motor, plant.stern_curve, plant.vertical_curve) {}

  struct StepResult {
    Vec6 tau = Vec6::Zero();
    std::array<double, 6> n_limited{};  ///< commands after the static limit
    std::array<double, 6> n_actual{};   ///< motor response outputs
    std::array<double, 6> force{};
  };

  /// Advances every actuator chain one step: static limit, rate limit,
  /// first-order response, characteristic curve. Stern props see the
  /// relative surge as advance velocity, vertical thrusters the relative
  /// heave.
  StepResult step(const std::array<double, 6>& n_demand, const Vec6& nu_r, double dt) {
    StepResult out;
    for (int i = 0; i < kActuatorCount; ++i) {
      const double n_static = static_limit(motors_[i], n_demand[i]);
      const double n_rate = rate_limit(motors_[i], rate_prev_[i], n_static, dt);
      rate_prev_[i] = n_rate;
      const double n_act = lag_[i].step(motors_[i], n_rate, dt);
      const double v_a = (i < kSternCount) ? nu_r[0] : nu_r[2];
      out.n_limited[i] = n_static;
      out.n_actual[i] = n_act;
      out.force[i] = thrust(curves_[i], n_act, v_a);
    }
    Vec6 f;
    for (int i = 0; i < kActuatorCount; ++i) f[i] = out.force[i];
    out.tau = matrix_ * f;
    return out;
  }

  void reset() {
    for (auto& l : lag_) l.reset();
    rate_prev_.fill(0.0);
  }

  const ActuatorGeometry& geometry() const { return geometry_; }
  const Mat6& matrix() const { return matrix_; }
  const MotorModel& motor(int i) const { return motors_[static_cast<std::size_t>(i)]; }
  const PropellerCurve& curve(int i) const { return curves_[static_cast<std::size_t>(i)]; }

 private:
  ActuatorGeometry geometry_;
  Mat6 matrix_;
  std::array<MotorModel, 6> motors_{};
  std::array<PropellerCurve, 6> curves_{};
  std::array<LagState, 6> lag_{};
  std::array<double, 6> rate_prev_{};
};

}  // namespace auvpilot

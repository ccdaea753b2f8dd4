#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "auvpilot/actuators.hpp"
#include "auvpilot/dynamics.hpp"
#include "auvpilot/guidance.hpp"
#include "auvpilot/kinematics.hpp"
#include "auvpilot/simulator.hpp"
#include "auvpilot/types.hpp"

namespace auvpilot {

inline constexpr int kGainPoints = 6;

struct Gains {
  double kp = 0.0, ki = 0.0, kd = 0.0;
};

/// Gain schedule over six supporting points of the desired speed. The
/// abscissae must increase strictly and cover the speed range [-5, 5] m/s;
/// lookups outside the span clamp to the end points.
struct GainTable {
  std::array<double, kGainPoints> u_mps{-5.0, -3.0, -1.0, 1.0, 3.0, 5.0};
  std::array<double, kGainPoints> kp{};
  std::array<double, kGainPoints> ki{};
  std::array<double, kGainPoints> kd{};

  void validate() const {
    for (int i = 1; i < kGainPoints; ++i) {
      if (!(u_mps[i] > u_mps[i - 1])) {
        throw std::invalid_argument("GainTable: abscissae must increase strictly");
      }
    }
    if (u_mps.front() > -5.0 || u_mps.back() < 5.0) {
      throw std::invalid_argument("GainTable: abscissae must cover [-5, 5] m/s");
    }
  }

  static GainTable constant(double kp, double ki, double kd) {
    GainTable t;
    t.kp.fill(kp);
    t.ki.fill(ki);
    t.kd.fill(kd);
    return t;
  }
};

/// Piecewise-linear interpolation of the schedule at the desired speed.
inline Gains schedule_gains(const GainTable& table, double u_d) {
  table.validate();
  if (u_d <= table.u_mps.front()) {
    return {table.kp.front(), table.ki.front(), table.kd.front()};
  }
  if (u_d >= table.u_mps.back()) {
    return {table.kp.back(), table.ki.back(), table.kd.back()};
  }
  int hi = 1;
  while (table.u_mps[hi] < u_d) ++hi;
  const int lo = hi - 1;
  const double s = (u_d - table.u_mps[lo]) / (table.u_mps[hi] - table.u_mps[lo]);
  return {table.kp[lo] + s * (table.kp[hi] - table.kp[lo]),
          table.ki[lo] + s * (table.ki[hi] - table.ki[lo]),
          table.kd[lo] + s * (table.kd[hi] - table.kd[lo])};
}

struct PidConfig {
  double integrator_limit = std::numeric_limits<double>::infinity();
  double reset_bias = 0.0;           ///< integrator preload on (re)activation
  bool derivative_on_error = false;  ///< default: derivative on the measurement
  bool angular = false;              ///< wrap measurement/error differences
};

struct PidState {
  double integral = 0.0;
  double prev_y = 0.0;
  double prev_e = 0.0;
  double last_tau = 0.0;
  bool primed = false;

  void reset() { *this = PidState{}; }
};

/// One discrete PID update:
///   tau = K_P e + K_I sum(e dt) - K_D (y_k - y_{k-1}) / dt
/// The running sum is scaled by dt and the difference by 1/dt so gains are
/// step-size independent. The sum excludes the current error; it is
/// accumulated after the output is formed, skipped when `saturated` is set
/// and the error would push further into saturation (conditional
/// integration), and clamped to the configured magnitude bound. On the
/// first call after a reset the sum starts at the reset bias and the
/// derivative contribution is zero (bumpless transfer).
inline double pid_step(const PidConfig& cfg, const Gains& g, PidState& st, double e, double y,
                       bool saturated, double dt) {
  if (g.kp == 0.0 && g.ki == 0.0 && g.kd == 0.0) return 0.0;
  if (!st.primed) {
    st.integral = cfg.reset_bias;
    st.prev_y = y;
    st.prev_e = e;
    st.primed = true;
  }
  double dy = y - st.prev_y;
  double de = e - st.prev_e;
  if (cfg.angular) {
    dy = wrap_angle(dy);
    de = wrap_angle(de);
  }
  const double derivative = cfg.derivative_on_error ? g.kd * de / dt : -g.kd * dy / dt;
  const double tau = g.kp * e + g.ki * st.integral + derivative;

  const bool deepens = saturated && tau * e > 0.0;
  if (!deepens) {
    st.integral =
        std::clamp(st.integral + e * dt, -cfg.integrator_limit, cfg.integrator_limit);
  }
  st.prev_y = y;
  st.prev_e = e;
  st.last_tau = tau;
  return tau;
}

/// Per-channel controller configuration.
struct ChannelConfig {
  GainTable gains;
  PidConfig pid;
};

struct AutopilotSetup {
  ChannelConfig surge;    ///< speed error -> surge force
  ChannelConfig depth;    ///< depth error -> heave force
  ChannelConfig pitch;    ///< pitch error -> pitch moment
  ChannelConfig heading;  ///< heading error -> yaw moment
};

/// Decoupled PID bank with hydrostatic feed-forward and pseudo-inverse
/// force allocation: u_A = B^+ [tau_PID + g(eta)], then per-actuator
/// inverse curves and static limits produce rpm commands.
class Autopilot {
 public:
  Autopilot(const ModelParams& model, const Plant& plant, const AutopilotSetup& setup)
      : model_(model), plant_(plant), setup_(setup), allocator_(plant.geometry) {
    setup_.surge.gains.validate();
    setup_.depth.gains.validate();
    setup_.pitch.gains.validate();
    setup_.heading.gains.validate();
    setup_.pitch.pid.angular = true;
    setup_.heading.pid.angular = true;
  }

  struct Diagnostics {
    Vec6 tau_demand = Vec6::Zero();
    Vec6 forces = Vec6::Zero();
    std::array<double, 6> commands{};
    bool saturated = false;
    long infeasible_ticks = 0;
  };

  /// One control tick: errors, scheduled PID channels, feed-forward,
  /// allocation, inverse thrust, static limits. Saturation observed this
  /// tick conditions the integrators on the next tick.
  std::array<double, 6> tick(const References& refs, const VehicleState& s, double dt) {
    const double e_u = refs.u_d - s.nu[0];
    const double e_z = refs.z_d - s.eta[2];
    const double e_theta = wrap_angle(refs.theta_d - s.eta[4]);
    const double e_psi = wrap_angle(refs.psi_d - s.eta[5]);

    const bool sat = saturated_;
    const double x_d = pid_step(setup_.surge.pid, schedule_gains(setup_.surge.gains, refs.u_d),
                                surge_, e_u, s.nu[0], sat, dt);
    const double z_d = pid_step(setup_.depth.pid, schedule_gains(setup_.depth.gains, refs.u_d),
                                depth_, e_z, s.eta[2], sat, dt);
    const double m_d = pid_step(setup_.pitch.pid, schedule_gains(setup_.pitch.gains, refs.u_d),
                                pitch_, e_theta, s.eta[4], sat, dt);
    const double n_d = pid_step(setup_.heading.pid,
                                schedule_gains(setup_.heading.gains, refs.u_d), heading_,
                                e_psi, s.eta[5], sat, dt);

    Vec6 tau_pid;
    tau_pid << x_d, 0.0, z_d, 0.0, m_d, n_d;
    diag_.tau_demand = tau_pid + restoring(model_, s.eta);
    diag_.forces = allocator_.solve(diag_.tau_demand);

    bool saturated_now = false;
    for (int i = 0; i < kActuatorCount; ++i) {
      const double v_a = (i < kSternCount) ? s.nu[0] : s.nu[2];
      double n;
      try {
        n = inverse_thrust(plant_.curve_for(i), plant_.motor, diag_.forces[i], v_a);
      } catch (const ThrustInfeasibleError&) {
        n = diag_.forces[i] > 0.0 ? plant_.motor.n_max_pos : plant_.motor.n_max_neg;
        saturated_now = true;
        ++diag_.infeasible_ticks;
      }
      n = static_limit(plant_.motor, n);
      if (n >= plant_.motor.n_max_pos || n <= plant_.motor.n_max_neg) saturated_now = true;
      diag_.commands[i] = n;
    }
    saturated_ = saturated_now;
    diag_.saturated = saturated_now;
    return diag_.commands;
  }

  const Diagnostics& diagnostics() const { return diag_; }

  void reset() {
    surge_.reset();
    depth_.reset();
    pitch_.reset();
    heading_.reset();
    saturated_ = false;
    diag_ = Diagnostics{};
  }

 private:
  ModelParams model_;
  Plant plant_;
  AutopilotSetup setup_;
  Allocator allocator_;
  PidState surge_{}, depth_{}, pitch_{}, heading_{};
  bool saturated_ = false;
  Diagnostics diag_{};
};

/// Reference provider for closed-loop runs (waypoint guidance, set-point
/// profiles, tuning scenarios).
using ReferenceSource = std::function<References(double, const VehicleState&)>;

/// Adapts an autopilot plus a reference source into a command source for
/// the simulator. Both captured objects must outlive the returned source.
inline CommandSource closed_loop(Autopilot& autopilot, const ReferenceSource& references,
                                 double dt) {
  return [&autopilot, references, dt](double t, const VehicleState& s) {
    return autopilot.tick(references(t, s), s, dt);
  };
}

}  // namespace auvpilot

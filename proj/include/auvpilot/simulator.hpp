#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "auvpilot/actuators.hpp"
#include "auvpilot/dynamics.hpp"
#include "auvpilot/kinematics.hpp"
#include "auvpilot/types.hpp"

namespace auvpilot {

/// Thrown when the integrated state stops being finite.
class SimulationDivergedError : public std::runtime_error {
 public:
  explicit SimulationDivergedError(double t)
      : std::runtime_error("simulation diverged: non-finite state at t = " + std::to_string(t)),
        time(t) {}
  double time;
};

struct SimConfig {
  double dt_s = 0.01;
  double duration_s = 60.0;
  Vec6 v_const = Vec6::Ones();  ///< per-DOF mask on the acceleration
  VehicleState initial{};
  Vec3 current_mps = Vec3::Zero();  ///< body-fixed fluid velocity
  /// Optional time-varying current; overrides current_mps when set.
  std::function<Vec3(double)> current_profile;
};

struct LogRow {
  double t = 0.0;
  std::array<double, 6> n_cmd{};     ///< commanded rpm (pre-limiter)
  std::array<double, 6> n_actual{};  ///< motor response rpm
  Vec6 eta = Vec6::Zero();
  Vec6 nu = Vec6::Zero();
};

struct TrajectoryLog {
  std::vector<LogRow> rows;
  double dt_s = 0.0;
};

/// Commanded rpm for the six actuators at time t given the current state.
using CommandSource = std::function<std::array<double, 6>(double, const VehicleState&)>;

/// Fixed-step integrator for the coupled pose/velocity system. Actuator
/// chains advance once per step and the resulting wrench is held over the
/// step (zero-order hold), so replaying a logged command sequence through
/// the same model reproduces the log exactly.
class Simulator {
 public:
  Simulator(const ModelParams& params, const ActuatorGeometry& geometry,
            const MotorModel& motor, const PropellerCurve& stern_curve,
            const PropellerCurve& vertical_curve, const SimConfig& cfg)
      : model_(params),
        bank_(geometry, motor, stern_curve, vertical_curve),
        cfg_(cfg) {}

  Simulator(const ModelParams& params, const Plant& plant, const SimConfig& cfg)
      : model_(params), bank_(plant), cfg_(cfg) {}

  const DynamicsModel& model() const { return model_; }
  const SimConfig& config() const { return cfg_; }

  /// One RK4 update of (eta, nu) under a constant wrench and current.
  VehicleState integrate_step(const VehicleState& s, const Vec6& tau, const Vec3& current,
                              double dt) const {
    const auto f = [&](const Vec6& eta, const Vec6& nu) {
      struct Deriv {
        Vec6 eta_dot, nu_dot;
      };
      return Deriv{transform(eta) * nu,
                   model_.acceleration(eta, nu, current, tau, cfg_.v_const)};
    };
    const auto k1 = f(s.eta, s.nu);
    const auto k2 = f(s.eta + 0.5 * dt * k1.eta_dot, s.nu + 0.5 * dt * k1.nu_dot);
    const auto k3 = f(s.eta + 0.5 * dt * k2.eta_dot, s.nu + 0.5 * dt * k2.nu_dot);
    const auto k4 = f(s.eta + dt * k3.eta_dot, s.nu + dt * k3.nu_dot);
    VehicleState next;
    next.eta = wrap_angles(s.eta + (dt / 6.0) * (k1.eta_dot + 2.0 * k2.eta_dot +
                                                 2.0 * k3.eta_dot + k4.eta_dot));
    next.nu = s.nu + (dt / 6.0) * (k1.nu_dot + 2.0 * k2.nu_dot + 2.0 * k3.nu_dot + k4.nu_dot);
    return next;
  }

  /// Runs the closed command/plant loop for the configured duration and
  /// returns floor(duration/dt) + 1 rows. Deterministic for identical
  /// inputs; throws SimulationDivergedError on non-finite state.
  TrajectoryLog run(const CommandSource& commands) {
    bank_.reset();
    const double dt = cfg_.dt_s;
    const auto steps = static_cast<std::size_t>(std::floor(cfg_.duration_s / dt + 0.5));
    TrajectoryLog log;
    log.dt_s = dt;
    log.rows.reserve(steps + 1);

    VehicleState state = cfg_.initial;
    std::array<double, 6> last_actual{};
    for (std::size_t k = 0; k < steps; ++k) {
      const double t = static_cast<double>(k) * dt;
      const Vec3 current = current_at(t);
      const auto cmd = commands(t, state);
      const auto act = bank_.step(cmd, relative_velocity(state.nu, current), dt);
      last_actual = act.n_actual;
      log.rows.push_back({t, cmd, act.n_actual, state.eta, state.nu});
      state = integrate_step(state, act.tau, current, dt);
      if (!state.eta.allFinite() || !state.nu.allFinite()) {
        throw SimulationDivergedError(t + dt);
      }
    }
    const double t_end = static_cast<double>(steps) * dt;
    log.rows.push_back({t_end, commands(t_end, state), last_actual, state.eta, state.nu});
    return log;
  }

 private:
  Vec3 current_at(double t) const {
    return cfg_.current_profile ? cfg_.current_profile(t) : cfg_.current_mps;
  }

  DynamicsModel model_;
  ActuatorBank bank_;
  SimConfig cfg_;
};

}  // namespace auvpilot

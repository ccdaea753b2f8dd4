#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "auvpilot/controller.hpp"
#include "auvpilot/identification.hpp"
#include "auvpilot/optimize.hpp"
#include "auvpilot/simulator.hpp"

namespace auvpilot {

/// Piecewise-linear lower/upper constraint envelope over time. Repeated
/// time breakpoints encode jumps; lookups clamp at both ends.
struct ConstraintEnvelope {
  std::vector<double> t;
  std::vector<double> lower;
  std::vector<double> upper;

  void validate() const {
    if (t.empty() || t.size() != lower.size() || t.size() != upper.size()) {
      throw std::invalid_argument("ConstraintEnvelope: breakpoint arrays must match");
    }
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (i > 0 && t[i] < t[i - 1]) {
        throw std::invalid_argument("ConstraintEnvelope: times must be non-decreasing");
      }
      if (lower[i] > upper[i]) {
        throw std::invalid_argument("ConstraintEnvelope: lower bound above upper bound");
      }
    }
  }

  /// Right-continuous at jump breakpoints (repeated times).
  std::pair<double, double> bounds_at(double time) const {
    if (time <= t.front()) return {lower.front(), upper.front()};
    if (time >= t.back()) return {lower.back(), upper.back()};
    const auto lo = static_cast<std::size_t>(
        std::upper_bound(t.begin(), t.end(), time) - t.begin() - 1);
    const std::size_t hi = lo + 1;
    const double s = (time - t[lo]) / (t[hi] - t[lo]);
    return {lower[lo] + s * (lower[hi] - lower[lo]), upper[lo] + s * (upper[hi] - upper[lo])};
  }
};

/// Boundary-inclusive violation flags: undershoot when the signal is at or
/// below the lower bound, overshoot when at or above the upper bound.
struct ViolationFlags {
  bool undershoot = false;
  bool overshoot = false;
};

inline ViolationFlags violation_flags(double y, double lower, double upper) {
  return {lower >= y, y >= upper};
}

/// Constraint-violation criterion over one logged channel:
///   Q = sum_t [US WI_u (C_u - y) + OS WI_o (y - C_o)] dt
/// Rectangle integration at the log rate. `literal_upper_bound_term`
/// switches the overshoot depth to (y - C_u), the form some references
/// print; the default measures depth from the violated upper bound.
inline double tuning_quality(const TrajectoryLog& log, Channel channel,
                             const ConstraintEnvelope& envelope, double wi_u, double wi_o,
                             bool literal_upper_bound_term = false) {
  envelope.validate();
  if (log.rows.size() < 2) throw std::invalid_argument("tuning_quality: log too short");
  const double dt = log.rows[1].t - log.rows[0].t;
  double q = 0.0;
  for (std::size_t k = 0; k + 1 < log.rows.size(); ++k) {
    const double y = channel_value(log.rows[k], channel);
    const auto [lo, hi] = envelope.bounds_at(log.rows[k].t);
    const auto flags = violation_flags(y, lo, hi);
    if (flags.undershoot) q += wi_u * (lo - y) * dt;
    if (flags.overshoot) q += wi_o * (y - (literal_upper_bound_term ? lo : hi)) * dt;
  }
  return q;
}

/// Set-point staircase: (time, value) steps held until the next step.
struct StaircaseScenario {
  std::vector<std::pair<double, double>> steps;  ///< time-sorted
  double horizon_s = 120.0;
  double initial_value = 0.0;

  double value_at(double time) const {
    double v = initial_value;
    for (const auto& [ts, val] : steps) {
      if (ts <= time) v = val;
      else break;
    }
    return v;
  }

  void validate() const {
    if (steps.empty()) throw std::invalid_argument("StaircaseScenario: no steps");
    for (std::size_t i = 1; i < steps.size(); ++i) {
      if (steps[i].first <= steps[i - 1].first) {
        throw std::invalid_argument("StaircaseScenario: step times must increase");
      }
    }
    if (!(horizon_s > steps.back().first)) {
      throw std::invalid_argument("StaircaseScenario: horizon must exceed the last step");
    }
  }
};

/// Builds the corridor envelope for a staircase response: around each step a
/// settling window spans the transition generously; afterwards the corridor
/// tightens to the target +- corridor_frac * |step size|.
inline ConstraintEnvelope staircase_envelope(const StaircaseScenario& sc, double settle_s,
                                             double corridor_frac) {
  sc.validate();
  if (!(settle_s >= 0.0) || !(corridor_frac > 0.0)) {
    throw std::invalid_argument("staircase_envelope: invalid settle/corridor parameters");
  }
  ConstraintEnvelope env;
  const auto push = [&env](double t, double lo, double hi) {
    env.t.push_back(t);
    env.lower.push_back(lo);
    env.upper.push_back(hi);
  };
  double prev = sc.initial_value;
  for (std::size_t i = 0; i < sc.steps.size(); ++i) {
    const auto [t0, target] = sc.steps[i];
    const double t1 = (i + 1 < sc.steps.size()) ? sc.steps[i + 1].first : sc.horizon_s;
    const double width = corridor_frac * std::abs(target - prev);
    const double wide_lo = std::min(prev, target) - width;
    const double wide_hi = std::max(prev, target) + width;
    const double settle_end = std::min(t0 + settle_s, t1);
    push(t0, wide_lo, wide_hi);
    push(settle_end, wide_lo, wide_hi);
    push(settle_end, target - width, target + width);
    push(t1, target - width, target + width);
    prev = target;
  }
  env.validate();
  return env;
}

/// Which autopilot channel a tuned table belongs to.
enum class ControlChannel { surge, depth, pitch, heading };

struct TuneSetup {
  ControlChannel control = ControlChannel::surge;
  Channel scored = Channel::u;  ///< log channel checked against the envelope
  StaircaseScenario scenario;
  ConstraintEnvelope envelope;  ///< built via staircase_envelope when empty
  double settle_s = 5.0;
  double corridor_frac = 0.2;
  double wi_u = 1.0;
  double wi_o = 1.0;
  bool literal_upper_bound_term = false;
  Gains low{};                  ///< per-gain lower bounds
  Gains high{50.0, 10.0, 50.0}; ///< per-gain upper bounds
};

struct TuneResult {
  GainTable tuned;
  double q_initial = 0.0;
  double q_final = 0.0;
  std::vector<double> history;
  long evaluations = 0;
  TrajectoryLog final_log;
  std::vector<double> per_step_q;  ///< Q contribution of each scenario step window
};

namespace detail {

inline GainTable& table_for(AutopilotSetup& setup, ControlChannel c) {
  switch (c) {
    case ControlChannel::surge: return setup.surge.gains;
    case ControlChannel::depth: return setup.depth.gains;
    case ControlChannel::pitch: return setup.pitch.gains;
    case ControlChannel::heading: return setup.heading.gains;
  }
  throw std::logic_error("table_for: unknown channel");
}

inline const GainTable& table_for(const AutopilotSetup& setup, ControlChannel c) {
  return table_for(const_cast<AutopilotSetup&>(setup), c);
}

inline Eigen::VectorXd pack_gains(const GainTable& t) {
  Eigen::VectorXd x(3 * kGainPoints);
  for (int i = 0; i < kGainPoints; ++i) {
    x[i] = t.kp[static_cast<std::size_t>(i)];
    x[kGainPoints + i] = t.ki[static_cast<std::size_t>(i)];
    x[2 * kGainPoints + i] = t.kd[static_cast<std::size_t>(i)];
  }
  return x;
}

inline GainTable unpack_gains(const GainTable& base, const Eigen::VectorXd& x) {
  GainTable t = base;
  for (int i = 0; i < kGainPoints; ++i) {
    t.kp[static_cast<std::size_t>(i)] = x[i];
    t.ki[static_cast<std::size_t>(i)] = x[kGainPoints + i];
    t.kd[static_cast<std::size_t>(i)] = x[2 * kGainPoints + i];
  }
  return t;
}

}  // namespace detail

/// Searches the 18 schedule values (K_P, K_I, K_D at six supporting points)
/// of one control channel so the closed-loop staircase response stays inside
/// the constraint envelope. The returned table never scores worse than the
/// starting one.
inline TuneResult tune(const ModelParams& model, const Plant& plant,
                       const AutopilotSetup& base_setup, const SimConfig& base_sim,
                       const TuneSetup& setup, OptimizerConfig opt) {
  TuneSetup ts = setup;
  ts.scenario.validate();
  if (ts.envelope.t.empty()) {
    ts.envelope = staircase_envelope(ts.scenario, ts.settle_s, ts.corridor_frac);
  }
  ts.envelope.validate();

  SimConfig sim_cfg = base_sim;
  sim_cfg.duration_s = ts.scenario.horizon_s;

  const ReferenceSource refs = [&ts, &base_sim](double t, const VehicleState& s) {
    References r;
    r.u_d = ts.scenario.value_at(t);
    r.psi_d = base_sim.initial.eta[5];
    r.theta_d = 0.0;
    r.z_d = base_sim.initial.eta[2];
    (void)s;
    return r;
  };

  const auto simulate_with = [&](const GainTable& table) {
    AutopilotSetup s = base_setup;
    detail::table_for(s, ts.control) = table;
    Autopilot autopilot(model, plant, s);
    Simulator sim(model, plant, sim_cfg);
    return sim.run(closed_loop(autopilot, refs, sim_cfg.dt_s));
  };

  const GainTable& base_table = detail::table_for(base_setup, ts.control);
  const ObjectiveFn objective = [&](const Eigen::VectorXd& x) {
    try {
      return tuning_quality(simulate_with(detail::unpack_gains(base_table, x)), ts.scored,
                            ts.envelope, ts.wi_u, ts.wi_o, ts.literal_upper_bound_term);
    } catch (const SimulationDivergedError&) {
      return std::numeric_limits<double>::infinity();
    } catch (const GimbalLockError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  Bounds bounds;
  bounds.low.resize(3 * kGainPoints);
  bounds.high.resize(3 * kGainPoints);
  for (int i = 0; i < kGainPoints; ++i) {
    bounds.low[i] = ts.low.kp;
    bounds.high[i] = ts.high.kp;
    bounds.low[kGainPoints + i] = ts.low.ki;
    bounds.high[kGainPoints + i] = ts.high.ki;
    bounds.low[2 * kGainPoints + i] = ts.low.kd;
    bounds.high[2 * kGainPoints + i] = ts.high.kd;
  }

  const Eigen::VectorXd x0 = bounds.clamp(detail::pack_gains(base_table));
  if (opt.stop_below < 0.0) opt.stop_below = 0.0;  // Q is non-negative; 0 is optimal

  TuneResult result;
  result.q_initial = objective(x0);
  OptResult best = minimize(opt, objective, bounds, x0);
  if (result.q_initial <= best.value) {
    best.x = x0;
    best.value = result.q_initial;
  }
  result.q_final = best.value;
  result.history = std::move(best.history);
  result.evaluations = best.evaluations + 1;
  result.tuned = detail::unpack_gains(base_table, best.x);
  result.final_log = simulate_with(result.tuned);

  result.per_step_q.reserve(ts.scenario.steps.size());
  for (std::size_t i = 0; i < ts.scenario.steps.size(); ++i) {
    const double t0 = ts.scenario.steps[i].first;
    const double t1 =
        (i + 1 < ts.scenario.steps.size()) ? ts.scenario.steps[i + 1].first : ts.scenario.horizon_s;
    double q = 0.0;
    const double dt = result.final_log.rows[1].t - result.final_log.rows[0].t;
    for (std::size_t k = 0; k + 1 < result.final_log.rows.size(); ++k) {
      const double t = result.final_log.rows[k].t;
      if (t < t0 || t >= t1) continue;
      const double y = channel_value(result.final_log.rows[k], ts.scored);
      const auto [lo, hi] = ts.envelope.bounds_at(t);
      const auto flags = violation_flags(y, lo, hi);
      if (flags.undershoot) q += ts.wi_u * (lo - y) * dt;
      if (flags.overshoot) {
        q += ts.wi_o * (y - (ts.literal_upper_bound_term ? lo : hi)) * dt;
      }
    }
    result.per_step_q.push_back(q);
  }
  return result;
}

}  // namespace auvpilot

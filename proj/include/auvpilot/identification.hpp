#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "auvpilot/csv.hpp"
#include "auvpilot/kinematics.hpp"
#include "auvpilot/optimize.hpp"
#include "auvpilot/simulator.hpp"

namespace auvpilot {

/// Thrown when two logs to be compared do not share a timebase.
class TimebaseMismatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Signal channels a trajectory log exposes for comparison.
enum class Channel { x, y, z, phi, theta, psi, u, v, w, p, q, r };

inline Channel channel_from_name(const std::string& name) {
  static const std::map<std::string, Channel> table = {
      {"x", Channel::x},     {"y", Channel::y},         {"z", Channel::z},
      {"phi", Channel::phi}, {"theta", Channel::theta}, {"psi", Channel::psi},
      {"u", Channel::u},     {"v", Channel::v},         {"w", Channel::w},
      {"p", Channel::p},     {"q", Channel::q},         {"r", Channel::r}};
  const auto it = table.find(name);
  if (it == table.end()) throw std::invalid_argument("unknown channel '" + name + "'");
  return it->second;
}

inline std::string channel_name(Channel c) {
  static const char* names[] = {"x", "y", "z", "phi", "theta", "psi",
                                "u", "v", "w", "p",   "q",     "r"};
  return names[static_cast<int>(c)];
}

inline bool is_angle_channel(Channel c) {
  return c == Channel::phi || c == Channel::theta || c == Channel::psi;
}

inline double channel_value(const LogRow& row, Channel c) {
  const int i = static_cast<int>(c);
  return i < 6 ? row.eta[i] : row.nu[i - 6];
}

/// Time-integrated absolute error between a reference and a candidate run,
/// summed over the given channels: Q = sum_ch integral |y - y_hat| dt.
/// Attitude channels difference through the wrap seam. Left-rectangle
/// integration at the log rate, so a constant offset d over T gives d * T.
inline double quality(const TrajectoryLog& reference, const TrajectoryLog& candidate,
                      const std::vector<Channel>& channels) {
  const auto n = reference.rows.size();
  if (candidate.rows.size() != n || n < 2) {
    throw TimebaseMismatchError("quality: row-count mismatch between logs");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(reference.rows[k].t - candidate.rows[k].t) > 1e-9) {
      throw TimebaseMismatchError("quality: time grids differ at row " + std::to_string(k));
    }
  }
  const double dt = reference.rows[1].t - reference.rows[0].t;
  double q = 0.0;
  for (const Channel c : channels) {
    const bool angular = is_angle_channel(c);
    for (std::size_t k = 0; k + 1 < n; ++k) {
      double e = channel_value(reference.rows[k], c) - channel_value(candidate.rows[k], c);
      if (angular) e = wrap_angle(e);
      q += std::abs(e) * dt;
    }
  }
  return q;
}

/// One tunable coefficient with its search interval.
struct ParamSpec {
  std::string name;
  double low = 0.0;
  double high = 1.0;
};

/// One identification stage: a DOF mask isolating the excited motion, the
/// channels scored against the reference trial, and the coefficient subset
/// searched over.
struct IdentStage {
  std::string name;
  Vec6 v_const = Vec6::Ones();
  std::vector<Channel> channels;
  std::vector<ParamSpec> params;
  double q_ceiling = std::numeric_limits<double>::infinity();
};

namespace detail {

inline const std::map<std::string, double ModelParams::*>& param_table() {
  static const std::map<std::string, double ModelParams::*> table = {
      {"C_Ix", &ModelParams::C_Ix},   {"C_Iy", &ModelParams::C_Iy},
      {"C_Xud", &ModelParams::C_Xud}, {"C_Yvd", &ModelParams::C_Yvd},
      {"C_Zwd", &ModelParams::C_Zwd}, {"C_Kpd", &ModelParams::C_Kpd},
      {"C_Mqd", &ModelParams::C_Mqd}, {"C_Nrd", &ModelParams::C_Nrd},
      {"X_u", &ModelParams::X_u},     {"Y_v", &ModelParams::Y_v},
      {"Z_w", &ModelParams::Z_w},     {"K_p", &ModelParams::K_p},
      {"M_q", &ModelParams::M_q},     {"N_r", &ModelParams::N_r},
      {"C_Dx", &ModelParams::C_Dx},   {"C_Dy", &ModelParams::C_Dy},
      {"C_Dz", &ModelParams::C_Dz},   {"C_Dp", &ModelParams::C_Dp},
      {"C_Dq", &ModelParams::C_Dq},   {"C_Dr", &ModelParams::C_Dr},
      {"C_f", &ModelParams::C_f}};
  return table;
}

}  // namespace detail

inline double get_param(const ModelParams& p, const std::string& name) {
  const auto& table = detail::param_table();
  const auto it = table.find(name);
  if (it == table.end()) throw std::invalid_argument("unknown model coefficient '" + name + "'");
  return p.*(it->second);
}

inline void set_param(ModelParams& p, const std::string& name, double value) {
  const auto& table = detail::param_table();
  const auto it = table.find(name);
  if (it == table.end()) throw std::invalid_argument("unknown model coefficient '" + name + "'");
  p.*(it->second) = value;
}

struct StageResult {
  ModelParams updated;
  double q_initial = 0.0;
  double q_final = 0.0;
  std::vector<double> history;
  long evaluations = 0;
};

/// Replays the reference trial's commands against candidate coefficients and
/// minimizes the quality criterion over the stage's subset. Coefficients
/// outside the subset are untouched. Diverging candidates score +infinity.
inline StageResult run_stage(const ModelParams& start, const Plant& plant,
                             const IdentStage& stage, const TrajectoryLog& reference,
                             const OptimizerConfig& opt) {
  if (reference.rows.size() < 2) {
    throw std::invalid_argument("run_stage: reference log too short");
  }
  if (stage.params.empty()) {
    StageResult r;
    r.updated = start;
    SimConfig sim_cfg;
    sim_cfg.dt_s = reference.dt_s;
    sim_cfg.duration_s = reference.rows.back().t;
    sim_cfg.v_const = stage.v_const;
    sim_cfg.initial = {reference.rows.front().eta, reference.rows.front().nu};
    Simulator sim(start, plant.geometry, plant.motor, plant.stern_curve, plant.vertical_curve,
                  sim_cfg);
    r.q_initial = r.q_final = quality(reference, sim.run(replay_commands(reference)), stage.channels);
    return r;
  }

  const auto dim = static_cast<Eigen::Index>(stage.params.size());
  Bounds bounds;
  bounds.low.resize(dim);
  bounds.high.resize(dim);
  Eigen::VectorXd x0(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const auto& spec = stage.params[static_cast<std::size_t>(i)];
    bounds.low[i] = spec.low;
    bounds.high[i] = spec.high;
    x0[i] = get_param(start, spec.name);
  }
  bounds.validate();

  SimConfig sim_cfg;
  sim_cfg.dt_s = reference.dt_s;
  sim_cfg.duration_s = reference.rows.back().t;
  sim_cfg.v_const = stage.v_const;
  sim_cfg.initial = {reference.rows.front().eta, reference.rows.front().nu};
  const CommandSource replay = replay_commands(reference);

  const ObjectiveFn objective = [&](const Eigen::VectorXd& x) {
    ModelParams candidate = start;
    for (Eigen::Index i = 0; i < dim; ++i) {
      set_param(candidate, stage.params[static_cast<std::size_t>(i)].name, x[i]);
    }
    try {
      Simulator sim(candidate, plant.geometry, plant.motor, plant.stern_curve,
                    plant.vertical_curve, sim_cfg);
      return quality(reference, sim.run(replay), stage.channels);
    } catch (const SimulationDivergedError&) {
      return std::numeric_limits<double>::infinity();
    } catch (const GimbalLockError&) {
      return std::numeric_limits<double>::infinity();
    } catch (const SingularMassError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  StageResult result;
  result.q_initial = objective(bounds.clamp(x0));
  const OptResult best = minimize(opt, objective, bounds, x0);
  result.q_final = best.value;
  result.history = best.history;
  result.evaluations = best.evaluations + 1;
  result.updated = start;
  for (Eigen::Index i = 0; i < dim; ++i) {
    set_param(result.updated, stage.params[static_cast<std::size_t>(i)].name, best.x[i]);
  }
  return result;
}

}  // namespace auvpilot

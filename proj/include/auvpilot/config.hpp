#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "auvpilot/controller.hpp"
#include "auvpilot/dynamics.hpp"
#include "auvpilot/identification.hpp"
#include "auvpilot/optimize.hpp"
#include "auvpilot/simulator.hpp"
#include "auvpilot/tuning.hpp"

namespace auvpilot {

/// Thrown on malformed or invalid run configuration; the message carries
/// file plus line (parse errors) or field path (semantic errors).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace cfg_detail {

using json = nlohmann::json;

inline std::string line_of_offset(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

[[noreturn]] inline void fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

inline void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
}

inline double num(const json& j, const std::string& path, const std::string& key,
                  std::optional<double> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    fail(path + "." + key, "missing required number");
  }
  const auto& v = j.at(key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

inline bool flag(const json& j, const std::string& path, const std::string& key, bool fallback) {
  if (!j.contains(key)) return fallback;
  const auto& v = j.at(key);
  if (!v.is_boolean()) fail(path + "." + key, "expected a boolean");
  return v.get<bool>();
}

inline std::string text(const json& j, const std::string& path, const std::string& key,
                        std::optional<std::string> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    fail(path + "." + key, "missing required string");
  }
  const auto& v = j.at(key);
  if (!v.is_string()) fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

template <std::size_t N>
inline std::array<double, N> fixed_array(const json& j, const std::string& path,
                                         const std::string& key,
                                         std::optional<std::array<double, N>> fallback) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    fail(path + "." + key, "missing required array");
  }
  const auto& v = j.at(key);
  if (!v.is_array() || v.size() != N) {
    fail(path + "." + key, "expected an array of " + std::to_string(N) + " numbers");
  }
  std::array<double, N> out{};
  for (std::size_t i = 0; i < N; ++i) {
    if (!v[i].is_number()) fail(path + "." + key, "expected numbers");
    out[i] = v[i].get<double>();
  }
  return out;
}

inline Vec3 vec3(const json& j, const std::string& path, const std::string& key,
                 const Vec3& fallback) {
  const auto a = fixed_array<3>(j, path, key, std::array<double, 3>{fallback[0], fallback[1], fallback[2]});
  return Vec3(a[0], a[1], a[2]);
}

inline Vec6 vec6(const json& j, const std::string& path, const std::string& key,
                 const Vec6& fallback) {
  std::array<double, 6> fb{};
  for (int i = 0; i < 6; ++i) fb[static_cast<std::size_t>(i)] = fallback[i];
  const auto a = fixed_array<6>(j, path, key, fb);
  Vec6 out;
  for (int i = 0; i < 6; ++i) out[i] = a[static_cast<std::size_t>(i)];
  return out;
}

inline void check_known_keys(const json& j, const std::string& path,
                             std::initializer_list<const char*> known) {
  for (const auto& [key, value] : j.items()) {
    bool ok = false;
    for (const char* k : known) {
      if (key == k) {
        ok = true;
        break;
      }
    }
    if (!ok) fail(path + "." + key, "unknown field");
  }
}

}  // namespace cfg_detail

struct RegressionDataset {
  std::string name;
  std::string csv;
  bool stern_group = true;
  bool forward = true;
};

struct RegressionSetup {
  double origin_threshold_N = 0.0;
  std::vector<RegressionDataset> datasets;
};

struct IdentStageSetup {
  IdentStage stage;
  std::string reference_csv;
};

/// Everything a command-line run needs, bundled; sections a given
/// subcommand does not use may stay at their defaults.
struct RunConfig {
  std::uint64_t seed = 1;
  ModelParams model;
  Plant plant;
  SimConfig simulation;
  std::string commands_csv;
  WaypointPlan plan;  ///< waypoints loaded lazily from plan_csv
  std::string plan_csv;
  AutopilotSetup controller;
  OptimizerConfig optimizer;
  std::vector<IdentStageSetup> stages;
  TuneSetup tuning;
  RegressionSetup regression;
  std::filesystem::path base_dir;  ///< directory of the config file

  std::string resolve(const std::string& relative) const {
    const std::filesystem::path p(relative);
    return p.is_absolute() ? p.string() : (base_dir / p).string();
  }
};

namespace cfg_detail {

inline void parse_model(const json& j, ModelParams& m) {
  expect_object(j, "model");
  check_known_keys(j, "model",
                   {"mass_kg", "length_m", "radius_m", "fin_ref_length_m", "fluid_density_kgm3",
                    "weight_N", "buoyancy_N", "cg_offset_m", "cb_offset_m", "reynolds_number",
                    "coefficients"});
  m.mass_kg = num(j, "model", "mass_kg", m.mass_kg);
  m.length_m = num(j, "model", "length_m", m.length_m);
  m.radius_m = num(j, "model", "radius_m", m.radius_m);
  m.fin_ref_length_m = num(j, "model", "fin_ref_length_m", m.fin_ref_length_m);
  m.fluid_density_kgm3 = num(j, "model", "fluid_density_kgm3", m.fluid_density_kgm3);
  m.weight_N = num(j, "model", "weight_N", m.weight_N);
  m.buoyancy_N = num(j, "model", "buoyancy_N", m.buoyancy_N);
  m.cg_offset_m = vec3(j, "model", "cg_offset_m", m.cg_offset_m);
  m.cb_offset_m = vec3(j, "model", "cb_offset_m", m.cb_offset_m);
  if (m.mass_kg <= 0.0) fail("model.mass_kg", "must be positive");
  if (m.length_m <= 0.0) fail("model.length_m", "must be positive");
  if (m.radius_m <= 0.0) fail("model.radius_m", "must be positive");
  if (m.fluid_density_kgm3 <= 0.0) fail("model.fluid_density_kgm3", "must be positive");
  if (m.weight_N < 0.0) fail("model.weight_N", "must be non-negative");
  if (m.buoyancy_N < 0.0) fail("model.buoyancy_N", "must be non-negative");
  if (j.contains("reynolds_number")) {
    try {
      m.C_f = friction_coefficient(num(j, "model", "reynolds_number"));
    } catch (const std::domain_error& e) {
      fail("model.reynolds_number", e.what());
    }
  }
  if (j.contains("coefficients")) {
    const auto& c = j.at("coefficients");
    expect_object(c, "model.coefficients");
    for (const auto& [key, value] : c.items()) {
      if (!value.is_number()) fail("model.coefficients." + key, "expected a number");
      try {
        set_param(m, key, value.get<double>());
      } catch (const std::invalid_argument&) {
        fail("model.coefficients." + key, "unknown coefficient");
      }
    }
  }
}

inline void parse_motor(const json& j, MotorModel& m) {
  expect_object(j, "actuators.motor");
  const std::string p = "actuators.motor";
  check_known_keys(j, p,
                   {"n_max_pos_rpm", "n_max_neg_rpm", "n_min_pos_rpm", "n_min_neg_rpm",
                    "n_acc_rpm_per_s", "n_dec_rpm_per_s", "gain", "lag_s", "dead_time_s"});
  m.n_max_pos = num(j, p, "n_max_pos_rpm", m.n_max_pos);
  m.n_max_neg = num(j, p, "n_max_neg_rpm", m.n_max_neg);
  m.n_min_pos = num(j, p, "n_min_pos_rpm", m.n_min_pos);
  m.n_min_neg = num(j, p, "n_min_neg_rpm", m.n_min_neg);
  m.n_acc = num(j, p, "n_acc_rpm_per_s", m.n_acc);
  m.n_dec = num(j, p, "n_dec_rpm_per_s", m.n_dec);
  m.gain = num(j, p, "gain", m.gain);
  m.lag_s = num(j, p, "lag_s", m.lag_s);
  m.dead_time_s = num(j, p, "dead_time_s", m.dead_time_s);
  if (!(m.n_max_pos > 0.0) || !(m.n_max_neg < 0.0)) {
    fail(p, "n_max_pos_rpm must be positive and n_max_neg_rpm negative");
  }
  if (m.n_min_pos < 0.0 || m.n_min_pos > m.n_max_pos) fail(p + ".n_min_pos_rpm", "out of range");
  if (m.n_min_neg > 0.0 || m.n_min_neg < m.n_max_neg) fail(p + ".n_min_neg_rpm", "out of range");
  if (!(m.n_acc > 0.0) || !(m.n_dec > 0.0)) fail(p, "rate limits must be positive");
  if (!(m.gain > 0.0)) fail(p + ".gain", "must be positive");
  if (!(m.lag_s > 0.0)) fail(p + ".lag_s", "must be positive");
  if (m.dead_time_s < 0.0) fail(p + ".dead_time_s", "must be non-negative");
}

inline void parse_curve(const json& j, const std::string& p, PropellerCurve& c) {
  expect_object(j, p);
  check_known_keys(j, p, {"p1_pos", "p1_neg", "p2_pos", "p2_neg"});
  c.p1_pos = num(j, p, "p1_pos", c.p1_pos);
  c.p1_neg = num(j, p, "p1_neg", c.p1_neg);
  c.p2_pos = num(j, p, "p2_pos", c.p2_pos);
  c.p2_neg = num(j, p, "p2_neg", c.p2_neg);
  if (!(c.p1_pos > 0.0) || !(c.p1_neg > 0.0)) fail(p, "p1 constants must be positive");
}

inline void parse_geometry(const json& j, ActuatorGeometry& g) {
  const std::string p = "actuators.geometry";
  expect_object(j, p);
  check_known_keys(j, p, {"alpha_deg", "beta_deg", "lever_arms_m"});
  g.alpha_rad = num(j, p, "alpha_deg", g.alpha_rad * 180.0 / kPi) * kPi / 180.0;
  g.beta_rad = num(j, p, "beta_deg", g.beta_rad * 180.0 / kPi) * kPi / 180.0;
  if (j.contains("lever_arms_m")) {
    const auto& arr = j.at("lever_arms_m");
    if (!arr.is_array() || arr.size() != 6) fail(p + ".lever_arms_m", "expected 6 rows");
    for (std::size_t i = 0; i < 6; ++i) {
      const auto& row = arr[i];
      if (!row.is_array() || row.size() != 3 || !row[0].is_number()) {
        fail(p + ".lever_arms_m", "each row must hold 3 numbers");
      }
      g.lever_arm_m[i] = Vec3(row[0].get<double>(), row[1].get<double>(), row[2].get<double>());
    }
  }
}

inline void parse_simulation(const json& j, RunConfig& rc) {
  const std::string p = "simulation";
  expect_object(j, p);
  check_known_keys(j, p,
                   {"dt_s", "duration_s", "v_const", "initial_eta", "initial_nu", "current_mps",
                    "commands_csv"});
  auto& s = rc.simulation;
  s.dt_s = num(j, p, "dt_s", s.dt_s);
  s.duration_s = num(j, p, "duration_s", s.duration_s);
  if (!(s.dt_s > 0.0)) fail(p + ".dt_s", "must be positive");
  if (s.duration_s < 0.0) fail(p + ".duration_s", "must be non-negative");
  s.v_const = vec6(j, p, "v_const", s.v_const);
  for (int i = 0; i < 6; ++i) {
    if (s.v_const[i] != 0.0 && s.v_const[i] != 1.0) fail(p + ".v_const", "entries must be 0 or 1");
  }
  s.initial.eta = vec6(j, p, "initial_eta", s.initial.eta);
  s.initial.nu = vec6(j, p, "initial_nu", s.initial.nu);
  s.current_mps = vec3(j, p, "current_mps", s.current_mps);
  if (j.contains("commands_csv")) rc.commands_csv = text(j, p, "commands_csv");
}

inline void parse_channel(const json& j, const std::string& p, ChannelConfig& ch) {
  expect_object(j, p);
  check_known_keys(j, p,
                   {"u_mps", "kp", "ki", "kd", "integrator_limit", "reset_bias",
                    "derivative_on_error"});
  std::array<double, 6> fallback_u = ch.gains.u_mps;
  ch.gains.u_mps = fixed_array<6>(j, p, "u_mps", fallback_u);
  ch.gains.kp = fixed_array<6>(j, p, "kp", ch.gains.kp);
  ch.gains.ki = fixed_array<6>(j, p, "ki", ch.gains.ki);
  ch.gains.kd = fixed_array<6>(j, p, "kd", ch.gains.kd);
  try {
    ch.gains.validate();
  } catch (const std::invalid_argument& e) {
    fail(p, e.what());
  }
  ch.pid.integrator_limit = num(j, p, "integrator_limit", ch.pid.integrator_limit);
  ch.pid.reset_bias = num(j, p, "reset_bias", ch.pid.reset_bias);
  ch.pid.derivative_on_error = flag(j, p, "derivative_on_error", ch.pid.derivative_on_error);
  if (!(ch.pid.integrator_limit > 0.0)) fail(p + ".integrator_limit", "must be positive");
}

inline void parse_optimizer(const json& j, OptimizerConfig& o) {
  const std::string p = "optimizer";
  expect_object(j, p);
  check_known_keys(j, p,
                   {"mu", "lambda", "generations", "sigma_init", "sigma_min", "sigma_max",
                    "threads", "simplex_max_iter", "simplex_tol"});
  o.mu = static_cast<int>(num(j, p, "mu", o.mu));
  o.lambda = static_cast<int>(num(j, p, "lambda", o.lambda));
  o.generations = static_cast<int>(num(j, p, "generations", o.generations));
  o.sigma_init = num(j, p, "sigma_init", o.sigma_init);
  o.sigma_min = num(j, p, "sigma_min", o.sigma_min);
  o.sigma_max = num(j, p, "sigma_max", o.sigma_max);
  o.threads = static_cast<int>(num(j, p, "threads", o.threads));
  o.simplex_max_iter = static_cast<int>(num(j, p, "simplex_max_iter", o.simplex_max_iter));
  o.simplex_tol = num(j, p, "simplex_tol", o.simplex_tol);
  if (o.mu < 1 || o.lambda < 1) fail(p, "mu and lambda must be at least 1");
  if (o.generations < 0) fail(p + ".generations", "must be non-negative");
  if (!(o.sigma_init > 0.0)) fail(p + ".sigma_init", "must be positive");
  if (o.threads < 1) fail(p + ".threads", "must be at least 1");
}

inline void parse_identification(const json& j, RunConfig& rc) {
  const std::string p = "identification";
  expect_object(j, p);
  check_known_keys(j, p, {"stages"});
  if (!j.contains("stages") || !j.at("stages").is_array() || j.at("stages").empty()) {
    fail(p + ".stages", "expected a non-empty array");
  }
  for (std::size_t si = 0; si < j.at("stages").size(); ++si) {
    const auto& js = j.at("stages")[si];
    const std::string sp = p + ".stages[" + std::to_string(si) + "]";
    expect_object(js, sp);
    check_known_keys(js, sp, {"name", "v_const", "channels", "reference_csv", "params",
                              "q_ceiling"});
    IdentStageSetup st;
    st.stage.name = text(js, sp, "name");
    st.stage.v_const = vec6(js, sp, "v_const", Vec6::Ones());
    for (int i = 0; i < 6; ++i) {
      if (st.stage.v_const[i] != 0.0 && st.stage.v_const[i] != 1.0) {
        fail(sp + ".v_const", "entries must be 0 or 1");
      }
    }
    if (!js.contains("channels") || !js.at("channels").is_array() || js.at("channels").empty()) {
      fail(sp + ".channels", "expected a non-empty array of channel names");
    }
    for (const auto& c : js.at("channels")) {
      if (!c.is_string()) fail(sp + ".channels", "expected channel names");
      try {
        st.stage.channels.push_back(channel_from_name(c.get<std::string>()));
      } catch (const std::invalid_argument& e) {
        fail(sp + ".channels", e.what());
      }
    }
    st.reference_csv = text(js, sp, "reference_csv");
    st.stage.q_ceiling = num(js, sp, "q_ceiling", st.stage.q_ceiling);
    if (!js.contains("params") || !js.at("params").is_array()) {
      fail(sp + ".params", "expected an array");
    }
    for (std::size_t pi = 0; pi < js.at("params").size(); ++pi) {
      const auto& jp = js.at("params")[pi];
      const std::string pp = sp + ".params[" + std::to_string(pi) + "]";
      expect_object(jp, pp);
      check_known_keys(jp, pp, {"name", "low", "high"});
      ParamSpec spec;
      spec.name = text(jp, pp, "name");
      spec.low = num(jp, pp, "low");
      spec.high = num(jp, pp, "high");
      if (!(spec.low < spec.high)) fail(pp, "low must be below high");
      ModelParams probe;
      try {
        get_param(probe, spec.name);
      } catch (const std::invalid_argument&) {
        fail(pp + ".name", "unknown coefficient '" + spec.name + "'");
      }
      st.stage.params.push_back(spec);
    }
    rc.stages.push_back(std::move(st));
  }
}

inline void parse_tuning(const json& j, RunConfig& rc) {
  const std::string p = "tuning";
  expect_object(j, p);
  check_known_keys(j, p,
                   {"channel", "scored_channel", "steps", "horizon_s", "initial_value",
                    "settle_s", "corridor_frac", "wi_u", "wi_o", "literal_upper_bound_term",
                    "gain_low", "gain_high", "envelope"});
  auto& t = rc.tuning;
  const std::string chan = text(j, p, "channel", std::string("surge"));
  if (chan == "surge") t.control = ControlChannel::surge;
  else if (chan == "depth") t.control = ControlChannel::depth;
  else if (chan == "pitch") t.control = ControlChannel::pitch;
  else if (chan == "heading") t.control = ControlChannel::heading;
  else fail(p + ".channel", "expected surge, depth, pitch or heading");
  try {
    t.scored = channel_from_name(text(j, p, "scored_channel", std::string("u")));
  } catch (const std::invalid_argument& e) {
    fail(p + ".scored_channel", e.what());
  }
  if (!j.contains("steps") || !j.at("steps").is_array() || j.at("steps").empty()) {
    fail(p + ".steps", "expected a non-empty array");
  }
  t.scenario.steps.clear();
  for (std::size_t i = 0; i < j.at("steps").size(); ++i) {
    const auto& js = j.at("steps")[i];
    const std::string sp = p + ".steps[" + std::to_string(i) + "]";
    expect_object(js, sp);
    check_known_keys(js, sp, {"t_s", "value"});
    t.scenario.steps.emplace_back(num(js, sp, "t_s"), num(js, sp, "value"));
  }
  t.scenario.horizon_s = num(j, p, "horizon_s", t.scenario.horizon_s);
  t.scenario.initial_value = num(j, p, "initial_value", t.scenario.initial_value);
  t.settle_s = num(j, p, "settle_s", t.settle_s);
  t.corridor_frac = num(j, p, "corridor_frac", t.corridor_frac);
  t.wi_u = num(j, p, "wi_u", t.wi_u);
  t.wi_o = num(j, p, "wi_o", t.wi_o);
  t.literal_upper_bound_term = flag(j, p, "literal_upper_bound_term", t.literal_upper_bound_term);
  if (j.contains("gain_low")) {
    const auto& g = j.at("gain_low");
    expect_object(g, p + ".gain_low");
    check_known_keys(g, p + ".gain_low", {"kp", "ki", "kd"});
    t.low = {num(g, p + ".gain_low", "kp", t.low.kp), num(g, p + ".gain_low", "ki", t.low.ki),
             num(g, p + ".gain_low", "kd", t.low.kd)};
  }
  if (j.contains("gain_high")) {
    const auto& g = j.at("gain_high");
    expect_object(g, p + ".gain_high");
    check_known_keys(g, p + ".gain_high", {"kp", "ki", "kd"});
    t.high = {num(g, p + ".gain_high", "kp", t.high.kp),
              num(g, p + ".gain_high", "ki", t.high.ki),
              num(g, p + ".gain_high", "kd", t.high.kd)};
  }
  if (j.contains("envelope")) {
    const auto& e = j.at("envelope");
    const std::string ep = p + ".envelope";
    expect_object(e, ep);
    check_known_keys(e, ep, {"t", "lower", "upper"});
    const auto read_list = [&](const char* key) {
      if (!e.contains(key) || !e.at(key).is_array()) fail(ep, "expected arrays t, lower, upper");
      std::vector<double> out;
      for (const auto& v : e.at(key)) {
        if (!v.is_number()) fail(ep + "." + key, "expected numbers");
        out.push_back(v.get<double>());
      }
      return out;
    };
    t.envelope.t = read_list("t");
    t.envelope.lower = read_list("lower");
    t.envelope.upper = read_list("upper");
    try {
      t.envelope.validate();
    } catch (const std::invalid_argument& ex) {
      fail(ep, ex.what());
    }
  }
  try {
    t.scenario.validate();
  } catch (const std::invalid_argument& e) {
    fail(p + ".steps", e.what());
  }
}

inline void parse_regression(const json& j, RunConfig& rc) {
  const std::string p = "regression";
  expect_object(j, p);
  check_known_keys(j, p, {"origin_threshold_N", "datasets"});
  rc.regression.origin_threshold_N = num(j, p, "origin_threshold_N", 0.0);
  if (!j.contains("datasets") || !j.at("datasets").is_array() || j.at("datasets").empty()) {
    fail(p + ".datasets", "expected a non-empty array");
  }
  for (std::size_t i = 0; i < j.at("datasets").size(); ++i) {
    const auto& jd = j.at("datasets")[i];
    const std::string dp = p + ".datasets[" + std::to_string(i) + "]";
    expect_object(jd, dp);
    check_known_keys(jd, dp, {"name", "csv", "group", "direction"});
    RegressionDataset d;
    d.name = text(jd, dp, "name");
    d.csv = text(jd, dp, "csv");
    const std::string group = text(jd, dp, "group", std::string("stern"));
    if (group == "stern") d.stern_group = true;
    else if (group == "vertical") d.stern_group = false;
    else fail(dp + ".group", "expected stern or vertical");
    const std::string dir = text(jd, dp, "direction", std::string("forward"));
    if (dir == "forward") d.forward = true;
    else if (dir == "backward") d.forward = false;
    else fail(dp + ".direction", "expected forward or backward");
    rc.regression.datasets.push_back(std::move(d));
  }
}

}  // namespace cfg_detail

/// Loads and validates a JSON run configuration. Parse errors carry
/// file:line:col, semantic errors the offending field path.
inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string body = buffer.str();

  cfg_detail::json j;
  try {
    j = cfg_detail::json::parse(body);
  } catch (const cfg_detail::json::parse_error& e) {
    throw ConfigError(path + ":" + cfg_detail::line_of_offset(body, e.byte) + ": " + e.what());
  }
  cfg_detail::expect_object(j, "(root)");
  cfg_detail::check_known_keys(j, "(root)",
                               {"seed", "model", "actuators", "simulation", "guidance",
                                "controller", "optimizer", "identification", "tuning",
                                "regression"});

  RunConfig rc;
  rc.base_dir = std::filesystem::absolute(std::filesystem::path(path)).parent_path();
  if (j.contains("seed")) {
    const auto& s = j.at("seed");
    if (!s.is_number_unsigned()) cfg_detail::fail("seed", "expected a non-negative integer");
    rc.seed = s.get<std::uint64_t>();
  }
  if (j.contains("model")) cfg_detail::parse_model(j.at("model"), rc.model);
  if (j.contains("actuators")) {
    const auto& ja = j.at("actuators");
    cfg_detail::expect_object(ja, "actuators");
    cfg_detail::check_known_keys(ja, "actuators",
                                 {"motor", "stern_curve", "vertical_curve", "geometry"});
    if (ja.contains("motor")) cfg_detail::parse_motor(ja.at("motor"), rc.plant.motor);
    if (ja.contains("stern_curve")) {
      cfg_detail::parse_curve(ja.at("stern_curve"), "actuators.stern_curve", rc.plant.stern_curve);
    }
    if (ja.contains("vertical_curve")) {
      cfg_detail::parse_curve(ja.at("vertical_curve"), "actuators.vertical_curve",
                              rc.plant.vertical_curve);
    }
    if (ja.contains("geometry")) cfg_detail::parse_geometry(ja.at("geometry"), rc.plant.geometry);
  }
  if (j.contains("simulation")) cfg_detail::parse_simulation(j.at("simulation"), rc);
  if (j.contains("guidance")) {
    const auto& jg = j.at("guidance");
    cfg_detail::expect_object(jg, "guidance");
    cfg_detail::check_known_keys(jg, "guidance", {"plan_csv", "acceptance_radius_m"});
    rc.plan_csv = cfg_detail::text(jg, "guidance", "plan_csv", std::string());
    rc.plan.acceptance_radius_m =
        cfg_detail::num(jg, "guidance", "acceptance_radius_m", rc.plan.acceptance_radius_m);
    if (!(rc.plan.acceptance_radius_m > 0.0)) {
      cfg_detail::fail("guidance.acceptance_radius_m", "must be positive");
    }
  }
  if (j.contains("controller")) {
    const auto& jc = j.at("controller");
    cfg_detail::expect_object(jc, "controller");
    cfg_detail::check_known_keys(jc, "controller", {"surge", "depth", "pitch", "heading"});
    if (jc.contains("surge")) cfg_detail::parse_channel(jc.at("surge"), "controller.surge", rc.controller.surge);
    if (jc.contains("depth")) cfg_detail::parse_channel(jc.at("depth"), "controller.depth", rc.controller.depth);
    if (jc.contains("pitch")) cfg_detail::parse_channel(jc.at("pitch"), "controller.pitch", rc.controller.pitch);
    if (jc.contains("heading")) {
      cfg_detail::parse_channel(jc.at("heading"), "controller.heading", rc.controller.heading);
    }
  }
  if (j.contains("optimizer")) cfg_detail::parse_optimizer(j.at("optimizer"), rc.optimizer);
  if (j.contains("identification")) cfg_detail::parse_identification(j.at("identification"), rc);
  if (j.contains("tuning")) cfg_detail::parse_tuning(j.at("tuning"), rc);
  if (j.contains("regression")) cfg_detail::parse_regression(j.at("regression"), rc);
  return rc;
}

/// Serializes the model block in the config schema (the identify command
/// writes its result in this form so it can be pasted back).
inline nlohmann::json model_to_json(const ModelParams& m) {
  nlohmann::json coeffs;
  for (const char* name :
       {"C_Ix", "C_Iy", "C_Xud", "C_Yvd", "C_Zwd", "C_Kpd", "C_Mqd", "C_Nrd", "X_u", "Y_v",
        "Z_w", "K_p", "M_q", "N_r", "C_Dx", "C_Dy", "C_Dz", "C_Dp", "C_Dq", "C_Dr", "C_f"}) {
    coeffs[name] = get_param(m, name);
  }
  return nlohmann::json{{"mass_kg", m.mass_kg},
                        {"length_m", m.length_m},
                        {"radius_m", m.radius_m},
                        {"fin_ref_length_m", m.fin_ref_length_m},
                        {"fluid_density_kgm3", m.fluid_density_kgm3},
                        {"weight_N", m.weight_N},
                        {"buoyancy_N", m.buoyancy_N},
                        {"cg_offset_m", {m.cg_offset_m[0], m.cg_offset_m[1], m.cg_offset_m[2]}},
                        {"cb_offset_m", {m.cb_offset_m[0], m.cb_offset_m[1], m.cb_offset_m[2]}},
                        {"coefficients", coeffs}};
}

/// Serializes one controller channel in the config schema (the tune command
/// writes its result in this form).
inline nlohmann::json channel_to_json(const ChannelConfig& ch) {
  const auto arr = [](const std::array<double, 6>& a) {
    return nlohmann::json(std::vector<double>(a.begin(), a.end()));
  };
  nlohmann::json out{{"u_mps", arr(ch.gains.u_mps)},
                     {"kp", arr(ch.gains.kp)},
                     {"ki", arr(ch.gains.ki)},
                     {"kd", arr(ch.gains.kd)},
                     {"reset_bias", ch.pid.reset_bias},
                     {"derivative_on_error", ch.pid.derivative_on_error}};
  if (std::isfinite(ch.pid.integrator_limit)) out["integrator_limit"] = ch.pid.integrator_limit;
  return out;
}

}  // namespace auvpilot

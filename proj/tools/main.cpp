// Command-line front end: simulate | regress | identify | tune.
// Exit codes: 0 success, 2 usage or input errors, 3 run-time failures.

#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "auvpilot/auvpilot.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitRuntime = 3;

/// Input-side problem (bad flags, unreadable config, malformed CSV).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON run configuration")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", args.out_dir, "output directory (created if missing)")->required();
  cmd->add_option("--seed", args.seed, "override the config seed");
}

auvpilot::RunConfig load(const CommonArgs& args) {
  auvpilot::RunConfig rc;
  try {
    rc = auvpilot::load_config(args.config_path);
  } catch (const auvpilot::ConfigError& e) {
    throw UsageError(e.what());
  }
  if (args.seed) rc.seed = *args.seed;
  std::filesystem::create_directories(args.out_dir);
  return rc;
}

std::string out_path(const CommonArgs& args, const std::string& name) {
  return (std::filesystem::path(args.out_dir) / name).string();
}

void write_json(const std::string& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << j.dump(2) << '\n';
}

void write_history_csv(const std::string& path, const std::vector<double>& history) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error(path + ": cannot open for writing");
  out << "iteration,q\n";
  for (std::size_t i = 0; i < history.size(); ++i) {
    out << i << ',' << auvpilot::format_double(history[i]) << '\n';
  }
}

// ---------------------------------------------------------------- simulate

int run_simulate(const CommonArgs& args, const std::string& mode) {
  auvpilot::RunConfig rc = load(args);
  auvpilot::Simulator sim(rc.model, rc.plant, rc.simulation);

  auvpilot::TrajectoryLog log;
  nlohmann::json summary;
  summary["mode"] = mode;

  if (mode == "open") {
    if (rc.commands_csv.empty()) {
      throw UsageError("open-loop simulation needs simulation.commands_csv");
    }
    auto rows = auvpilot::read_commands_csv(rc.resolve(rc.commands_csv));
    log = sim.run(auvpilot::hold_commands(std::move(rows)));
  } else {
    if (rc.plan_csv.empty()) {
      throw UsageError("closed-loop simulation needs guidance.plan_csv");
    }
    auvpilot::WaypointPlan plan = rc.plan;
    plan.waypoints = auvpilot::read_waypoints_csv(rc.resolve(rc.plan_csv));
    plan.validate();

    struct Mission {
      auvpilot::WaypointPlan plan;
      auvpilot::GuidanceState guidance;
      std::vector<double> reach_times;
    };
    auto mission = std::make_shared<Mission>();
    mission->plan = plan;

    auvpilot::Autopilot autopilot(rc.model, rc.plant, rc.controller);
    const auvpilot::ReferenceSource refs =
        [mission](double t, const auvpilot::VehicleState& s) {
          const std::size_t before = mission->guidance.target_index();
          const bool was_complete = mission->guidance.mission_complete();
          auvpilot::References r = mission->guidance.advance(s.eta, mission->plan);
          if (mission->guidance.target_index() != before ||
              (mission->guidance.mission_complete() && !was_complete)) {
            mission->reach_times.push_back(t);
          }
          return r;
        };
    log = sim.run(auvpilot::closed_loop(autopilot, refs, rc.simulation.dt_s));

    summary["mission_complete"] = mission->guidance.mission_complete();
    summary["waypoints_reached"] = mission->reach_times.size();
    summary["reach_times_s"] = mission->reach_times;
    summary["infeasible_ticks"] = autopilot.diagnostics().infeasible_ticks;
  }

  const auto& last = log.rows.back();
  summary["duration_s"] = last.t;
  summary["rows"] = log.rows.size();
  summary["final_position_m"] = {last.eta[0], last.eta[1], last.eta[2]};
  summary["final_attitude_rad"] = {last.eta[3], last.eta[4], last.eta[5]};
  summary["final_velocity_mps"] = {last.nu[0], last.nu[1], last.nu[2]};

  auvpilot::write_trajectory_csv(out_path(args, "trajectory.csv"), log);
  write_json(out_path(args, "summary.json"), summary);
  std::cout << "simulate: " << log.rows.size() << " rows -> " << out_path(args, "trajectory.csv")
            << '\n';
  return kExitOk;
}

// ----------------------------------------------------------------- regress

int run_regress(const CommonArgs& args) {
  auvpilot::RunConfig rc = load(args);
  if (rc.regression.datasets.empty()) {
    throw UsageError("regress needs a regression.datasets section");
  }

  nlohmann::json report;
  report["datasets"] = nlohmann::json::array();

  struct GroupFits {
    std::optional<auvpilot::QuadraticFit> forward, backward;
  };
  GroupFits stern, vertical;

  for (const auto& ds : rc.regression.datasets) {
    const auto samples = auvpilot::read_surge_csv(rc.resolve(ds.csv));
    const auvpilot::QuadraticFit fit =
        auvpilot::fit_quadratic(samples, rc.regression.origin_threshold_N);
    nlohmann::json jd;
    jd["name"] = ds.name;
    jd["group"] = ds.stern_group ? "stern" : "vertical";
    jd["direction"] = ds.forward ? "forward" : "backward";
    jd["samples"] = samples.size();
    jd["a"] = {fit.a[0], fit.a[1], fit.a[2]};
    if (std::isfinite(fit.b_det)) jd["b_det"] = fit.b_det;
    jd["origin_forced"] = fit.origin_forced;
    report["datasets"].push_back(jd);

    GroupFits& g = ds.stern_group ? stern : vertical;
    (ds.forward ? g.forward : g.backward) = fit;
  }

  const auto emit_curve = [&report](const char* key, const GroupFits& g,
                                    const auvpilot::PropellerCurve& base) {
    if (!g.forward || !g.backward) return;
    const auvpilot::PropellerCurve c = auvpilot::curve_from_fits(base, *g.forward, *g.backward);
    report[key] = {{"p1_pos", c.p1_pos},
                   {"p1_neg", c.p1_neg},
                   {"p2_pos", c.p2_pos},
                   {"p2_neg", c.p2_neg}};
  };
  emit_curve("stern_curve", stern, rc.plant.stern_curve);
  emit_curve("vertical_curve", vertical, rc.plant.vertical_curve);

  write_json(out_path(args, "regression.json"), report);
  std::cout << "regress: " << rc.regression.datasets.size() << " datasets -> "
            << out_path(args, "regression.json") << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------- identify

int run_identify(const CommonArgs& args) {
  auvpilot::RunConfig rc = load(args);
  if (rc.stages.empty()) throw UsageError("identify needs identification.stages");

  auvpilot::ModelParams model = rc.model;
  nlohmann::json report;
  report["stages"] = nlohmann::json::array();
  bool ceiling_exceeded = false;

  for (std::size_t i = 0; i < rc.stages.size(); ++i) {
    const auto& st = rc.stages[i];
    const auto reference = auvpilot::read_trajectory_csv(rc.resolve(st.reference_csv));
    auvpilot::OptimizerConfig opt = rc.optimizer;
    opt.seed = rc.seed + i;  // stage-distinct but reproducible streams
    const auvpilot::StageResult res = auvpilot::run_stage(model, rc.plant, st.stage, reference, opt);

    nlohmann::json js;
    js["name"] = st.stage.name;
    js["q_initial"] = res.q_initial;
    js["q_final"] = res.q_final;
    js["evaluations"] = res.evaluations;
    js["params"] = nlohmann::json::array();
    for (const auto& spec : st.stage.params) {
      js["params"].push_back({{"name", spec.name},
                              {"start", auvpilot::get_param(model, spec.name)},
                              {"value", auvpilot::get_param(res.updated, spec.name)},
                              {"low", spec.low},
                              {"high", spec.high}});
    }
    if (std::isfinite(st.stage.q_ceiling)) {
      js["q_ceiling"] = st.stage.q_ceiling;
      js["within_ceiling"] = res.q_final <= st.stage.q_ceiling;
      ceiling_exceeded = ceiling_exceeded || res.q_final > st.stage.q_ceiling;
    }
    report["stages"].push_back(js);
    write_history_csv(out_path(args, "q_history_" + st.stage.name + ".csv"), res.history);
    model = res.updated;
    std::cout << "identify[" << st.stage.name << "]: Q " << res.q_initial << " -> " << res.q_final
              << " (" << res.evaluations << " evaluations)\n";
  }

  write_json(out_path(args, "identified_model.json"),
             nlohmann::json{{"model", auvpilot::model_to_json(model)}});
  write_json(out_path(args, "identification_report.json"), report);
  if (ceiling_exceeded) {
    std::cerr << "identify: a stage finished above its quality ceiling\n";
    return kExitRuntime;
  }
  return kExitOk;
}

// -------------------------------------------------------------------- tune

int run_tune(const CommonArgs& args) {
  auvpilot::RunConfig rc = load(args);
  if (rc.tuning.scenario.steps.empty()) throw UsageError("tune needs a tuning.steps section");

  auvpilot::OptimizerConfig opt = rc.optimizer;
  opt.seed = rc.seed;
  const auvpilot::TuneResult res =
      auvpilot::tune(rc.model, rc.plant, rc.controller, rc.simulation, rc.tuning, opt);

  const char* names[] = {"surge", "depth", "pitch", "heading"};
  const char* channel = names[static_cast<int>(rc.tuning.control)];

  auvpilot::AutopilotSetup tuned_setup = rc.controller;
  auvpilot::detail::table_for(tuned_setup, rc.tuning.control) = res.tuned;
  const auvpilot::ChannelConfig* tuned_channel = nullptr;
  switch (rc.tuning.control) {
    case auvpilot::ControlChannel::surge: tuned_channel = &tuned_setup.surge; break;
    case auvpilot::ControlChannel::depth: tuned_channel = &tuned_setup.depth; break;
    case auvpilot::ControlChannel::pitch: tuned_channel = &tuned_setup.pitch; break;
    case auvpilot::ControlChannel::heading: tuned_channel = &tuned_setup.heading; break;
  }

  write_json(out_path(args, "tuned_schedule.json"),
             nlohmann::json{{"channel", channel},
                            {"gains", auvpilot::channel_to_json(*tuned_channel)}});

  nlohmann::json report;
  report["channel"] = channel;
  report["q_initial"] = res.q_initial;
  report["q_final"] = res.q_final;
  report["evaluations"] = res.evaluations;
  report["per_step_q"] = res.per_step_q;
  write_json(out_path(args, "tuning_report.json"), report);
  write_history_csv(out_path(args, "q_history_tuning.csv"), res.history);
  auvpilot::write_trajectory_csv(out_path(args, "tuned_trajectory.csv"), res.final_log);

  std::cout << "tune[" << channel << "]: Q " << res.q_initial << " -> " << res.q_final << " ("
            << res.evaluations << " evaluations)\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AUV autopilot design workflow: simulation, actuator regression, "
               "model identification, controller tuning"};
  app.require_subcommand(1);

  CommonArgs sim_args, reg_args, ident_args, tune_args;
  std::string mode = "open";

  CLI::App* sim = app.add_subcommand("simulate", "integrate the vehicle model");
  add_common(sim, sim_args);
  sim->add_option("--mode", mode, "open (command file) or closed (waypoint autopilot)")
      ->check(CLI::IsMember({"open", "closed"}));

  CLI::App* reg = app.add_subcommand("regress", "fit propeller curves from static tests");
  add_common(reg, reg_args);

  CLI::App* ident = app.add_subcommand("identify", "fit model coefficients to reference runs");
  add_common(ident, ident_args);

  CLI::App* tune = app.add_subcommand("tune", "search controller gain schedules");
  add_common(tune, tune_args);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (sim->parsed()) return run_simulate(sim_args, mode);
    if (reg->parsed()) return run_regress(reg_args);
    if (ident->parsed()) return run_identify(ident_args);
    return run_tune(tune_args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const auvpilot::CsvError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const auvpilot::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

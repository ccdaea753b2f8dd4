#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "auvpilot/simulator.hpp"

namespace auvpilot {

/// Thrown on malformed CSV input; carries file and line for diagnostics.
class CsvError : public std::runtime_error {
 public:
  CsvError(const std::string& path, std::size_t line, const std::string& what)
      : std::runtime_error(path + ":" + std::to_string(line) + ": " + what) {}
};

/// Shortest decimal form that parses back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& path, std::size_t line) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc{} || res.ptr != end) {
    throw CsvError(path, line, "not a number: '" + std::string(s) + "'");
  }
  return v;
}

inline std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      break;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError(path, 0, "cannot open file");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

inline constexpr std::string_view kTrajectoryHeader =
    "t,n1,n2,n3,n4,n5,n6,na1,na2,na3,na4,na5,na6,x,y,z,phi,theta,psi,u,v,w,p,q,r";

inline void write_trajectory_csv(const std::string& path, const TrajectoryLog& log) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << kTrajectoryHeader << '\n';
  for (const auto& r : log.rows) {
    out << format_double(r.t);
    for (double v : r.n_cmd) out << ',' << format_double(v);
    for (double v : r.n_actual) out << ',' << format_double(v);
    for (int i = 0; i < 6; ++i) out << ',' << format_double(r.eta[i]);
    for (int i = 0; i < 6; ++i) out << ',' << format_double(r.nu[i]);
    out << '\n';
  }
}

inline TrajectoryLog read_trajectory_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines[0] != kTrajectoryHeader) {
    throw CsvError(path, 1, "expected trajectory header '" + std::string(kTrajectoryHeader) + "'");
  }
  TrajectoryLog log;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split_line(lines[i]);
    if (f.size() != 25) throw CsvError(path, i + 1, "expected 25 columns");
    LogRow row;
    std::size_t c = 0;
    row.t = parse_double(f[c++], path, i + 1);
    for (auto& v : row.n_cmd) v = parse_double(f[c++], path, i + 1);
    for (auto& v : row.n_actual) v = parse_double(f[c++], path, i + 1);
    for (int k = 0; k < 6; ++k) row.eta[k] = parse_double(f[c++], path, i + 1);
    for (int k = 0; k < 6; ++k) row.nu[k] = parse_double(f[c++], path, i + 1);
    log.rows.push_back(row);
  }
  if (log.rows.size() >= 2) log.dt_s = log.rows[1].t - log.rows[0].t;
  return log;
}

/// One static surge-test measurement: revolution speed and resulting force.
struct SurgeSample {
  double n_rpm = 0.0;
  double force_N = 0.0;
};

inline void write_surge_csv(const std::string& path, const std::vector<SurgeSample>& samples) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "n_rpm,force_N\n";
  for (const auto& s : samples) {
    out << format_double(s.n_rpm) << ',' << format_double(s.force_N) << '\n';
  }
}

inline std::vector<SurgeSample> read_surge_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines[0] != "n_rpm,force_N") {
    throw CsvError(path, 1, "expected header 'n_rpm,force_N'");
  }
  std::vector<SurgeSample> samples;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split_line(lines[i]);
    if (f.size() != 2) throw CsvError(path, i + 1, "expected 2 columns");
    samples.push_back({parse_double(f[0], path, i + 1), parse_double(f[1], path, i + 1)});
  }
  return samples;
}

struct Waypoint {
  double x = 0.0, y = 0.0, z = 0.0;
  double u_d = 0.0;  ///< desired transit speed toward this waypoint, m/s
};

inline std::vector<Waypoint> read_waypoints_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty() || lines[0] != "x,y,z,u_d") {
    throw CsvError(path, 1, "expected header 'x,y,z,u_d'");
  }
  std::vector<Waypoint> wps;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split_line(lines[i]);
    if (f.size() != 4) throw CsvError(path, i + 1, "expected 4 columns");
    wps.push_back({parse_double(f[0], path, i + 1), parse_double(f[1], path, i + 1),
                   parse_double(f[2], path, i + 1), parse_double(f[3], path, i + 1)});
  }
  return wps;
}

inline void write_waypoints_csv(const std::string& path, const std::vector<Waypoint>& wps) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "x,y,z,u_d\n";
  for (const auto& w : wps) {
    out << format_double(w.x) << ',' << format_double(w.y) << ',' << format_double(w.z) << ','
        << format_double(w.u_d) << '\n';
  }
}

/// Timed open-loop command row.
struct CommandRow {
  double t = 0.0;
  std::array<double, 6> n{};
};

/// Reads either a plain command table (t,n1..n6) or a full trajectory log,
/// from which the commanded columns are taken.
inline std::vector<CommandRow> read_commands_csv(const std::string& path) {
  const auto lines = read_lines(path);
  if (lines.empty()) throw CsvError(path, 1, "empty file");
  if (lines[0] == kTrajectoryHeader) {
    const auto log = read_trajectory_csv(path);
    std::vector<CommandRow> rows;
    rows.reserve(log.rows.size());
    for (const auto& r : log.rows) rows.push_back({r.t, r.n_cmd});
    return rows;
  }
  if (lines[0] != "t,n1,n2,n3,n4,n5,n6") {
    throw CsvError(path, 1, "expected header 't,n1,n2,n3,n4,n5,n6'");
  }
  std::vector<CommandRow> rows;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto f = split_line(lines[i]);
    if (f.size() != 7) throw CsvError(path, i + 1, "expected 7 columns");
    CommandRow row;
    row.t = parse_double(f[0], path, i + 1);
    for (int k = 0; k < 6; ++k) row.n[k] = parse_double(f[k + 1], path, i + 1);
    rows.push_back(row);
  }
  if (rows.empty()) throw CsvError(path, 1, "no command rows");
  return rows;
}

/// Zero-order-hold command source over timed rows (rows must be time-sorted).
inline CommandSource hold_commands(std::vector<CommandRow> rows) {
  return [rows = std::move(rows)](double t, const VehicleState&) {
    const auto it = std::upper_bound(rows.begin(), rows.end(), t + 1e-12,
                                     [](double v, const CommandRow& r) { return v < r.t; });
    return it == rows.begin() ? it->n : std::prev(it)->n;
  };
}

/// Index-aligned replay of a logged command sequence: step k of a new run at
/// the same dt sees exactly the commands recorded at row k.
inline CommandSource replay_commands(const TrajectoryLog& log) {
  std::vector<std::array<double, 6>> cmds;
  cmds.reserve(log.rows.size());
  for (const auto& r : log.rows) cmds.push_back(r.n_cmd);
  const double dt = log.dt_s;
  return [cmds = std::move(cmds), dt](double t, const VehicleState&) {
    auto k = static_cast<std::size_t>(std::llround(t / dt));
    if (k >= cmds.size()) k = cmds.size() - 1;
    return cmds[k];
  };
}

}  // namespace auvpilot

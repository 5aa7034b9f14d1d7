#include "aaslip/serialization.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

#include "aaslip/error.hpp"

namespace aaslip {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Non-finite numbers become null rather than invalid JSON.
ordered_json number(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

ordered_json config_json(const AppConfig& config) {
  ordered_json out = ordered_json::object();
  std::istringstream in(to_ini(config));
  std::string section;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    if (line.front() == '[') {
      section = line.substr(1, line.size() - 2);
      out[section] = ordered_json::object();
      continue;
    }
    const auto eq = line.find(" = ");
    out[section][line.substr(0, eq)] = line.substr(eq + 3);
  }
  return out;
}

AppConfig config_from_json(const json& j) {
  std::ostringstream ini;
  for (const auto& [section, body] : j.items()) {
    ini << "[" << section << "]\n";
    for (const auto& [key, value] : body.items()) {
      ini << key << " = " << value.get<std::string>() << "\n";
    }
  }
  std::istringstream in(ini.str());
  return parse_config(in);
}

ordered_json report_json(const SolveReport& r) {
  return {{"converged", r.converged},
          {"constraint_violation", number(r.constraint_violation)},
          {"objective_value", number(r.objective_value)},
          {"iterations", r.iterations},
          {"wall_time", number(r.wall_time)},
          {"termination_reason", r.termination_reason},
          {"attempts", r.attempts}};
}

ordered_json trajectory_json(const Trajectory& traj) {
  ordered_json knots = ordered_json::array();
  for (std::size_t i = 0; i < traj.num_knots(); ++i) {
    const StanceState& s = traj.states[i];
    const ControlInput& u = traj.controls[i];
    knots.push_back({{"t", traj.knot_time(i)},
                     {"x", s.x}, {"y", s.y}, {"xdot", s.xdot}, {"ydot", s.ydot},
                     {"r0", s.r0}, {"r0dot", s.r0dot},
                     {"r0ddot", u.leg_accel}, {"tau", u.ankle_torque}});
  }
  return {{"duration", traj.duration}, {"knots", std::move(knots)}};
}

Trajectory trajectory_from_json(const json& j) {
  Trajectory traj;
  traj.duration = j.at("duration").get<double>();
  for (const json& k : j.at("knots")) {
    StanceState s;
    s.x = k.at("x").get<double>();
    s.y = k.at("y").get<double>();
    s.xdot = k.at("xdot").get<double>();
    s.ydot = k.at("ydot").get<double>();
    s.r0 = k.at("r0").get<double>();
    s.r0dot = k.at("r0dot").get<double>();
    traj.states.push_back(s);
    traj.controls.push_back({k.at("r0ddot").get<double>(), k.at("tau").get<double>()});
  }
  traj.validate();
  return traj;
}

}  // namespace

std::string solution_json(const AppConfig& config, const GaitSolution& solution) {
  ordered_json j;
  j["kind"] = "aaslip-solution";
  j["config"] = config_json(config);
  j["report"] = report_json(solution.report);
  j["energy"] = number(solution.energy);
  j["distance"] = number(solution.distance);
  j["cot"] = number(solution.cot);
  j["trajectory"] = trajectory_json(solution.trajectory);
  return j.dump(2) + "\n";
}

SolutionFile parse_solution_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    if (j.at("kind").get<std::string>() != "aaslip-solution") {
      throw ConfigError("not a solution document");
    }
    SolutionFile f;
    f.config = config_from_json(j.at("config"));
    f.trajectory = trajectory_from_json(j.at("trajectory"));
    const json& r = j.at("report");
    f.report.converged = r.at("converged").get<bool>();
    f.report.constraint_violation =
        r.at("constraint_violation").is_null() ? NAN : r.at("constraint_violation").get<double>();
    f.report.objective_value =
        r.at("objective_value").is_null() ? NAN : r.at("objective_value").get<double>();
    f.report.iterations = r.at("iterations").get<int>();
    f.report.termination_reason = r.at("termination_reason").get<std::string>();
    f.energy = j.at("energy").is_null() ? NAN : j.at("energy").get<double>();
    f.distance = j.at("distance").is_null() ? NAN : j.at("distance").get<double>();
    f.cot = j.at("cot").is_null() ? NAN : j.at("cot").get<double>();
    if (static_cast<int>(f.trajectory.num_knots()) != f.config.transcription.num_knots) {
      throw ConfigError("knot count does not match the embedded configuration");
    }
    return f;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("corrupt solution file: ") + e.what());
  } catch (const InvalidArgumentError& e) {
    throw ConfigError(std::string("corrupt solution file: ") + e.what());
  }
}

std::string verify_json(const AppConfig& config, const LimitCycleReport& r,
                        const VerifyTolerances& tol) {
  ordered_json j;
  j["kind"] = "aaslip-verification";
  j["config"] = config_json(config);
  j["passed"] = r.passed(tol);
  j["tolerances"] = {{"constraint", tol.constraint}, {"reintegration", tol.reintegration}};
  j["steps_per_interval"] = r.steps_per_interval;
  j["integration_ok"] = r.integration_ok;
  if (!r.integration_ok) j["integration_error"] = r.integration_error;
  j["max_constraint_violation"] = number(r.max_constraint_violation());
  j["max_defect"] = number(r.max_defect);
  j["terminal_deviation"] = number(r.terminal_deviation);
  j["max_knot_deviation"] = number(r.max_knot_deviation);
  j["rk4_error_estimate"] = number(r.rk4_error_estimate);
  j["apex"] = {{"height_in_error", r.apex_height_in_error},
               {"velocity_in_error", r.apex_velocity_in_error},
               {"height_out_error", r.apex_height_out_error},
               {"velocity_out_error", r.apex_velocity_out_error},
               {"reintegrated_height_error", number(r.reintegrated_apex_height_error)},
               {"reintegrated_velocity_error", number(r.reintegrated_apex_velocity_error)}};
  j["set_point_error"] = r.set_point_error;
  j["touchdown_force"] = r.touchdown_force;
  j["liftoff_force"] = r.liftoff_force;
  j["margins"] = {{"cop", number(r.min_cop_margin)},
                  {"force", number(r.min_force_margin)},
                  {"length", number(r.min_length_margin)},
                  {"min_height", number(r.min_height)}};
  j["max_abs_torque"] = r.max_abs_torque;
  j["cop_margin_lower"] = r.cop_margin_lower;
  j["cop_margin_upper"] = r.cop_margin_upper;
  return j.dump(2) + "\n";
}

std::string utility_point_json(const AppConfig& config, const UtilityPoint& p,
                               const std::vector<Axis>& axes) {
  ordered_json j;
  j["kind"] = "aaslip-utility-point";
  j["config"] = config_json(config);
  ordered_json coords = ordered_json::object();
  for (std::size_t a = 0; a < axes.size() && a < p.coords.size(); ++a) {
    coords[to_string(axes[a])] = p.coords[a];
  }
  j["coords"] = std::move(coords);
  j["cot_ankle"] = number(p.cot_ankle);
  j["cot_no_ankle"] = number(p.cot_no_ankle);
  j["utility"] = number(p.utility);
  j["max_abs_torque"] = number(p.max_abs_torque);
  j["report_ankle"] = report_json(p.report_ankle);
  j["report_no_ankle"] = report_json(p.report_no_ankle);
  const auto dump = [&](const Eigen::VectorXd& x, bool ankle) -> ordered_json {
    if (x.size() == 0) return nullptr;
    const DecisionLayout layout(config.transcription.num_knots, ankle);
    if (x.size() != layout.size()) return nullptr;
    return trajectory_json(layout.decode(x));
  };
  j["trajectory_ankle"] = dump(p.x_ankle, true);
  j["trajectory_no_ankle"] = dump(p.x_no_ankle, false);
  return j.dump(2) + "\n";
}

std::string gradient_json(const AppConfig& config, const GradientSurvey& s,
                          std::uint64_t seed, double threshold) {
  ordered_json j;
  j["kind"] = "aaslip-gradient-check";
  j["config"] = config_json(config);
  j["seed"] = seed;
  j["threshold"] = threshold;
  j["passed"] = s.worst_error < threshold;
  j["worst_error"] = s.worst_error;
  j["worst_entry"] = s.worst.worst_label;
  j["analytic"] = s.worst.analytic;
  j["finite_difference"] = s.worst.finite_difference;
  j["per_point"] = s.per_point;
  return j.dump(2) + "\n";
}

}  // namespace aaslip

#include "aaslip/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <sstream>
#include <vector>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "aaslip/error.hpp"

namespace aaslip {

namespace {

namespace pt = boost::property_tree;

// Shortest text that parses back to the same double.
std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string t = boost::trim_copy(text);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || end != t.data() + t.size()) {
    throw ConfigError(key + ": expected a number, got '" + text + "'");
  }
  return v;
}

long long parse_integer(const std::string& key, const std::string& text) {
  const std::string t = boost::trim_copy(text);
  long long v = 0;
  const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || end != t.data() + t.size()) {
    throw ConfigError(key + ": expected an integer, got '" + text + "'");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = boost::to_lower_copy(boost::trim_copy(text));
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(key + ": expected true or false, got '" + text + "'");
}

struct Binding {
  std::string section;
  std::string key;
  std::function<void(const std::string& full_key, const std::string&)> set;
  std::function<std::string()> get;
};

Binding number(std::string section, std::string key, double& ref) {
  return {std::move(section), std::move(key),
          [&ref](const std::string& k, const std::string& v) { ref = parse_double(k, v); },
          [&ref] { return format_double(ref); }};
}

template <typename Int>
Binding integer(std::string section, std::string key, Int& ref) {
  return {std::move(section), std::move(key),
          [&ref](const std::string& k, const std::string& v) {
            ref = static_cast<Int>(parse_integer(k, v));
          },
          [&ref] { return std::to_string(ref); }};
}

Binding flag(std::string section, std::string key, bool& ref) {
  return {std::move(section), std::move(key),
          [&ref](const std::string& k, const std::string& v) { ref = parse_bool(k, v); },
          [&ref] { return std::string(ref ? "true" : "false"); }};
}

std::vector<Binding> bindings(AppConfig& c) {
  std::vector<Binding> b;
  b.push_back(number("task", "apex_height", c.task.apex_height));
  b.push_back(number("task", "apex_velocity", c.task.apex_velocity));
  b.push_back(flag("task", "ankle", c.task.ankle_enabled));

  ModelParams& m = c.model;
  b.push_back(number("model", "mass", m.mass));
  b.push_back(number("model", "gravity", m.gravity));
  b.push_back(number("model", "stiffness", m.stiffness));
  b.push_back(number("model", "damping", m.damping));
  b.push_back(number("model", "leg_length", m.leg_length));
  b.push_back(number("model", "foot_length", m.foot_length));

  CostParams& k = c.cost;
  b.push_back(number("cost", "alpha", k.alpha));
  b.push_back(number("cost", "leg_loss", k.leg_loss));
  b.push_back(number("cost", "ankle_loss", k.ankle_loss));
  b.push_back(number("cost", "smoothing", k.smoothing));

  TranscriptionConfig& t = c.transcription;
  b.push_back(integer("transcription", "knots", t.num_knots));
  b.push_back(number("transcription", "duration_min", t.duration.lower));
  b.push_back(number("transcription", "duration_max", t.duration.upper));
  b.push_back(number("transcription", "leg_length_min", t.leg_length.lower));
  b.push_back(number("transcription", "leg_length_max", t.leg_length.upper));
  b.push_back(number("transcription", "leg_force_min", t.leg_force.lower));
  b.push_back(number("transcription", "leg_force_max", t.leg_force.upper));
  b.push_back(number("transcription", "leg_accel_min", t.leg_accel.lower));
  b.push_back(number("transcription", "leg_accel_max", t.leg_accel.upper));
  b.push_back(number("transcription", "velocity_limit", t.velocity_limit));
  b.push_back(number("transcription", "torque_limit", t.torque_limit));
  b.push_back(number("transcription", "min_body_height", t.min_body_height));
  b.push_back(number("transcription", "min_stride", t.min_stride));

  SolverOptions& s = c.solve.solver;
  b.push_back(number("solver", "tolerance", s.tolerance));
  b.push_back(number("solver", "optimality_tolerance", s.optimality_tolerance));
  b.push_back(integer("solver", "max_iterations", s.max_iterations));
  b.push_back(number("solver", "max_wall_time", s.max_wall_time));
  b.push_back(integer("solver", "multistart", s.multistart));
  b.push_back(number("solver", "perturbation", s.perturbation));
  b.push_back(integer("solver", "seed", s.seed));
  b.push_back({"solver", "hessian",
               [&s](const std::string& key, const std::string& v) {
                 const std::string t2 = boost::to_lower_copy(boost::trim_copy(v));
                 if (t2 == "exact") s.hessian = HessianMode::kExact;
                 else if (t2 == "bfgs") s.hessian = HessianMode::kBfgs;
                 else throw ConfigError(key + ": expected exact or bfgs, got '" + v + "'");
               },
               [&s] { return std::string(s.hessian == HessianMode::kExact ? "exact" : "bfgs"); }});
  b.push_back({"solver", "continuation",
               [&c](const std::string& key, const std::string& v) {
                 std::vector<std::string> parts;
                 const std::string t2 = boost::trim_copy(v);
                 c.solve.continuation.clear();
                 if (t2.empty() || t2 == "none") return;
                 boost::split(parts, t2, boost::is_any_of(", "), boost::token_compress_on);
                 for (const std::string& p : parts) {
                   c.solve.continuation.push_back(parse_double(key, p));
                 }
               },
               [&c] {
                 if (c.solve.continuation.empty()) return std::string("none");
                 std::string out;
                 for (double e : c.solve.continuation) {
                   if (!out.empty()) out += ", ";
                   out += format_double(e);
                 }
                 return out;
               }});
  b.push_back(integer("solver", "stage_iterations", c.solve.stage_iterations));
  b.push_back(number("solver", "stage_optimality", c.solve.stage_optimality));
  b.push_back(integer("solver", "warm_iterations", c.solve.warm_iterations));

  ExperimentConfig& e = c.experiments;
  b.push_back(number("experiments", "apex_min", e.apex_range.lower));
  b.push_back(number("experiments", "apex_max", e.apex_range.upper));
  b.push_back(integer("experiments", "sweep_points", e.sweep_points));
  b.push_back(integer("experiments", "grid_apex_points", e.grid_apex_points));
  b.push_back(integer("experiments", "grid_axis2_points", e.grid_axis2_points));
  b.push_back({"experiments", "axis2",
               [&e](const std::string& key, const std::string& v) {
                 try {
                   e.axis2 = parse_axis(boost::trim_copy(v));
                 } catch (const InvalidArgumentError& err) {
                   throw ConfigError(key + ": " + err.what());
                 }
               },
               [&e] { return to_string(e.axis2); }});
  b.push_back(number("experiments", "alpha_min", e.alpha_range.lower));
  b.push_back(number("experiments", "alpha_max", e.alpha_range.upper));
  b.push_back(number("experiments", "velocity_min", e.velocity_range.lower));
  b.push_back(number("experiments", "velocity_max", e.velocity_range.upper));
  b.push_back(number("experiments", "damping_min", e.damping_range.lower));
  b.push_back(number("experiments", "damping_max", e.damping_range.upper));
  b.push_back(integer("experiments", "jobs", e.jobs));
  b.push_back(flag("experiments", "warm_start", e.warm_start));
  return b;
}

void check_range(const std::string& name, const Interval& r) {
  if (!(r.lower <= r.upper) || !std::isfinite(r.lower) || !std::isfinite(r.upper)) {
    throw ConfigError(name + ": range is empty or not finite");
  }
}

}  // namespace

std::string to_string(Axis axis) {
  switch (axis) {
    case Axis::kApexHeight: return "apex_height";
    case Axis::kAlpha: return "alpha";
    case Axis::kApexVelocity: return "apex_velocity";
    case Axis::kDamping: return "damping";
  }
  return "unknown";
}

Axis parse_axis(const std::string& name) {
  const std::string n = boost::replace_all_copy(boost::to_lower_copy(name), "-", "_");
  if (n == "apex_height") return Axis::kApexHeight;
  if (n == "alpha") return Axis::kAlpha;
  if (n == "apex_velocity" || n == "velocity") return Axis::kApexVelocity;
  if (n == "damping") return Axis::kDamping;
  throw InvalidArgumentError("unknown sweep axis '" + name +
                             "' (apex_height, alpha, apex_velocity, damping)");
}

Interval ExperimentConfig::axis2_range() const {
  switch (axis2) {
    case Axis::kAlpha: return alpha_range;
    case Axis::kApexVelocity: return velocity_range;
    case Axis::kDamping: return damping_range;
    case Axis::kApexHeight: break;
  }
  return apex_range;
}

void ExperimentConfig::validate() const {
  check_range("experiments.apex", apex_range);
  check_range("experiments.alpha", alpha_range);
  check_range("experiments.velocity", velocity_range);
  check_range("experiments.damping", damping_range);
  if (sweep_points < 1 || grid_apex_points < 1 || grid_axis2_points < 1) {
    throw ConfigError("experiments: point counts must be positive");
  }
  if (axis2 == Axis::kApexHeight) {
    throw ConfigError("experiments.axis2: the second axis cannot be apex_height");
  }
  if (jobs < 1) throw ConfigError("experiments.jobs must be at least 1");
}

void AppConfig::validate() const {
  try {
    task.validate();
    model.validate();
    cost.validate();
    transcription.validate();
    solve.validate();
  } catch (const InvalidArgumentError& e) {
    throw ConfigError(e.what());
  } catch (const InfeasibleTaskError& e) {
    throw ConfigError(e.what());
  }
  experiments.validate();
}

AppConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  AppConfig config;
  const std::vector<Binding> table = bindings(config);
  for (const auto& [section, body] : tree) {
    if (body.empty()) {
      throw ConfigError("key '" + section + "' is outside any section");
    }
    for (const auto& [key, value] : body) {
      const std::string full = section + "." + key;
      const auto it = std::find_if(table.begin(), table.end(), [&](const Binding& b) {
        return b.section == section && b.key == key;
      });
      if (it == table.end()) throw ConfigError("unknown configuration key '" + full + "'");
      it->set(full, value.data());
    }
  }
  return config;
}

AppConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open configuration file '" + path + "'");
  return parse_config(in);
}

std::string to_ini(const AppConfig& config) {
  AppConfig copy = config;
  std::ostringstream out;
  std::string section;
  for (const Binding& b : bindings(copy)) {
    if (b.section != section) {
      if (!section.empty()) out << "\n";
      section = b.section;
      out << "[" << section << "]\n";
    }
    out << b.key << " = " << b.get() << "\n";
  }
  return out.str();
}

}  // namespace aaslip

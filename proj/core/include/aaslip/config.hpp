#pragma once

// The shared INI-style configuration file:
//
//   [task]           apex_height, apex_velocity, ankle
//   [model]          mass, gravity, stiffness, damping, leg_length, foot_length
//   [cost]           alpha, leg_loss, ankle_loss, smoothing
//   [transcription]  knots, duration_min/max, leg_length_min/max, ...
//   [solver]         tolerance, max_iterations, multistart, perturbation, ...
//   [experiments]    sweep and grid ranges, resolution, jobs
//
// Every key is optional; missing keys keep the built-in defaults. Unknown
// sections or keys are errors so typos do not silently fall back.

#include <iosfwd>
#include <string>

#include "aaslip/model.hpp"
#include "aaslip/objective.hpp"
#include "aaslip/solver.hpp"
#include "aaslip/transcription.hpp"

namespace aaslip {

enum class Axis { kApexHeight, kAlpha, kApexVelocity, kDamping };

std::string to_string(Axis axis);
/// Accepts apex_height, alpha, apex_velocity, damping (and dashed forms).
Axis parse_axis(const std::string& name);

struct ExperimentConfig {
  Interval apex_range{0.6, 1.2};
  int sweep_points = 31;
  int grid_apex_points = 21;
  int grid_axis2_points = 21;
  Axis axis2 = Axis::kAlpha;
  Interval alpha_range{0.0, 1.0};
  Interval velocity_range{0.4, 1.4};
  Interval damping_range{0.1, 1.0};
  int jobs = 1;
  bool warm_start = true;

  /// Range of the second grid axis.
  Interval axis2_range() const;
  void validate() const;
};

struct AppConfig {
  GaitTask task;
  ModelParams model;
  CostParams cost;
  TranscriptionConfig transcription;
  GaitSolveOptions solve;
  ExperimentConfig experiments;

  void validate() const;
};

/// Throws ConfigError with the offending key on malformed input.
AppConfig parse_config(std::istream& in);
AppConfig load_config(const std::string& path);

/// The fully resolved configuration in the same INI format; parsing it
/// back gives the same values.
std::string to_ini(const AppConfig& config);

}  // namespace aaslip

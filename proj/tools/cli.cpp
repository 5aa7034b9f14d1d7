#include "cli.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "aaslip/config.hpp"
#include "aaslip/error.hpp"
#include "aaslip/experiments.hpp"
#include "aaslip/serialization.hpp"
#include "aaslip/solver.hpp"
#include "aaslip/verify.hpp"

namespace aaslip::cli {

namespace {

constexpr double kGradientThreshold = 1e-5;

struct CommonFlags {
  std::string config;
  std::optional<double> apex_height;
  std::optional<double> apex_velocity;
  std::optional<double> alpha;
  std::optional<double> damping;
  bool no_ankle = false;
  std::optional<int> knots;
  std::optional<double> tol;
  std::optional<int> jobs;
  std::optional<std::uint64_t> seed;
  std::string out;
};

void add_common(CLI::App* cmd, CommonFlags& f, const std::string& default_out) {
  f.out = default_out;
  cmd->add_option("--config", f.config, "INI configuration file");
  cmd->add_option("--apex-height", f.apex_height, "apex height (leg lengths)");
  cmd->add_option("--apex-velocity", f.apex_velocity, "apex forward velocity");
  cmd->add_option("--alpha", f.alpha, "cost blend: 0 work only, 1 thermal only");
  cmd->add_option("--damping", f.damping, "leg damping c");
  cmd->add_flag("--no-ankle", f.no_ankle, "solve the model without the ankle");
  cmd->add_option("--knots", f.knots, "collocation knots");
  cmd->add_option("--tol", f.tol, "constraint tolerance");
  cmd->add_option("--jobs", f.jobs, "worker threads for grids");
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--out", f.out, "output file")->capture_default_str();
}

AppConfig resolve(const CommonFlags& f) {
  AppConfig c = f.config.empty() ? AppConfig{} : load_config(f.config);
  if (f.apex_height) c.task.apex_height = *f.apex_height;
  if (f.apex_velocity) c.task.apex_velocity = *f.apex_velocity;
  if (f.alpha) c.cost.alpha = *f.alpha;
  if (f.damping) c.model.damping = *f.damping;
  if (f.no_ankle) c.task.ankle_enabled = false;
  if (f.knots) c.transcription.num_knots = *f.knots;
  if (f.tol) c.solve.solver.tolerance = *f.tol;
  if (f.jobs) c.experiments.jobs = *f.jobs;
  if (f.seed) c.solve.solver.seed = *f.seed;
  c.validate();
  return c;
}

void write_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

std::string report_path(const std::string& out) {
  std::filesystem::path p(out);
  p.replace_extension();
  return p.string() + "_report.json";
}

ExperimentContext context_of(const AppConfig& c) {
  return {c.task, c.model, c.cost, c.transcription, c.solve};
}

std::string point_name(const UtilityPoint& p, const std::vector<Axis>& axes) {
  std::ostringstream name;
  name << "point";
  for (std::size_t a = 0; a < axes.size(); ++a) {
    name << "_" << to_string(axes[a]) << "=" << p.coords[a];
  }
  name << ".json";
  return name.str();
}

int finish_experiment(const std::vector<UtilityPoint>& points,
                      const std::vector<Axis>& axes, const AppConfig& c,
                      const std::string& out_path, const std::string& dump_dir,
                      std::ostream& out, std::ostream& err) {
  write_file(out_path, utility_csv(points, axes, to_ini(c)));
  int failed = 0;
  for (const UtilityPoint& p : points) {
    if (!p.ok()) ++failed;
    if (p.needs_inspection()) {
      err << "inspect: utility " << p.utility << "% with max |tau| " << p.max_abs_torque
          << " at " << point_name(p, axes) << "\n";
    }
    if (!dump_dir.empty()) {
      write_file((std::filesystem::path(dump_dir) / point_name(p, axes)).string(),
                 utility_point_json(c, p, axes));
    }
  }
  out << "wrote " << points.size() << " points to " << out_path << "\n";
  if (failed > 0) {
    out << failed << " of " << points.size() << " points failed (empty fields in the CSV)\n";
  }
  return failed == static_cast<int>(points.size()) ? kSolveFailed : kOk;
}

ProgressFn progress_to(std::ostream& err) {
  return [&err](const UtilityPoint& p, int done, int total) {
    err << "[" << done << "/" << total << "]";
    for (double v : p.coords) err << " " << v;
    if (p.ok()) {
      err << " utility " << p.utility << "%\n";
    } else {
      err << " failed (" << p.report_no_ankle.termination_reason << " / "
          << p.report_ankle.termination_reason << ")\n";
    }
  };
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err, const Hooks& hooks) {
  CLI::App app{"Ankle-actuated SLIP gait optimization"};
  app.require_subcommand(1);

  CommonFlags solve_f, sweep_f, grid_f, grad_f;
  CLI::App* solve_cmd = app.add_subcommand("solve", "optimize one gait");
  add_common(solve_cmd, solve_f, "solution.json");

  CLI::App* sweep_cmd = app.add_subcommand("sweep", "ankle utility over apex height");
  add_common(sweep_cmd, sweep_f, "sweep.csv");
  std::string sweep_dump;
  sweep_cmd->add_option("--dump-dir", sweep_dump, "write per-point trajectories here");

  CLI::App* grid_cmd = app.add_subcommand("grid", "ankle utility over apex height x axis2");
  add_common(grid_cmd, grid_f, "grid.csv");
  std::optional<std::string> axis2;
  std::string grid_dump;
  grid_cmd->add_option("--axis2", axis2, "alpha, apex_velocity or damping");
  grid_cmd->add_option("--dump-dir", grid_dump, "write per-point trajectories here");

  CLI::App* verify_cmd = app.add_subcommand("verify", "re-check a solution file");
  std::string solution_path;
  int steps = 100;
  std::string verify_out;
  verify_cmd->add_option("solution", solution_path, "solution JSON")->required();
  verify_cmd->add_option("--steps", steps, "RK4 steps per knot interval")->capture_default_str();
  verify_cmd->add_option("--out", verify_out, "also write the report here");

  CLI::App* grad_cmd = app.add_subcommand("gradcheck", "compare derivatives with finite differences");
  add_common(grad_cmd, grad_f, "");
  int grad_points = 10;
  grad_cmd->add_option("--points", grad_points, "random points")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*solve_cmd) {
      const AppConfig c = resolve(solve_f);
      const GaitNlp nlp = build_nlp(c.task, c.model, c.cost, c.transcription);
      const GaitSolution sol = solve(nlp, nlp.initial_guess(), c.solve);
      write_file(solve_f.out, solution_json(c, sol));
      const LimitCycleReport rep = limit_cycle_report(c.task, sol.trajectory, c.model,
                                                      c.transcription);
      VerifyTolerances tol;
      tol.constraint = c.solve.solver.tolerance;
      write_file(report_path(solve_f.out), verify_json(c, rep, tol));
      out << "converged " << (sol.report.converged ? "yes" : "no") << " ("
          << sol.report.termination_reason << ", " << sol.report.iterations
          << " iterations, " << sol.report.wall_time << " s)\n";
      out << "violation " << sol.report.constraint_violation << "\n";
      out.precision(12);
      out << "CoT " << sol.cot << "\n";
      return sol.report.converged ? kOk : kSolveFailed;
    }

    if (*sweep_cmd) {
      const AppConfig c = resolve(sweep_f);
      const ExperimentConfig& e = c.experiments;
      const std::vector<double> heights =
          linspace(e.apex_range.lower, e.apex_range.upper, e.sweep_points);
      const std::vector<UtilityPoint> points =
          sweep_apex_height(heights, context_of(c), e.warm_start, progress_to(err));
      return finish_experiment(points, {Axis::kApexHeight}, c, sweep_f.out, sweep_dump,
                               out, err);
    }

    if (*grid_cmd) {
      AppConfig c = resolve(grid_f);
      if (axis2) {
        try {
          c.experiments.axis2 = parse_axis(*axis2);
        } catch (const InvalidArgumentError& ex) {
          throw ConfigError(ex.what());
        }
        c.experiments.validate();
      }
      const ExperimentConfig& e = c.experiments;
      const Interval r2 = e.axis2_range();
      SweepSpec spec{{Axis::kApexHeight, e.axis2},
                     {linspace(e.apex_range.lower, e.apex_range.upper, e.grid_apex_points),
                      linspace(r2.lower, r2.upper, e.grid_axis2_points)},
                     e.warm_start};
      try {
        spec.validate();
      } catch (const InvalidArgumentError& ex) {
        throw ConfigError(ex.what());
      }
      const std::vector<UtilityPoint> points =
          grid_2d(spec, context_of(c), e.jobs, progress_to(err));
      return finish_experiment(points, spec.axes, c, grid_f.out, grid_dump, out, err);
    }

    if (*verify_cmd) {
      if (steps < 1) throw ConfigError("--steps must be at least 1");
      std::ifstream in(solution_path, std::ios::binary);
      if (!in) throw ConfigError("cannot open solution file '" + solution_path + "'");
      std::stringstream text;
      text << in.rdbuf();
      SolutionFile sol;
      try {
        sol = parse_solution_json(text.str());
      } catch (const ConfigError& ex) {
        err << "error: " << ex.what() << "\n";
        return kVerifyFailed;
      }
      const LimitCycleReport rep = limit_cycle_report(
          sol.config.task, sol.trajectory, sol.config.model, sol.config.transcription, steps);
      VerifyTolerances tol;
      tol.constraint = sol.config.solve.solver.tolerance;
      const std::string doc = verify_json(sol.config, rep, tol);
      if (!verify_out.empty()) write_file(verify_out, doc);
      out << doc;
      return rep.passed(tol) ? kOk : kVerifyFailed;
    }

    if (*grad_cmd) {
      const AppConfig c = resolve(grad_f);
      if (grad_points < 1) throw ConfigError("--points must be at least 1");
      const GaitNlp nlp = build_nlp(c.task, c.model, c.cost, c.transcription);
      std::unique_ptr<NlpProblem> substitute;
      if (hooks.gradcheck_problem) substitute = hooks.gradcheck_problem(nlp);
      const NlpProblem& problem =
          substitute ? *substitute : static_cast<const NlpProblem&>(nlp);
      const GradientSurvey s = survey_gradients(problem, nlp.initial_guess(), grad_points,
                                                c.solve.solver.seed);
      const std::string doc = gradient_json(c, s, c.solve.solver.seed, kGradientThreshold);
      if (!grad_f.out.empty()) write_file(grad_f.out, doc);
      out << doc;
      return s.worst_error < kGradientThreshold ? kOk : kVerifyFailed;
    }
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const InvalidArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const InfeasibleTaskError& e) {
    err << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const EvaluationError& e) {
    err << "error: " << e.what() << "\n";
    return kSolveFailed;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << "\n";
    return kInternalError;
  }
  return kUsageError;
}

}  // namespace aaslip::cli

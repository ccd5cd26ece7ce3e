#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "bprk/integrator.hpp"
#include "bprk/problems.hpp"
#include "bprk/tableau.hpp"

namespace bprk {

/// Everything a CLI invocation needs. Populated from a JSON config file
/// and/or flag overrides; unset optionals fall back to problem or mode
/// defaults.
struct ExperimentConfig {
  std::string problem;
  std::string method;
  std::string mode = "fixed";        ///< "fixed" | "adaptive"
  std::string adaptation = "off";    ///< "off" | "free" | "convex"
  double dt = 0.0;
  double tol = 1e-4;
  double tol_delta = 0.0;            ///< 0: mode default
  int p_start = 0;                   ///< 0: design order
  int p_min = 1;
  std::optional<double> t_end;       ///< override the problem's horizon
  std::optional<int> n;              ///< grid-size override where applicable
  bool conservative = true;          ///< reaction4 sign flag
  std::vector<double> output_times;
  std::vector<double> dts;           ///< convergence sweep
  std::string out = "out";
  unsigned long seed = 0;

  // stability subcommand
  double re_min = -6.0, re_max = 2.0, im_min = -4.0, im_max = 4.0;
  int resolution = 400;
  std::vector<double> weights;       ///< optional weight override
};

/// Merge keys of a JSON config file into cfg (missing keys keep their
/// current values). Throws on unreadable files or unknown keys.
void load_config_file(const std::filesystem::path& file, ExperimentConfig& cfg);

/// Instantiate the problem named by the config, with overrides applied.
OdeProblem make_problem(const ExperimentConfig& cfg);
ButcherTableau make_method(const ExperimentConfig& cfg);
IntegratorConfig make_integrator_config(const ExperimentConfig& cfg);

/// Fixed 17-significant-digit formatting used for all CSV numbers.
std::string format_number(double v);

struct RunResult {
  IntegrationTrace trace;
  std::filesystem::path directory;
  int exit_code = 0;
};

/// Integrate once and write trace.csv, solution_<t>.csv snapshots,
/// solution_final.csv and summary.json into cfg.out. A failed integration
/// still writes its partial artifacts and yields exit_code 1.
RunResult run_experiment(const ExperimentConfig& cfg);

struct ConvergencePoint {
  double dt = 0.0;
  double error = 0.0;
  bool adapted = false;
  bool completed = false;
  long steps_accepted = 0;
};

struct ConvergenceResult {
  std::vector<ConvergencePoint> points;
  double slope_unadapted = 0.0;  ///< NaN when fewer than 2 unadapted points
  std::filesystem::path directory;
  int exit_code = 0;
};

/// Run the dt sweep (concurrently), compare against the problem reference
/// at the final time, and write convergence.csv + convergence_summary.json.
ConvergenceResult run_convergence(const ExperimentConfig& cfg);

/// Degrees-of-freedom table over the whole catalog as CSV (one method per
/// row, columns for target orders 1..5, blank past the design order).
std::string dof_table_csv();

/// Sample |R| for the configured method/rectangle and write stability.csv.
std::filesystem::path run_stability(const ExperimentConfig& cfg);

struct SelftestReport {
  bool passed = true;
  std::vector<std::string> lines;
};

/// Randomized property suites (seeded, deterministic): order-condition
/// residuals, invariant annihilation, boundary positivity, stability
/// containment and perturbation bounds, and simplex cross-checks.
SelftestReport run_selftest(unsigned long seed);

}  // namespace bprk

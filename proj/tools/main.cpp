// Command-line front end: run | convergence | dof-table | stability | selftest.
#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>

#include "bprk/experiment.hpp"

namespace {

// Flags shared by the integration-style subcommands. A config file is read
// first, then explicit flags override it.
void add_common_flags(CLI::App* cmd, bprk::ExperimentConfig& cfg,
                      std::string& config_file) {
  cmd->add_option("--config", config_file, "JSON config file (flags override it)");
  cmd->add_option("--problem", cfg.problem, "problem name");
  cmd->add_option("--method", cfg.method, "method name");
  cmd->add_option("--mode", cfg.mode, "fixed | adaptive");
  cmd->add_option("--dt", cfg.dt, "fixed step, or initial step in adaptive mode");
  cmd->add_option("--tol", cfg.tol, "error tolerance (adaptive mode)");
  cmd->add_option("--adaptation", cfg.adaptation, "off | free | convex");
  cmd->add_option("--p-start", cfg.p_start, "initial target order (0: design order)");
  cmd->add_option("--p-min", cfg.p_min, "lowest target order before rejecting");
  cmd->add_option("--tol-delta", cfg.tol_delta,
                  "perturbation cap (0: mode default)");
  cmd->add_option("--t-end", [&cfg](const CLI::results_t& res) {
        cfg.t_end = std::stod(res.front());
        return true;
      },
      "override the problem's final time");
  cmd->add_option("--n", [&cfg](const CLI::results_t& res) {
        cfg.n = std::stoi(res.front());
        return true;
      },
      "grid-size override for the semidiscrete problems");
  cmd->add_option("--out", cfg.out, "output directory");
  cmd->add_option("--seed", cfg.seed, "seed recorded in outputs");
}

int protect(int (*body)(bprk::ExperimentConfig&), bprk::ExperimentConfig& cfg) {
  try {
    return body(cfg);
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 2;
  }
}

int do_run(bprk::ExperimentConfig& cfg) {
  const bprk::RunResult result = bprk::run_experiment(cfg);
  const auto& trace = result.trace;
  std::printf("%s + %s: %s, %ld steps (%ld adapted), final t = %s\n",
              cfg.problem.c_str(), cfg.method.c_str(),
              trace.completed ? "completed" : ("FAILED: " + trace.failure).c_str(),
              trace.count(bprk::StepStatus::Accepted), trace.adapted_steps(),
              bprk::format_number(trace.final_time).c_str());
  std::printf("outputs in %s\n", result.directory.string().c_str());
  return result.exit_code;
}

int do_convergence(bprk::ExperimentConfig& cfg) {
  const bprk::ConvergenceResult result = bprk::run_convergence(cfg);
  for (const bprk::ConvergencePoint& p : result.points)
    std::printf("dt = %-12s error = %-22s%s\n", bprk::format_number(p.dt).c_str(),
                bprk::format_number(p.error).c_str(), p.adapted ? "  (adapted)" : "");
  std::printf("unadapted slope: %s\n",
              bprk::format_number(result.slope_unadapted).c_str());
  std::printf("outputs in %s\n", result.directory.string().c_str());
  return result.exit_code;
}

int do_dof_table(bprk::ExperimentConfig& cfg) {
  const std::string csv = bprk::dof_table_csv();
  std::fputs(csv.c_str(), stdout);
  if (!cfg.out.empty()) {
    std::filesystem::create_directories(cfg.out);
    const std::filesystem::path file = std::filesystem::path(cfg.out) / "dof_table.csv";
    std::FILE* f = std::fopen(file.string().c_str(), "wb");
    if (!f) {
      std::fprintf(stderr, "error: cannot write %s\n", file.string().c_str());
      return 2;
    }
    std::fputs(csv.c_str(), f);
    std::fclose(f);
  }
  return 0;
}

int do_stability(bprk::ExperimentConfig& cfg) {
  const std::filesystem::path file = bprk::run_stability(cfg);
  std::printf("wrote %s\n", file.string().c_str());
  return 0;
}

int do_selftest(bprk::ExperimentConfig& cfg) {
  const bprk::SelftestReport report = bprk::run_selftest(cfg.seed);
  for (const std::string& line : report.lines) std::printf("%s\n", line.c_str());
  std::printf("%s\n", report.passed ? "selftest passed" : "selftest FAILED");
  return report.passed ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"bound-preserving Runge-Kutta toolkit"};
  app.require_subcommand(1);

  bprk::ExperimentConfig cfg;
  std::string config_file;

  CLI::App* run = app.add_subcommand("run", "integrate once and write trace outputs");
  add_common_flags(run, cfg, config_file);
  run->add_option("--output-times", cfg.output_times,
                  "snapshot times (solution_<t>.csv)");

  CLI::App* conv = app.add_subcommand("convergence", "dt sweep against a reference");
  add_common_flags(conv, cfg, config_file);
  conv->add_option("--dts", cfg.dts, "step sizes to sweep")->expected(-1);

  CLI::App* dof = app.add_subcommand("dof-table",
                                     "degrees of freedom of the method catalog");
  dof->add_option("--out", cfg.out, "output directory (dof_table.csv)");

  CLI::App* stab = app.add_subcommand("stability", "sample |R(z)| over a rectangle");
  stab->add_option("--config", config_file, "JSON config file (flags override it)");
  stab->add_option("--method", cfg.method, "method name");
  stab->add_option("--weights", cfg.weights, "weight vector override")->expected(-1);
  stab->add_option("--re-min", cfg.re_min, "rectangle left edge");
  stab->add_option("--re-max", cfg.re_max, "rectangle right edge");
  stab->add_option("--im-min", cfg.im_min, "rectangle bottom edge");
  stab->add_option("--im-max", cfg.im_max, "rectangle top edge");
  stab->add_option("--resolution", cfg.resolution, "grid points per axis");
  stab->add_option("--out", cfg.out, "output directory (stability.csv)");
  stab->add_option("--seed", cfg.seed, "seed recorded in outputs");

  CLI::App* self = app.add_subcommand("selftest", "randomized property suites");
  self->add_option("--seed", cfg.seed, "random seed");

  // Parse once to learn the config file, merge it, then parse again so
  // explicit flags win over file values.
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }
  if (!config_file.empty()) {
    bprk::ExperimentConfig merged;
    try {
      bprk::load_config_file(config_file, merged);
    } catch (const std::exception& err) {
      std::fprintf(stderr, "error: %s\n", err.what());
      return 2;
    }
    cfg = merged;
    try {
      app.clear();
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      return app.exit(e);
    }
  }

  if (run->parsed()) return protect(do_run, cfg);
  if (conv->parsed()) return protect(do_convergence, cfg);
  if (dof->parsed()) return protect(do_dof_table, cfg);
  if (stab->parsed()) return protect(do_stability, cfg);
  if (self->parsed()) return protect(do_selftest, cfg);
  return 2;
}

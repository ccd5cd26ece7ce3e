#include "bprk/experiment.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <fstream>
#include <functional>
#include <future>
#include <limits>
#include <random>
#include <stdexcept>

#include "bprk/adaptation.hpp"
#include "bprk/linprog.hpp"
#include "bprk/order_conditions.hpp"
#include "bprk/stability.hpp"
#include "bprk/stepper.hpp"

namespace bprk {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

SteppingMode parse_mode(const std::string& s) {
  if (s == "fixed") return SteppingMode::FixedStep;
  if (s == "adaptive") return SteppingMode::Adaptive;
  throw std::invalid_argument("unknown mode '" + s + "' (expected fixed|adaptive)");
}

AdaptationMode parse_adaptation(const std::string& s) {
  if (s == "off") return AdaptationMode::Off;
  if (s == "free") return AdaptationMode::Free;
  if (s == "convex") return AdaptationMode::Convex;
  throw std::invalid_argument("unknown adaptation '" + s +
                              "' (expected off|free|convex)");
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + file.string() + " for writing");
  out << text;
  if (!out) throw std::runtime_error("write failed: " + file.string());
}

std::string snapshot_filename(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "solution_%g.csv", t);
  return buf;
}

std::string trace_csv(const OdeProblem& problem, const IntegrationTrace& trace) {
  std::string out =
      "t,dt,status,adapted,order,perturbation,err_truncation,err_total,"
      "weight_change,min_update_before,min_update_after,lp_solves";
  for (const LinearInvariant& inv : problem.invariants) out += ",drift_" + inv.label;
  out += "\n";
  for (const StepRecord& rec : trace.steps) {
    out += format_number(rec.t) + ',' + format_number(rec.dt) + ',' +
           to_string(rec.status) + ',' + (rec.adapted ? "1" : "0") + ',' +
           std::to_string(rec.order) + ',' + format_number(rec.perturbation) + ',' +
           format_number(rec.err_truncation) + ',' + format_number(rec.err_total) +
           ',' + format_number(rec.weight_change) + ',' +
           format_number(rec.min_update_before) + ',' +
           format_number(rec.min_update_after) + ',' + std::to_string(rec.lp_solves);
    for (std::size_t k = 0; k < problem.invariants.size(); ++k)
      out += ',' + (k < rec.invariant_drift.size()
                        ? format_number(rec.invariant_drift[k])
                        : std::string("nan"));
    out += '\n';
  }
  return out;
}

std::string solution_csv(const Eigen::VectorXd& state) {
  std::string out = "index,value\n";
  for (Eigen::Index i = 0; i < state.size(); ++i)
    out += std::to_string(i) + ',' + format_number(state(i)) + '\n';
  return out;
}

json summary_json(const ExperimentConfig& cfg, const OdeProblem& problem,
                  const IntegrationTrace& trace) {
  json j;
  j["problem"] = problem.name;
  j["method"] = cfg.method;
  j["mode"] = cfg.mode;
  j["adaptation"] = cfg.adaptation;
  j["dt"] = cfg.dt;
  j["tol"] = cfg.tol;
  j["tol_delta"] = cfg.tol_delta;
  j["p_start"] = cfg.p_start;
  j["p_min"] = cfg.p_min;
  j["seed"] = cfg.seed;
  j["t_begin"] = problem.t_begin;
  j["t_end"] = problem.t_end;
  j["completed"] = trace.completed;
  j["failure"] = trace.failure;
  j["final_time"] = trace.final_time;

  json steps;
  steps["attempted"] = static_cast<long>(trace.steps.size());
  steps["accepted"] = trace.count(StepStatus::Accepted);
  steps["rejected_error"] = trace.count(StepStatus::RejectedError);
  steps["rejected_perturbation"] = trace.count(StepStatus::RejectedPerturbation);
  steps["rejected_infeasible"] = trace.count(StepStatus::RejectedInfeasible);
  steps["adapted"] = trace.adapted_steps();
  j["steps"] = steps;

  long lp_solves = 0;
  bool any_accepted = false;
  double min_before = std::numeric_limits<double>::infinity();
  double min_after = std::numeric_limits<double>::infinity();
  double window_first = 0.0, window_last = 0.0;
  bool window_open = false;
  std::vector<double> drift_abs(problem.invariants.size(), 0.0);
  for (const StepRecord& rec : trace.steps) {
    lp_solves += rec.lp_solves;
    if (rec.status != StepStatus::Accepted) continue;
    any_accepted = true;
    min_before = std::min(min_before, rec.min_update_before);
    min_after = std::min(min_after, rec.min_update_after);
    if (rec.adapted) {
      if (!window_open) window_first = rec.t;
      window_last = rec.t + rec.dt;
      window_open = true;
    }
    for (std::size_t k = 0; k < drift_abs.size() && k < rec.invariant_drift.size(); ++k)
      drift_abs[k] = std::max(drift_abs[k], rec.invariant_drift[k]);
  }
  j["lp_solves"] = lp_solves;
  if (window_open)
    j["adaptation_window"] = json::array({window_first, window_last});
  else
    j["adaptation_window"] = nullptr;
  if (any_accepted) {
    j["min_update_before"] = min_before;
    j["min_update_after"] = min_after;
  } else {
    j["min_update_before"] = nullptr;
    j["min_update_after"] = nullptr;
  }

  json abs = json::object(), rel = json::object();
  for (std::size_t k = 0; k < problem.invariants.size(); ++k) {
    const LinearInvariant& inv = problem.invariants[k];
    const double base = std::abs(inv.weights.dot(problem.initial_state));
    abs[inv.label] = drift_abs[k];
    rel[inv.label] = drift_abs[k] / std::max(base, std::numeric_limits<double>::min());
  }
  j["invariant_drift_max"] = abs;
  j["invariant_drift_rel_max"] = rel;
  return j;
}

// Least-squares slope of log(error) against log(dt).
double fit_slope(const std::vector<double>& dts, const std::vector<double>& errs) {
  const std::size_t n = dts.size();
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log(dts[i]), y = std::log(errs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void load_config_file(const fs::path& file, ExperimentConfig& cfg) {
  std::ifstream in(file);
  if (!in) throw std::runtime_error("cannot read config file " + file.string());
  json j = json::parse(in);
  for (const auto& [key, value] : j.items()) {
    if (key == "problem")
      cfg.problem = value.get<std::string>();
    else if (key == "method")
      cfg.method = value.get<std::string>();
    else if (key == "mode")
      cfg.mode = value.get<std::string>();
    else if (key == "adaptation")
      cfg.adaptation = value.get<std::string>();
    else if (key == "dt")
      cfg.dt = value.get<double>();
    else if (key == "tol")
      cfg.tol = value.get<double>();
    else if (key == "tol_delta")
      cfg.tol_delta = value.get<double>();
    else if (key == "p_start")
      cfg.p_start = value.get<int>();
    else if (key == "p_min")
      cfg.p_min = value.get<int>();
    else if (key == "t_end")
      cfg.t_end = value.get<double>();
    else if (key == "n")
      cfg.n = value.get<int>();
    else if (key == "conservative")
      cfg.conservative = value.get<bool>();
    else if (key == "output_times")
      cfg.output_times = value.get<std::vector<double>>();
    else if (key == "dts")
      cfg.dts = value.get<std::vector<double>>();
    else if (key == "out")
      cfg.out = value.get<std::string>();
    else if (key == "seed")
      cfg.seed = value.get<unsigned long>();
    else if (key == "re_min")
      cfg.re_min = value.get<double>();
    else if (key == "re_max")
      cfg.re_max = value.get<double>();
    else if (key == "im_min")
      cfg.im_min = value.get<double>();
    else if (key == "im_max")
      cfg.im_max = value.get<double>();
    else if (key == "resolution")
      cfg.resolution = value.get<int>();
    else if (key == "weights")
      cfg.weights = value.get<std::vector<double>>();
    else
      throw std::runtime_error("unknown config key '" + key + "' in " + file.string());
  }
}

OdeProblem make_problem(const ExperimentConfig& cfg) {
  OdeProblem problem = [&] {
    if (cfg.problem == "reaction4") return reaction4(cfg.conservative);
    if (cfg.n) {
      if (cfg.problem == "advection-decay") return advection_decay(*cfg.n);
      if (cfg.problem == "diffusion") return diffusion(*cfg.n);
      if (cfg.problem == "adr") return adr(*cfg.n);
    }
    return problem_by_name(cfg.problem);
  }();
  if (cfg.t_end) problem.t_end = *cfg.t_end;
  return problem;
}

ButcherTableau make_method(const ExperimentConfig& cfg) { return builtin(cfg.method); }

IntegratorConfig make_integrator_config(const ExperimentConfig& cfg) {
  IntegratorConfig icfg;
  icfg.mode = parse_mode(cfg.mode);
  icfg.adaptation = parse_adaptation(cfg.adaptation);
  icfg.dt = cfg.dt;
  icfg.tol = cfg.tol;
  icfg.tol_delta = cfg.tol_delta;
  icfg.p_start = cfg.p_start;
  icfg.p_min = cfg.p_min;
  icfg.output_times = cfg.output_times;
  return icfg;
}

RunResult run_experiment(const ExperimentConfig& cfg) {
  const OdeProblem problem = make_problem(cfg);
  const ButcherTableau method = make_method(cfg);
  const IntegratorConfig icfg = make_integrator_config(cfg);

  IntegrationTrace trace = integrate(problem, method, icfg);

  const fs::path dir = cfg.out;
  fs::create_directories(dir);
  write_text(dir / "trace.csv", trace_csv(problem, trace));
  for (const Snapshot& snap : trace.snapshots)
    write_text(dir / snapshot_filename(snap.requested_time), solution_csv(snap.state));
  write_text(dir / "solution_final.csv", solution_csv(trace.final_state));
  write_text(dir / "summary.json", summary_json(cfg, problem, trace).dump(2) + "\n");

  RunResult result;
  result.exit_code = trace.completed ? 0 : 1;
  result.trace = std::move(trace);
  result.directory = dir;
  return result;
}

ConvergenceResult run_convergence(const ExperimentConfig& cfg) {
  if (cfg.dts.empty())
    throw std::invalid_argument("convergence study needs a non-empty dt list");
  const OdeProblem problem = make_problem(cfg);
  const ButcherTableau method = make_method(cfg);
  const double dt_fine = *std::min_element(cfg.dts.begin(), cfg.dts.end());
  const Eigen::VectorXd reference = reference_solution(problem, problem.t_end, dt_fine);

  // One integration per dt, run concurrently; results are assembled in the
  // input order afterwards so the output is independent of scheduling.
  std::vector<std::future<ConvergencePoint>> futures;
  futures.reserve(cfg.dts.size());
  for (const double dt : cfg.dts)
    futures.push_back(std::async(std::launch::async, [&, dt] {
      IntegratorConfig icfg = make_integrator_config(cfg);
      icfg.dt = dt;
      icfg.output_times.clear();
      const IntegrationTrace trace = integrate(problem, method, icfg);
      ConvergencePoint point;
      point.dt = dt;
      point.completed = trace.completed;
      point.adapted = trace.adapted_steps() > 0;
      point.steps_accepted = trace.count(StepStatus::Accepted);
      point.error = trace.completed
                        ? (trace.final_state - reference).lpNorm<Eigen::Infinity>()
                        : std::numeric_limits<double>::quiet_NaN();
      return point;
    }));

  ConvergenceResult result;
  for (auto& f : futures) result.points.push_back(f.get());

  std::vector<double> fit_dts, fit_errs;
  for (const ConvergencePoint& p : result.points)
    if (p.completed && !p.adapted && p.error > 0.0) {
      fit_dts.push_back(p.dt);
      fit_errs.push_back(p.error);
    }
  result.slope_unadapted = fit_slope(fit_dts, fit_errs);

  const fs::path dir = cfg.out;
  fs::create_directories(dir);
  std::string csv = "dt,error,adapted,steps_accepted\n";
  for (const ConvergencePoint& p : result.points)
    csv += format_number(p.dt) + ',' + format_number(p.error) + ',' +
           (p.adapted ? "1" : "0") + ',' + std::to_string(p.steps_accepted) + '\n';
  write_text(dir / "convergence.csv", csv);

  json j;
  j["problem"] = problem.name;
  j["method"] = cfg.method;
  j["mode"] = cfg.mode;
  j["adaptation"] = cfg.adaptation;
  j["tol"] = cfg.tol;
  j["t_end"] = problem.t_end;
  j["reference"] = problem.reference == ReferenceKind::MatrixExponential
                       ? "matrix-exponential"
                       : "fine-integration";
  j["slope_unadapted"] = result.slope_unadapted;
  j["unadapted_points"] = static_cast<long>(fit_dts.size());
  json points = json::array();
  for (const ConvergencePoint& p : result.points) {
    json pj;
    pj["dt"] = p.dt;
    pj["error"] = p.error;
    pj["adapted"] = p.adapted;
    pj["completed"] = p.completed;
    pj["steps_accepted"] = p.steps_accepted;
    points.push_back(pj);
  }
  j["points"] = points;
  write_text(dir / "convergence_summary.json", j.dump(2) + "\n");

  result.directory = dir;
  for (const ConvergencePoint& p : result.points)
    if (!p.completed) result.exit_code = 1;
  return result;
}

std::string dof_table_csv() {
  std::string out = "method,stages,design_order,dof_p1,dof_p2,dof_p3,dof_p4,dof_p5\n";
  for (const std::string& name : builtin_names()) {
    const ButcherTableau t = builtin(name);
    out += name + ',' + std::to_string(t.stages()) + ',' + std::to_string(t.order);
    for (int p = 1; p <= 5; ++p) {
      out += ',';
      if (p <= std::min(t.order, kMaxConditionOrder))
        out += std::to_string(degrees_of_freedom(t, p));
    }
    out += '\n';
  }
  return out;
}

std::filesystem::path run_stability(const ExperimentConfig& cfg) {
  const ButcherTableau t = make_method(cfg);
  Eigen::VectorXd w = t.b;
  if (!cfg.weights.empty()) {
    if (static_cast<Eigen::Index>(cfg.weights.size()) != t.stages())
      throw std::invalid_argument("weights length does not match the stage count");
    w = Eigen::Map<const Eigen::VectorXd>(cfg.weights.data(), t.stages());
  }
  const StabilitySample sample = sample_region(t, w, cfg.re_min, cfg.re_max,
                                               cfg.im_min, cfg.im_max,
                                               cfg.resolution, cfg.resolution);
  std::string csv = "re,im,abs_r\n";
  for (int iy = 0; iy < sample.ny; ++iy)
    for (int ix = 0; ix < sample.nx; ++ix)
      csv += format_number(sample.re_at(ix)) + ',' + format_number(sample.im_at(iy)) +
             ',' +
             format_number(sample.magnitude[static_cast<std::size_t>(iy) * sample.nx +
                                            ix]) +
             '\n';
  const fs::path dir = cfg.out;
  fs::create_directories(dir);
  const fs::path file = dir / "stability.csv";
  write_text(file, csv);
  return file;
}

namespace {

// Brute-force reference for small LPs with x >= 0 and a bounded feasible
// set: try every choice of n tight constraints among the equality rows,
// inequality rows and coordinate planes, keep the feasible intersections
// and take the best objective. Exponential, so callers keep n <= 6.
LpSolution enumerate_vertices(const LinearProgram& lp) {
  const Eigen::Index n = lp.variables();
  const Eigen::Index ne = lp.eq_rhs.size();
  const Eigen::Index ni = lp.ineq_rhs.size();
  const Eigen::Index rows = ne + ni + n;
  constexpr double kFeas = 1e-9;

  LpSolution best;
  best.status = LpStatus::Infeasible;
  std::vector<Eigen::Index> pick;
  std::function<void(Eigen::Index)> recurse = [&](Eigen::Index first) {
    if (static_cast<Eigen::Index>(pick.size()) == n) {
      bool all_eq = true;
      for (Eigen::Index r = 0; r < ne; ++r)
        if (std::find(pick.begin(), pick.end(), r) == pick.end()) all_eq = false;
      if (!all_eq) return;
      Eigen::MatrixXd M(n, n);
      Eigen::VectorXd rhs(n);
      for (Eigen::Index k = 0; k < n; ++k) {
        const Eigen::Index r = pick[k];
        if (r < ne) {
          M.row(k) = lp.eq_matrix.row(r);
          rhs(k) = lp.eq_rhs(r);
        } else if (r < ne + ni) {
          M.row(k) = lp.ineq_matrix.row(r - ne);
          rhs(k) = lp.ineq_rhs(r - ne);
        } else {
          M.row(k).setZero();
          M(k, r - ne - ni) = 1.0;
          rhs(k) = 0.0;
        }
      }
      const Eigen::FullPivLU<Eigen::MatrixXd> lu(M);
      if (!lu.isInvertible()) return;
      const Eigen::VectorXd x = lu.solve(rhs);
      if ((x.array() < -kFeas).any()) return;
      if (ne && ((lp.eq_matrix * x - lp.eq_rhs).cwiseAbs().array() > kFeas).any())
        return;
      if (ni && ((lp.ineq_matrix * x - lp.ineq_rhs).array() > kFeas).any()) return;
      const double value = lp.objective.dot(x);
      if (best.status != LpStatus::Optimal || value < best.objective_value) {
        best.status = LpStatus::Optimal;
        best.objective_value = value;
        best.x = x;
      }
      return;
    }
    for (Eigen::Index r = first; r < rows; ++r) {
      pick.push_back(r);
      recurse(r + 1);
      pick.pop_back();
    }
  };
  recurse(0);
  return best;
}

// Random bounded LP: nonnegative variables, a capping row that keeps the
// feasible set a polytope, a few random inequalities and sometimes an
// equality anchored at a random nonnegative point (so it is frequently,
// but not always, satisfiable).
LinearProgram random_lp(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nvar(2, 5), nrow(0, 3), coin(0, 1);
  auto half = [&rng] {
    std::uniform_int_distribution<int> d(-4, 4);
    return 0.5 * d(rng);
  };
  const int n = nvar(rng);
  LinearProgram lp;
  lp.objective.resize(n);
  for (int i = 0; i < n; ++i) lp.objective(i) = half();
  const int m = nrow(rng);
  lp.ineq_matrix.resize(m + 1, n);
  lp.ineq_rhs.resize(m + 1);
  for (int r = 0; r < m; ++r) {
    for (int i = 0; i < n; ++i) lp.ineq_matrix(r, i) = half();
    lp.ineq_rhs(r) = half() + 1.0;
  }
  lp.ineq_matrix.row(m).setOnes();
  lp.ineq_rhs(m) = 10.0;
  if (coin(rng)) {
    lp.eq_matrix.resize(1, n);
    for (int i = 0; i < n; ++i) lp.eq_matrix(0, i) = half();
    if (coin(rng)) {
      Eigen::VectorXd x0(n);
      for (int i = 0; i < n; ++i) x0(i) = 0.25 * std::uniform_int_distribution<int>(0, 8)(rng);
      lp.eq_rhs = lp.eq_matrix * x0;
    } else {
      lp.eq_rhs.resize(1);
      lp.eq_rhs(0) = half();
    }
  }
  return lp;
}

struct Check {
  std::string name;
  bool ok = true;
  std::string detail;
};

}  // namespace

SelftestReport run_selftest(unsigned long seed) {
  std::mt19937_64 rng(seed);
  std::vector<Check> checks;

  // Order-condition residuals of every catalog method and companion vector.
  {
    Check c;
    c.name = "order-conditions";
    for (const std::string& name : builtin_names()) {
      const ButcherTableau t = builtin(name);
      const OrderConditionSystem sys =
          assemble(t, std::min(t.order, kMaxConditionOrder));
      const double res = sys.residual(t.b);
      if (res > 1e-10) {
        c.ok = false;
        c.detail = name + " residual " + format_number(res);
      }
      for (const EmbeddedWeights& e : t.embedded) {
        const OrderConditionSystem esys =
            assemble(t, std::min(e.order, kMaxConditionOrder));
        if (esys.residual(e.b) > 1e-10) {
          c.ok = false;
          c.detail = name + "/" + e.label + " residual";
        }
      }
    }
    checks.push_back(c);
  }

  // Rooted-tree bookkeeping.
  {
    Check c;
    c.name = "order-condition-counts";
    int per_order[6] = {0, 0, 0, 0, 0, 0};
    for (const RootedTree& t : enumerate_trees(5)) ++per_order[t.order];
    const int expected[6] = {0, 1, 1, 2, 4, 9};
    for (int p = 1; p <= 5; ++p)
      if (per_order[p] != expected[p]) c.ok = false;
    if (condition_count(5) != 17) c.ok = false;
    checks.push_back(c);
  }

  // Linear invariants annihilate the right-hand side everywhere.
  {
    Check c;
    c.name = "invariant-annihilation";
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (const std::string& name : problem_names()) {
      const OdeProblem problem = problem_by_name(name);
      if (problem.invariants.empty()) continue;
      Eigen::VectorXd u(problem.dimension), f(problem.dimension);
      for (int draw = 0; draw < 100; ++draw) {
        for (Eigen::Index i = 0; i < u.size(); ++i)
          u(i) = 2.0 * unit(rng) * (std::abs(problem.initial_state(i)) + 1.0);
        const double t = problem.t_begin +
                         unit(rng) * (problem.t_end - problem.t_begin);
        problem.rhs(t, u, f);
        for (const LinearInvariant& inv : problem.invariants) {
          const double resid = std::abs(inv.weights.dot(f));
          if (resid > 1e-10 * inv.weights.norm() * (f.norm() + 1.0)) {
            c.ok = false;
            c.detail = name + "/" + inv.label;
          }
        }
      }
    }
    checks.push_back(c);
  }

  // On each face u_i = 0 of the nonnegative orthant the flow points inward.
  {
    Check c;
    c.name = "boundary-positivity";
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (const std::string& name : problem_names()) {
      const OdeProblem problem = problem_by_name(name);
      if (!problem.bounds.lower.size()) continue;
      Eigen::VectorXd u(problem.dimension), f(problem.dimension);
      for (int draw = 0; draw < 100; ++draw) {
        for (Eigen::Index i = 0; i < u.size(); ++i)
          u(i) = unit(rng) * (std::abs(problem.initial_state(i)) + 1.0);
        const Eigen::Index face =
            static_cast<Eigen::Index>(rng() % static_cast<unsigned long>(u.size()));
        u(face) = 0.0;
        const double t = problem.t_begin +
                         unit(rng) * (problem.t_end - problem.t_begin);
        problem.rhs(t, u, f);
        if (f(face) < -1e-10 * (1.0 + f.lpNorm<Eigen::Infinity>())) {
          c.ok = false;
          c.detail = name + " face " + std::to_string(face);
        }
      }
    }
    checks.push_back(c);
  }

  const std::vector<std::string> methods = builtin_names();
  std::uniform_real_distribution<double> re_dist(-8.0, 2.0), im_dist(-6.0, 6.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // Convex-combination stability containment.
  {
    Check c;
    c.name = "stability-containment";
    long violations = 0;
    for (int draw = 0; draw < 400; ++draw) {
      const ButcherTableau t = builtin(methods[rng() % methods.size()]);
      const Eigen::Index s = t.stages();
      Eigen::MatrixXd cols(s, t.embedded.size() + 2);
      cols.col(0) = t.b;
      for (std::size_t k = 0; k < t.embedded.size(); ++k)
        cols.col(1 + k) = t.embedded[k].b;
      Eigen::VectorXd extra(s);
      for (Eigen::Index i = 0; i < s; ++i) extra(i) = unit(rng) - 0.5;
      extra.array() -= extra.mean();  // keep the column consistent (sums to 1)
      cols.col(cols.cols() - 1) = t.b + 0.25 * extra;
      Eigen::VectorXd g(cols.cols());
      for (Eigen::Index k = 0; k < g.size(); ++k)
        g(k) = -std::log(std::max(unit(rng), 1e-12));
      g /= g.sum();
      std::vector<std::complex<double>> zs;
      for (int k = 0; k < 5; ++k) zs.emplace_back(re_dist(rng), im_dist(rng));
      violations += verify_convex_containment(t, cols, g, zs).violations;
    }
    if (violations) {
      c.ok = false;
      c.detail = std::to_string(violations) + " violations";
    }
    checks.push_back(c);
  }

  // Weight-perturbation bound on the stability function.
  {
    Check c;
    c.name = "stability-perturbation-bound";
    for (int draw = 0; draw < 2000; ++draw) {
      const ButcherTableau t = builtin(methods[rng() % methods.size()]);
      Eigen::VectorXd d(t.stages());
      for (Eigen::Index i = 0; i < d.size(); ++i) d(i) = unit(rng) - 0.5;
      const std::complex<double> z(re_dist(rng), im_dist(rng));
      if (!std::isfinite(std::abs(stability_function(t, t.b, z)))) continue;
      if (!perturbation_bound_check(t, t.b, t.b + d, z)) {
        c.ok = false;
        c.detail = t.name;
      }
    }
    checks.push_back(c);
  }

  // R(z) is affine in the weights.
  {
    Check c;
    c.name = "stability-affinity";
    for (int draw = 0; draw < 500; ++draw) {
      const ButcherTableau t = builtin(methods[rng() % methods.size()]);
      Eigen::VectorXd w1(t.stages()), w2(t.stages());
      for (Eigen::Index i = 0; i < w1.size(); ++i) {
        w1(i) = 2.0 * unit(rng) - 1.0;
        w2(i) = 2.0 * unit(rng) - 1.0;
      }
      const double theta = unit(rng);
      const std::complex<double> z(re_dist(rng), im_dist(rng));
      const std::complex<double> r1 = stability_function(t, w1, z);
      const std::complex<double> r2 = stability_function(t, w2, z);
      if (!std::isfinite(std::abs(r1)) || !std::isfinite(std::abs(r2))) continue;
      const std::complex<double> mixed =
          stability_function(t, theta * w1 + (1.0 - theta) * w2, z);
      const double err = std::abs(mixed - (theta * r1 + (1.0 - theta) * r2));
      if (err > 1e-10 * (1.0 + std::abs(r1) + std::abs(r2))) {
        c.ok = false;
        c.detail = t.name + " err " + format_number(err);
      }
    }
    checks.push_back(c);
  }

  // Simplex results against brute-force vertex enumeration.
  {
    Check c;
    c.name = "simplex-vs-enumeration";
    for (int draw = 0; draw < 200; ++draw) {
      const LinearProgram lp = random_lp(rng);
      const LpSolution got = solve(lp);
      const LpSolution want = enumerate_vertices(lp);
      if (got.status != want.status) {
        c.ok = false;
        c.detail = "status mismatch on draw " + std::to_string(draw);
        continue;
      }
      if (got.status == LpStatus::Optimal &&
          std::abs(got.objective_value - want.objective_value) >
              1e-7 * (1.0 + std::abs(want.objective_value))) {
        c.ok = false;
        c.detail = "objective mismatch on draw " + std::to_string(draw);
      }
    }
    checks.push_back(c);
  }

  SelftestReport report;
  for (const Check& c : checks) {
    std::string line = (c.ok ? "ok   " : "FAIL ") + c.name;
    if (!c.ok && !c.detail.empty()) line += " (" + c.detail + ")";
    report.lines.push_back(line);
    report.passed = report.passed && c.ok;
  }
  return report;
}

}  // namespace bprk

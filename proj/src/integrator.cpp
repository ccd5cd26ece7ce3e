// Bound-aware integration driver.
//
// Per step: compute stages, form the unadapted update, and accept it if it
// respects the bounds. Otherwise adapt the weights (free mode walks the
// target order down from p_start until the LP is feasible and the induced
// perturbation is acceptable; convex mode solves a single LP over the
// candidate columns). If nothing is acceptable the step size is halved and
// the stages recomputed. Adaptive mode then applies the combined error test
// err_T + delta <= tol with PI step-size control.

#include "bprk/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "bprk/adaptation.hpp"
#include "bprk/order_conditions.hpp"
#include "bprk/stepper.hpp"

namespace bprk {

namespace {

constexpr double kQuietNan = std::numeric_limits<double>::quiet_NaN();

double max_abs(const Eigen::VectorXd& v) {
  return v.size() ? v.cwiseAbs().maxCoeff() : 0.0;
}

}  // namespace

std::string to_string(StepStatus status) {
  switch (status) {
    case StepStatus::Accepted: return "accepted";
    case StepStatus::RejectedError: return "rejected-error";
    case StepStatus::RejectedPerturbation: return "rejected-perturbation";
    case StepStatus::RejectedInfeasible: return "rejected-infeasible";
  }
  return "unknown";
}

long IntegrationTrace::count(StepStatus status) const {
  long n = 0;
  for (const StepRecord& r : steps)
    if (r.status == status) ++n;
  return n;
}

long IntegrationTrace::adapted_steps() const {
  long n = 0;
  for (const StepRecord& r : steps)
    if (r.status == StepStatus::Accepted && r.adapted) ++n;
  return n;
}

double WeightedNorm::operator()(const Eigen::VectorXd& v,
                                const Eigen::VectorXd& scale_state) const {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double w = v(i) / (atol + rtol * std::abs(scale_state(i)));
    acc += w * w;
  }
  return std::sqrt(acc / static_cast<double>(v.size()));
}

ErrorEstimate estimate_error(const Eigen::MatrixXd& F, double dt,
                             const Eigen::VectorXd& b, const Eigen::VectorXd& b_hat,
                             const Eigen::VectorXd& b_used, const WeightedNorm& norm,
                             const Eigen::VectorXd& u) {
  ErrorEstimate est;
  est.err_truncation = norm(dt * (F * (b - b_hat)), u);
  est.perturbation = norm(dt * (F * (b_used - b)), u);
  est.total = est.err_truncation + est.perturbation;
  return est;
}

double pi_step_control(double e_n, double e_prev, double dt, int p_hat) {
  const double e = std::max(e_n, 1e-14);
  const double p = static_cast<double>(p_hat);
  double factor;
  if (e_prev <= 0.0)
    factor = 0.9 * std::pow(e, -1.0 / p);
  else
    factor = 0.9 * std::pow(e, -0.7 / p) * std::pow(std::max(e_prev, 1e-14), 0.4 / p);
  factor = std::clamp(factor, 0.2, 5.0);
  return dt * factor;
}

IntegrationTrace integrate(const OdeProblem& problem, const ButcherTableau& tableau,
                           const IntegratorConfig& config) {
  if (!tableau.runnable())
    throw std::invalid_argument("integrate: tableau is not runnable");
  if (config.dt <= 0.0)
    throw std::invalid_argument("integrate: config.dt must be positive");
  const EmbeddedWeights* pair = tableau.error_pair();
  if (config.mode == SteppingMode::Adaptive && pair == nullptr)
    throw std::invalid_argument("integrate: adaptive mode needs an embedded weight vector");

  const double span = problem.t_end - problem.t_begin;
  const double dt_min = config.dt_min > 0.0 ? config.dt_min : 1e-12 * span;
  const double dt_max = config.dt_max > 0.0 ? config.dt_max
                                            : std::numeric_limits<double>::infinity();
  const double tol = config.tol;
  // Error norms use the solution-scale weights 1 + |u_i|; estimates are then
  // compared against tol directly. Folding tol into the weights as well
  // would demand err ~ tol^2 on unit-scale problems.
  WeightedNorm norm{config.atol > 0.0 ? config.atol : 1.0,
                    config.rtol > 0.0 ? config.rtol : 1.0};

  const int design = tableau.order;
  const int p_cap = std::min(design, kMaxConditionOrder);
  const int p_start = config.p_start > 0 ? std::min(config.p_start, p_cap) : p_cap;
  const int p_min = std::max(1, config.p_min);

  // Order systems are reused across every step at a given target order.
  std::vector<OrderConditionSystem> systems(static_cast<std::size_t>(p_start) + 1);
  if (config.adaptation == AdaptationMode::Free)
    for (int p = 1; p <= p_start; ++p)
      systems[static_cast<std::size_t>(p)] = assemble(tableau, p);
  WeightCandidates candidates;
  if (config.adaptation == AdaptationMode::Convex)
    candidates = WeightCandidates::for_tableau(tableau);

  IntegrationTrace trace;
  Eigen::VectorXd u = problem.initial_state;
  double t = problem.t_begin;
  double dt = config.dt;
  double e_prev = -1.0;

  std::vector<double> outputs = config.output_times;
  std::sort(outputs.begin(), outputs.end());
  std::size_t next_output = 0;

  std::vector<double> inv0;
  for (const LinearInvariant& inv : problem.invariants)
    inv0.push_back(inv.weights.dot(u));

  auto drift_of = [&](const Eigen::VectorXd& state) {
    std::vector<double> d;
    for (std::size_t k = 0; k < problem.invariants.size(); ++k)
      d.push_back(std::abs(problem.invariants[k].weights.dot(state) - inv0[k]));
    return d;
  };

  auto fail = [&](const std::string& why) {
    trace.completed = false;
    trace.failure = why;
    trace.final_state = u;
    trace.final_time = t;
    return trace;
  };

  const double time_slack = 1e-12 * std::max(std::abs(span), 1.0);
  while (problem.t_end - t > time_slack) {
    dt = std::min(dt, dt_max);
    const double dt_step = std::min(dt, problem.t_end - t);

    StepRecord rec;
    rec.t = t;
    rec.dt = dt_step;
    rec.err_truncation = kQuietNan;
    rec.err_total = kQuietNan;
    rec.order = design;

    StageData stages;
    try {
      stages = compute_stages(problem, tableau, t, u, dt_step);
    } catch (const StageSolveError&) {
      // Counted with the infeasible rejections: either way the step cannot
      // be completed at this size.
      rec.status = StepStatus::RejectedInfeasible;
      rec.min_update_before = kQuietNan;
      rec.min_update_after = kQuietNan;
      rec.invariant_drift = drift_of(u);
      trace.steps.push_back(std::move(rec));
      dt = 0.5 * dt_step;
      if (dt < dt_min) return fail("stage solve failed at the minimum step size");
      continue;
    }
    const Eigen::MatrixXd& F = stages.derivatives;

    const Eigen::VectorXd update0 = combine(u, dt_step, F, tableau.b);
    rec.min_update_before = update0.minCoeff();
    rec.min_update_after = rec.min_update_before;

    const double eps_lp = bound_slack(u);
    const bool out_of_bounds = problem.bounds.violation(update0) > eps_lp;

    Eigen::VectorXd b_used = tableau.b;
    Eigen::VectorXd update = update0;
    const double tol_delta =
        config.tol_delta > 0.0
            ? config.tol_delta
            : (config.mode == SteppingMode::Adaptive ? tol : 1e-2 * std::max(1.0, max_abs(u)));

    if (out_of_bounds && config.adaptation != AdaptationMode::Off) {
      bool found = false;
      bool perturbation_hit = false;
      AdaptationRequest req{F, u, dt_step, &problem.bounds, nullptr, tableau.b};

      if (config.adaptation == AdaptationMode::Free) {
        for (int p = p_start; p >= p_min && !found; --p) {
          req.order_system = &systems[static_cast<std::size_t>(p)];
          const AdaptationResult res = free_adapt(req);
          rec.lp_solves += res.lp_solves;
          if (res.status != AdaptationStatus::Adapted) continue;
          const double delta_ctrl =
              config.mode == SteppingMode::Adaptive
                  ? norm(dt_step * (F * (res.weights - tableau.b)), u)
                  : res.perturbation;
          if (delta_ctrl >= tol_delta) {
            perturbation_hit = true;
            continue;
          }
          b_used = res.weights;
          rec.adapted = true;
          rec.order = res.order;
          rec.weight_change = res.weight_change;
          found = true;
        }
      } else {
        const AdaptationResult res = convex_adapt(req, candidates);
        rec.lp_solves += res.lp_solves;
        if (res.status == AdaptationStatus::Adapted) {
          const double delta_ctrl =
              config.mode == SteppingMode::Adaptive
                  ? norm(dt_step * (F * (res.weights - tableau.b)), u)
                  : res.perturbation;
          if (delta_ctrl < tol_delta) {
            b_used = res.weights;
            rec.adapted = true;
            rec.order = res.order;
            rec.weight_change = res.weight_change;
            found = true;
          } else {
            perturbation_hit = true;
          }
        }
      }

      if (!found) {
        rec.status = perturbation_hit ? StepStatus::RejectedPerturbation
                                      : StepStatus::RejectedInfeasible;
        rec.invariant_drift = drift_of(u);
        trace.steps.push_back(std::move(rec));
        dt = 0.5 * dt_step;
        if (dt < dt_min) return fail("no admissible weights at the minimum step size");
        continue;
      }
      update = combine(u, dt_step, F, b_used);
      rec.min_update_after = update.minCoeff();
    }

    if (pair != nullptr) {
      const ErrorEstimate est =
          estimate_error(F, dt_step, tableau.b, pair->b, b_used, norm, u);
      rec.err_truncation = est.err_truncation;
      rec.err_total = est.total;
      rec.perturbation = config.mode == SteppingMode::Adaptive
                             ? est.perturbation
                             : max_abs(dt_step * (F * (b_used - tableau.b)));
      if (config.mode == SteppingMode::Adaptive) {
        const double e_hat = est.total / tol;
        const int p_hat = std::min(rec.order, pair->order) + 1;
        if (e_hat > 1.0) {
          rec.status = StepStatus::RejectedError;
          rec.invariant_drift = drift_of(u);
          trace.steps.push_back(std::move(rec));
          // The controller proposal is capped so a rejected step always
          // retries smaller.
          dt = std::min(pi_step_control(e_hat, e_prev, dt_step, p_hat), 0.9 * dt_step);
          e_prev = e_hat;
          if (dt < dt_min) return fail("error control pushed dt below the minimum");
          continue;
        }
        dt = pi_step_control(e_hat, e_prev, dt_step, p_hat);
        e_prev = e_hat;
      }
    } else {
      rec.perturbation = max_abs(dt_step * (F * (b_used - tableau.b)));
    }

    u = update;
    t += dt_step;
    rec.status = StepStatus::Accepted;
    rec.invariant_drift = drift_of(u);
    trace.steps.push_back(std::move(rec));

    while (next_output < outputs.size() && outputs[next_output] <= t + time_slack) {
      trace.snapshots.push_back({outputs[next_output], t, u});
      ++next_output;
    }
  }

  if (std::abs(problem.t_end - t) <= 2.0 * time_slack) t = problem.t_end;
  while (next_output < outputs.size()) {
    trace.snapshots.push_back({outputs[next_output], t, u});
    ++next_output;
  }
  trace.completed = true;
  trace.final_state = u;
  trace.final_time = t;
  return trace;
}

}  // namespace bprk

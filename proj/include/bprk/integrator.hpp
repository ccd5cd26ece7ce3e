#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "bprk/problems.hpp"
#include "bprk/tableau.hpp"

namespace bprk {

enum class SteppingMode { FixedStep, Adaptive };
enum class AdaptationMode { Off, Free, Convex };

struct IntegratorConfig {
  SteppingMode mode = SteppingMode::FixedStep;
  AdaptationMode adaptation = AdaptationMode::Off;
  double dt = 0.0;        ///< fixed step, or initial step in Adaptive mode
  double tol = 1e-4;      ///< error tolerance (Adaptive)
  double dt_min = 0.0;    ///< 0: defaults to 1e-12 * span
  double dt_max = 0.0;    ///< 0: no cap
  int p_start = 0;        ///< 0: tableau design order
  int p_min = 1;
  double tol_delta = 0.0;  ///< perturbation cap; 0: tol (Adaptive) or
                           ///< 1e-2 * |u|_inf (FixedStep)
  double atol = 0.0, rtol = 0.0;  ///< error-norm weights; 0: both = tol
  std::vector<double> output_times;  ///< snapshot requests, ascending
};

enum class StepStatus { Accepted, RejectedError, RejectedPerturbation, RejectedInfeasible };

std::string to_string(StepStatus status);

/// One attempted step. Rejected attempts are recorded too, each followed by
/// a retry with a strictly smaller dt.
struct StepRecord {
  double t = 0.0;    ///< step start time
  double dt = 0.0;   ///< step size attempted
  StepStatus status = StepStatus::Accepted;
  bool adapted = false;
  int order = 0;               ///< certified order of the weights used
  double perturbation = 0.0;   ///< delta in the control norm
  double err_truncation = 0.0; ///< err_T (NaN when no embedded vector)
  double err_total = 0.0;      ///< err_T + delta
  double weight_change = 0.0;  ///< |b_used - b|_1
  double min_update_before = 0.0;  ///< min component of the unadapted update
  double min_update_after = 0.0;   ///< same, after adaptation
  std::vector<double> invariant_drift;  ///< |inv(u_new) - inv(u0)| per invariant
  int lp_solves = 0;
};

struct Snapshot {
  double requested_time = 0.0;
  double time = 0.0;  ///< first accepted time >= requested_time
  Eigen::VectorXd state;
};

struct IntegrationTrace {
  std::vector<StepRecord> steps;
  std::vector<Snapshot> snapshots;
  Eigen::VectorXd final_state;
  double final_time = 0.0;
  bool completed = false;
  std::string failure;  ///< empty on success

  long count(StepStatus status) const;
  long adapted_steps() const;
};

/// Weighted RMS norm |v| = sqrt(mean((v_i / (atol + rtol |u_i|))^2)) with
/// the state supplying the scale.
struct WeightedNorm {
  double atol = 1.0, rtol = 1.0;
  double operator()(const Eigen::VectorXd& v, const Eigen::VectorXd& scale_state) const;
};

struct ErrorEstimate {
  double err_truncation = 0.0;
  double perturbation = 0.0;
  double total = 0.0;
};

/// err_T = |dt F (b - b_hat)|, delta = |dt F (b_used - b)|, total = sum, all
/// in the given norm scaled by u.
ErrorEstimate estimate_error(const Eigen::MatrixXd& F, double dt,
                             const Eigen::VectorXd& b, const Eigen::VectorXd& b_hat,
                             const Eigen::VectorXd& b_used, const WeightedNorm& norm,
                             const Eigen::VectorXd& u);

/// PI step controller: dt * clamp(0.2, 5.0, 0.9 e_n^{-0.7/p} e_prev^{0.4/p}).
/// Pass e_prev <= 0 for the first step (pure I-controller with exponent 1/p).
double pi_step_control(double e_n, double e_prev, double dt, int p_hat);

/// Drive the method over [t_begin, t_end] with bound-enforcing weight
/// adaptation per the configured mode. Integration failures (dt underflow)
/// are reported in the trace, not thrown.
IntegrationTrace integrate(const OdeProblem& problem, const ButcherTableau& tableau,
                           const IntegratorConfig& config);

}  // namespace bprk

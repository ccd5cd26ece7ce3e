#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace bprk {

/// Dense linear program
///
///   minimize    objective . x
///   subject to  eq_matrix x = eq_rhs
///               ineq_matrix x <= ineq_rhs
///               x_i >= lower_bounds_i   (-inf marks a free variable)
///
/// Matrices with zero rows are fine; column counts must agree with the
/// objective where rows are present.
struct LinearProgram {
  Eigen::VectorXd objective;
  Eigen::MatrixXd eq_matrix;
  Eigen::VectorXd eq_rhs;
  Eigen::MatrixXd ineq_matrix;
  Eigen::VectorXd ineq_rhs;
  Eigen::VectorXd lower_bounds;

  Eigen::Index variables() const { return objective.size(); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd x;
  double objective_value = 0.0;
  int iterations = 0;       ///< simplex pivots across both phases
  double max_violation = 0.0;  ///< worst constraint residual on normalized rows
};

/// The simplex exceeded its pivot budget without concluding. Distinct from
/// Infeasible: the problem status is simply unknown.
struct SolverStalledError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Two-phase primal simplex on the full dense tableau. Dantzig pricing with
/// lowest-index tie-breaks; Bland's rule takes over after 50 consecutive
/// degenerate pivots. Throws SolverStalledError after 10000 pivots.
LpSolution solve(const LinearProgram& lp);

}  // namespace bprk

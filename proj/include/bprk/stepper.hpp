#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <vector>

#include "bprk/problems.hpp"
#include "bprk/tableau.hpp"

namespace bprk {

/// Stage data of one Runge-Kutta step. Column j of `derivatives` is
/// f(t + c_j dt, y_j), so any update is a matrix-vector product away.
struct StageData {
  Eigen::MatrixXd derivatives;   ///< F, m x s
  Eigen::MatrixXd values;        ///< y_j columnwise, m x s
  std::vector<int> newton_iterations;  ///< per stage, 0 where explicit
};

/// The simplified Newton iteration for an implicit stage did not converge.
/// Callers typically retry the whole step with a smaller dt.
struct StageSolveError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Compute all stages. Explicit tableaux use forward substitution; diagonal
/// entries trigger a simplified Newton solve per stage. Fully implicit
/// tableaux are refused with std::invalid_argument.
StageData compute_stages(const OdeProblem& problem, const ButcherTableau& tableau,
                         double t, const Eigen::VectorXd& u, double dt);

/// u + dt * F * w, the update with weight vector w.
template <class State, class Stages, class Weights>
Eigen::VectorXd combine(const Eigen::MatrixBase<State>& u, double dt,
                        const Eigen::MatrixBase<Stages>& F,
                        const Eigen::MatrixBase<Weights>& w) {
  return u + dt * (F * w);
}

}  // namespace bprk

#include "bprk/stepper.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace bprk {

namespace {

constexpr int kNewtonCap = 25;
constexpr double kNewtonTol = 1e-10;

// Weighted RMS with per-component scale 1 + |y_i|, used for both the
// increment and the residual convergence checks.
double stage_norm(const Eigen::VectorXd& v, const Eigen::VectorXd& y) {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double w = v(i) / (1.0 + std::abs(y(i)));
    acc += w * w;
  }
  return std::sqrt(acc / static_cast<double>(v.size()));
}

void finite_difference_jacobian(const OdeProblem& problem, double t,
                                const Eigen::VectorXd& y, Eigen::MatrixXd& J) {
  const Eigen::Index m = y.size();
  const double sqrt_eps = std::sqrt(std::numeric_limits<double>::epsilon());
  Eigen::VectorXd f0(m), f1(m), yp = y;
  problem.rhs(t, y, f0);
  J.resize(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double h = sqrt_eps * (1.0 + std::abs(y(i)));
    yp(i) = y(i) + h;
    problem.rhs(t, yp, f1);
    J.col(i) = (f1 - f0) / h;
    yp(i) = y(i);
  }
}

}  // namespace

StageData compute_stages(const OdeProblem& problem, const ButcherTableau& tableau,
                         double t, const Eigen::VectorXd& u, double dt) {
  if (!tableau.runnable())
    throw std::invalid_argument("compute_stages: fully implicit tableaux are not supported");
  const Eigen::Index s = tableau.stages();
  const Eigen::Index m = u.size();

  StageData data;
  data.derivatives.resize(m, s);
  data.values.resize(m, s);
  data.newton_iterations.assign(static_cast<std::size_t>(s), 0);

  Eigen::VectorXd known(m), y(m), f(m), residual(m), delta(m);
  Eigen::MatrixXd J;
  for (Eigen::Index j = 0; j < s; ++j) {
    known = u;
    for (Eigen::Index k = 0; k < j; ++k)
      known += dt * tableau.A(j, k) * data.derivatives.col(k);
    const double tj = t + tableau.c(j) * dt;
    const double ajj = tableau.A(j, j);

    if (ajj == 0.0) {
      y = known;
      problem.rhs(tj, y, f);
    } else {
      // Simplified Newton: the iteration matrix is factored at the predictor
      // and reused. When the increment stops contracting the Jacobian is
      // refreshed at the current iterate, which extends the convergence
      // basin enough for stiff chemistry at large steps.
      y = j == 0 ? u : data.values.col(j - 1);
      auto refactor = [&](const Eigen::VectorXd& at) {
        if (problem.jacobian)
          problem.jacobian(tj, at, J);
        else
          finite_difference_jacobian(problem, tj, at, J);
        return Eigen::PartialPivLU<Eigen::MatrixXd>(
            Eigen::MatrixXd::Identity(m, m) - dt * ajj * J);
      };
      Eigen::PartialPivLU<Eigen::MatrixXd> lu = refactor(y);

      bool converged = false;
      int refreshes = 0;
      double last_norm = std::numeric_limits<double>::infinity();
      for (int it = 1; it <= kNewtonCap; ++it) {
        problem.rhs(tj, y, f);
        residual = y - known - dt * ajj * f;
        delta = lu.solve(residual);
        y -= delta;
        if (!y.allFinite()) break;
        data.newton_iterations[static_cast<std::size_t>(j)] = it;
        // Increment-based criterion only: the raw residual scales with
        // dt * |J| * (error in y), which for stiff systems is unreachable
        // in double precision even at a fully converged iterate.
        const double step = stage_norm(delta, y);
        if (step < kNewtonTol) {
          problem.rhs(tj, y, f);
          converged = true;
          break;
        }
        if (step > 0.5 * last_norm && refreshes < 4) {
          lu = refactor(y);
          ++refreshes;
          last_norm = std::numeric_limits<double>::infinity();
        } else {
          last_norm = step;
        }
      }
      if (!converged)
        throw StageSolveError("stage " + std::to_string(j) +
                              " Newton iteration did not converge");
    }
    data.values.col(j) = y;
    data.derivatives.col(j) = f;
  }
  return data;
}

}  // namespace bprk

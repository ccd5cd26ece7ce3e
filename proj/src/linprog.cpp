// Two-phase dense simplex.
//
// The incoming program is rewritten over nonnegative variables: bounded
// variables are shifted by their lower bound, free variables are split into
// positive and negative parts, and every inequality row gets a slack. Phase
// one minimizes the sum of one artificial variable per row; phase two runs
// the real objective with artificials barred from re-entering.

#include "bprk/linprog.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace bprk {

namespace {

constexpr double kPivotTol = 1e-10;
constexpr double kFeasTol = 1e-9;
constexpr int kMaxPivots = 10000;
constexpr int kDegenerateLimit = 50;

struct Tableau {
  Eigen::MatrixXd body;       // active rows x (columns + rhs)
  Eigen::RowVectorXd cost;    // reduced-cost row, same width
  std::vector<int> basis;     // basic column per row, -1 = row dropped
  int structural = 0;         // columns before the artificial block
  int pivots = 0;
  int degenerate_run = 0;
  bool bland = false;

  Eigen::Index rhs_col() const { return body.cols() - 1; }

  void pivot(int row, int col) {
    body.row(row) /= body(row, col);
    for (Eigen::Index i = 0; i < body.rows(); ++i) {
      if (i == row || basis[static_cast<std::size_t>(i)] < 0) continue;
      const double f = body(i, col);
      if (f != 0.0) body.row(i) -= f * body.row(row);
    }
    const double f = cost(col);
    if (f != 0.0) cost -= f * body.row(row);
    basis[static_cast<std::size_t>(row)] = col;
    ++pivots;
  }

  // One simplex iteration over the allowed column range. Returns:
  //   0 optimal, 1 pivoted, -1 unbounded.
  int step(int max_col) {
    int enter = -1;
    double best = -kPivotTol;
    for (int j = 0; j < max_col; ++j) {
      const double d = cost(j);
      if (d >= -kPivotTol) continue;
      if (bland) {
        enter = j;
        break;
      }
      if (d < best) {
        best = d;
        enter = j;
      }
    }
    if (enter < 0) return 0;

    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < body.rows(); ++i) {
      if (basis[static_cast<std::size_t>(i)] < 0) continue;
      const double a = body(i, enter);
      if (a <= kPivotTol) continue;
      const double ratio = body(i, rhs_col()) / a;
      if (ratio < best_ratio - 1e-15 ||
          (ratio <= best_ratio + 1e-15 &&
           (leave < 0 || basis[static_cast<std::size_t>(i)] <
                             basis[static_cast<std::size_t>(leave)]))) {
        if (ratio < best_ratio) best_ratio = ratio;
        leave = static_cast<int>(i);
      }
    }
    if (leave < 0) return -1;

    if (body(leave, rhs_col()) <= kPivotTol)
      ++degenerate_run;
    else
      degenerate_run = 0;
    if (degenerate_run >= kDegenerateLimit) bland = true;

    pivot(leave, enter);
    if (pivots >= kMaxPivots)
      throw SolverStalledError("simplex exceeded its pivot budget");
    return 1;
  }
};

}  // namespace

LpSolution solve(const LinearProgram& lp) {
  const Eigen::Index n = lp.variables();
  const Eigen::Index m_eq = lp.eq_rhs.size();
  const Eigen::Index m_ub = lp.ineq_rhs.size();
  const Eigen::Index m = m_eq + m_ub;
  const double inf = std::numeric_limits<double>::infinity();

  // Column layout of the rewritten program: one column per bounded
  // variable, two per free variable, then one slack per inequality row.
  std::vector<int> pos_col(static_cast<std::size_t>(n));
  std::vector<int> neg_col(static_cast<std::size_t>(n), -1);
  Eigen::VectorXd shift = Eigen::VectorXd::Zero(n);
  int cols = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    pos_col[static_cast<std::size_t>(i)] = cols++;
    const double lo = lp.lower_bounds.size() ? lp.lower_bounds(i) : 0.0;
    if (lo == -inf)
      neg_col[static_cast<std::size_t>(i)] = cols++;
    else
      shift(i) = lo;
  }
  const int slack0 = cols;
  cols += static_cast<int>(m_ub);

  Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(m, cols);
  Eigen::VectorXd rhs(m);
  for (Eigen::Index r = 0; r < m; ++r) {
    const bool eq = r < m_eq;
    const auto a = eq ? lp.eq_matrix.row(r) : lp.ineq_matrix.row(r - m_eq);
    double b = eq ? lp.eq_rhs(r) : lp.ineq_rhs(r - m_eq);
    for (Eigen::Index i = 0; i < n; ++i) {
      rows(r, pos_col[static_cast<std::size_t>(i)]) = a(i);
      if (neg_col[static_cast<std::size_t>(i)] >= 0)
        rows(r, neg_col[static_cast<std::size_t>(i)]) = -a(i);
      b -= a(i) * shift(i);
    }
    rhs(r) = b;
    // Equilibrate: rows of very different magnitude otherwise force pivots
    // on tiny elements, whose error amplification can corrupt the tableau.
    // The slack is added after scaling so its column stays exactly 1.
    const double mag = rows.row(r).cwiseAbs().maxCoeff();
    const double scale = mag > 0.0 ? mag : 1.0;
    rows.row(r) /= scale;
    rhs(r) /= scale;
    if (!eq) rows(r, slack0 + static_cast<int>(r - m_eq)) = 1.0;
    if (rhs(r) < 0.0) {
      rows.row(r) = -rows.row(r);
      rhs(r) = -rhs(r);
    }
  }

  Tableau t;
  t.structural = cols;
  t.body.resize(m, cols + m + 1);
  t.body.leftCols(cols) = rows;
  t.body.middleCols(cols, m) = Eigen::MatrixXd::Identity(m, m);
  t.body.col(cols + m) = rhs;
  t.basis.resize(static_cast<std::size_t>(m));
  for (Eigen::Index r = 0; r < m; ++r)
    t.basis[static_cast<std::size_t>(r)] = cols + static_cast<int>(r);

  // Phase one: reduced costs of min(sum of artificials) with the artificial
  // basis are the negated column sums.
  t.cost = Eigen::RowVectorXd::Zero(cols + m + 1);
  for (Eigen::Index r = 0; r < m; ++r) t.cost -= t.body.row(r);
  t.cost.segment(cols, m).setZero();

  LpSolution sol;
  int rc;
  while ((rc = t.step(cols)) == 1) {
  }
  const double infeasibility = -t.cost(t.rhs_col());
  if (infeasibility > kFeasTol * std::max(1.0, rhs.lpNorm<1>())) {
    sol.status = LpStatus::Infeasible;
    sol.iterations = t.pivots;
    return sol;
  }

  // Clear leftover artificials from the basis, pivoting on the largest
  // structural element to keep the amplification small; rows that offer no
  // structural pivot are redundant and get dropped.
  for (Eigen::Index r = 0; r < m; ++r) {
    const auto ur = static_cast<std::size_t>(r);
    if (t.basis[ur] < cols) continue;
    int col = -1;
    double best = kPivotTol;
    for (int j = 0; j < cols; ++j) {
      const double a = std::abs(t.body(r, j));
      if (a > best) {
        best = a;
        col = j;
      }
    }
    if (col >= 0) {
      t.pivot(static_cast<int>(r), col);
    } else {
      t.body.row(r).setZero();
      t.basis[ur] = -1;
    }
  }

  // Phase two.
  t.degenerate_run = 0;
  t.cost = Eigen::RowVectorXd::Zero(cols + m + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    t.cost(pos_col[static_cast<std::size_t>(i)]) = lp.objective(i);
    if (neg_col[static_cast<std::size_t>(i)] >= 0)
      t.cost(neg_col[static_cast<std::size_t>(i)]) = -lp.objective(i);
  }
  for (Eigen::Index r = 0; r < m; ++r) {
    const int b = t.basis[static_cast<std::size_t>(r)];
    if (b < 0) continue;
    const double f = t.cost(b);
    if (f != 0.0) t.cost -= f * t.body.row(r);
  }
  while ((rc = t.step(cols)) == 1) {
  }
  if (rc < 0) {
    sol.status = LpStatus::Unbounded;
    sol.iterations = t.pivots;
    return sol;
  }

  Eigen::VectorXd y = Eigen::VectorXd::Zero(cols);
  for (Eigen::Index r = 0; r < m; ++r) {
    const int b = t.basis[static_cast<std::size_t>(r)];
    if (b >= 0 && b < cols) y(b) = t.body(r, t.rhs_col());
  }
  sol.x.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double v = shift(i) + y(pos_col[static_cast<std::size_t>(i)]);
    if (neg_col[static_cast<std::size_t>(i)] >= 0)
      v -= y(neg_col[static_cast<std::size_t>(i)]);
    sol.x(i) = v;
  }
  sol.status = LpStatus::Optimal;
  sol.objective_value = lp.objective.dot(sol.x);
  sol.iterations = t.pivots;

  for (Eigen::Index r = 0; r < m_eq; ++r) {
    const double scale = std::max(1.0, lp.eq_matrix.row(r).cwiseAbs().maxCoeff());
    sol.max_violation = std::max(
        sol.max_violation, std::abs(lp.eq_matrix.row(r).dot(sol.x) - lp.eq_rhs(r)) / scale);
  }
  for (Eigen::Index r = 0; r < m_ub; ++r) {
    const double scale = std::max(1.0, lp.ineq_matrix.row(r).cwiseAbs().maxCoeff());
    sol.max_violation = std::max(
        sol.max_violation, (lp.ineq_matrix.row(r).dot(sol.x) - lp.ineq_rhs(r)) / scale);
  }
  return sol;
}

}  // namespace bprk

// Weight adaptation for a single Runge-Kutta step.
//
// Both strategies perturb the quadrature weights so the update lands inside
// the bound box, keeping the L1 distance to the design weights minimal. The
// bound constraints are imposed on the violated components first and the
// active set grows until the whole box holds; in practice one or two LP
// solves suffice.

#include "bprk/adaptation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "bprk/linprog.hpp"

namespace bprk {

namespace {

constexpr int kMaxEnlargements = 10;
constexpr double kUsedColumnTol = 1e-12;

struct ActiveSet {
  std::vector<Eigen::Index> lower, upper;
  std::vector<char> in_lower, in_upper;

  explicit ActiveSet(Eigen::Index m)
      : in_lower(static_cast<std::size_t>(m), 0),
        in_upper(static_cast<std::size_t>(m), 0) {}

  // Scan the update and absorb violations not yet tracked. Returns the
  // number of fresh indices.
  int absorb(const Eigen::VectorXd& update, const Bounds& bounds, double eps) {
    int fresh = 0;
    for (Eigen::Index i = 0; i < update.size(); ++i) {
      const auto ui = static_cast<std::size_t>(i);
      if (bounds.lower.size() && !in_lower[ui] && update(i) < bounds.lower(i) - eps) {
        lower.push_back(i);
        in_lower[ui] = 1;
        ++fresh;
      }
      if (bounds.has_upper() && !in_upper[ui] && update(i) > bounds.upper(i) + eps) {
        upper.push_back(i);
        in_upper[ui] = 1;
        ++fresh;
      }
    }
    return fresh;
  }
};

AdaptationResult unmodified(const AdaptationRequest& req, int order) {
  AdaptationResult res;
  res.status = AdaptationStatus::Unmodified;
  res.weights = req.base_weights;
  res.order = order;
  return res;
}

}  // namespace

double bound_slack(const Eigen::VectorXd& state) {
  const double scale = state.size() ? state.cwiseAbs().maxCoeff() : 0.0;
  return 1e-9 * std::max(1.0, scale);
}

AdaptationResult free_adapt(const AdaptationRequest& req) {
  if (req.order_system == nullptr)
    throw std::invalid_argument("free_adapt: order condition system required");
  if (req.bounds == nullptr)
    throw std::invalid_argument("free_adapt: bounds required");
  const Eigen::Index s = req.base_weights.size();
  const Eigen::Index m = req.state.size();
  const Bounds& box = *req.bounds;
  const double eps = bound_slack(req.state);

  const Eigen::VectorXd shift0 = req.dt * (req.stage_derivatives * req.base_weights);
  Eigen::VectorXd update = req.state + shift0;

  ActiveSet active(m);
  if (active.absorb(update, box, eps) == 0)
    return unmodified(req, req.order_system->order);

  // Variables: the split perturbation d = d_plus - d_minus, both halves
  // nonnegative, so the L1 objective is just their sum.
  const Eigen::MatrixXd& Q = req.order_system->Q;
  LinearProgram lp;
  lp.objective = Eigen::VectorXd::Ones(2 * s);
  lp.lower_bounds = Eigen::VectorXd::Zero(2 * s);
  lp.eq_matrix.resize(Q.rows(), 2 * s);
  lp.eq_matrix << Q, -Q;
  lp.eq_rhs = Eigen::VectorXd::Zero(Q.rows());

  AdaptationResult res;
  for (int pass = 0; pass < kMaxEnlargements; ++pass) {
    const Eigen::Index rows =
        static_cast<Eigen::Index>(active.lower.size() + active.upper.size());
    lp.ineq_matrix.resize(rows, 2 * s);
    lp.ineq_rhs.resize(rows);
    Eigen::Index r = 0;
    for (Eigen::Index i : active.lower) {
      const Eigen::RowVectorXd w = req.dt * req.stage_derivatives.row(i);
      lp.ineq_matrix.row(r) << -w, w;
      lp.ineq_rhs(r) = req.state(i) + shift0(i) - box.lower(i);
      ++r;
    }
    for (Eigen::Index i : active.upper) {
      const Eigen::RowVectorXd w = req.dt * req.stage_derivatives.row(i);
      lp.ineq_matrix.row(r) << w, -w;
      lp.ineq_rhs(r) = box.upper(i) - req.state(i) - shift0(i);
      ++r;
    }

    const LpSolution sol = solve(lp);
    res.lp_solves = pass + 1;
    if (sol.status != LpStatus::Optimal) {
      res.status = AdaptationStatus::Infeasible;
      return res;
    }
    const Eigen::VectorXd d = sol.x.head(s) - sol.x.tail(s);
    res.weights = req.base_weights + d;
    const Eigen::VectorXd shift = req.dt * (req.stage_derivatives * d);
    update = req.state + shift0 + shift;
    if (active.absorb(update, box, eps) == 0) {
      // No fresh indices. If an index already in the set still violates,
      // the LP arithmetic failed us and looping would not converge; report
      // the attempt as infeasible instead of certifying a bad update.
      if (box.violation(update) > eps) {
        res.status = AdaptationStatus::Infeasible;
        return res;
      }
      res.status = AdaptationStatus::Adapted;
      res.order = req.order_system->order;
      res.perturbation = shift.cwiseAbs().maxCoeff();
      res.weight_change = d.lpNorm<1>();
      return res;
    }
  }
  throw std::runtime_error("free_adapt: active constraint set failed to stabilize");
}

WeightCandidates WeightCandidates::for_tableau(const ButcherTableau& tableau) {
  WeightCandidates cand;
  cand.columns.resize(tableau.stages(), 1 + static_cast<Eigen::Index>(tableau.embedded.size()));
  cand.columns.col(0) = tableau.b;
  cand.orders.push_back(tableau.order);
  for (std::size_t k = 0; k < tableau.embedded.size(); ++k) {
    cand.columns.col(static_cast<Eigen::Index>(k + 1)) = tableau.embedded[k].b;
    cand.orders.push_back(tableau.embedded[k].order);
  }
  return cand;
}

AdaptationResult convex_adapt(const AdaptationRequest& req,
                              const WeightCandidates& candidates) {
  if (req.bounds == nullptr)
    throw std::invalid_argument("convex_adapt: bounds required");
  const Eigen::Index s = req.base_weights.size();
  const Eigen::Index m = req.state.size();
  const Eigen::Index K = candidates.columns.cols();
  if (candidates.columns.rows() != s)
    throw std::invalid_argument("convex_adapt: column length != stage count");
  const Bounds& box = *req.bounds;
  const double eps = bound_slack(req.state);

  const Eigen::VectorXd update0 = req.state + req.dt * (req.stage_derivatives * req.base_weights);
  Eigen::VectorXd update = update0;

  ActiveSet active(m);
  if (active.absorb(update, box, eps) == 0) {
    int order = 0;
    for (Eigen::Index k = 0; k < K; ++k)
      if (candidates.columns.col(k) == req.base_weights)
        order = std::max(order, candidates.orders[static_cast<std::size_t>(k)]);
    if (order == 0)
      order = *std::max_element(candidates.orders.begin(), candidates.orders.end());
    return unmodified(req, order);
  }

  // Variables: simplex coordinates g, then per-stage slacks t bounding
  // |B g - b| for the L1 objective.
  LinearProgram lp;
  lp.objective.setZero(K + s);
  lp.objective.tail(s).setOnes();
  lp.lower_bounds = Eigen::VectorXd::Zero(K + s);
  lp.eq_matrix.setZero(1, K + s);
  lp.eq_matrix.leftCols(K).setOnes();
  lp.eq_rhs = Eigen::VectorXd::Ones(1);

  // dt * F * B maps g directly to the update shift.
  const Eigen::MatrixXd W = req.dt * (req.stage_derivatives * candidates.columns);

  AdaptationResult res;
  for (int pass = 0; pass < kMaxEnlargements; ++pass) {
    const Eigen::Index fixed = 2 * s + K;
    const Eigen::Index rows =
        fixed + static_cast<Eigen::Index>(active.lower.size() + active.upper.size());
    lp.ineq_matrix.setZero(rows, K + s);
    lp.ineq_rhs.resize(rows);
    lp.ineq_matrix.block(0, 0, s, K) = candidates.columns;
    lp.ineq_matrix.block(0, K, s, s) = -Eigen::MatrixXd::Identity(s, s);
    lp.ineq_rhs.head(s) = req.base_weights;
    lp.ineq_matrix.block(s, 0, s, K) = -candidates.columns;
    lp.ineq_matrix.block(s, K, s, s) = -Eigen::MatrixXd::Identity(s, s);
    lp.ineq_rhs.segment(s, s) = -req.base_weights;
    lp.ineq_matrix.block(2 * s, 0, K, K) = Eigen::MatrixXd::Identity(K, K);
    lp.ineq_rhs.segment(2 * s, K).setOnes();
    Eigen::Index r = fixed;
    for (Eigen::Index i : active.lower) {
      lp.ineq_matrix.row(r).head(K) = -W.row(i);
      lp.ineq_rhs(r) = req.state(i) - box.lower(i);
      ++r;
    }
    for (Eigen::Index i : active.upper) {
      lp.ineq_matrix.row(r).head(K) = W.row(i);
      lp.ineq_rhs(r) = box.upper(i) - req.state(i);
      ++r;
    }

    const LpSolution sol = solve(lp);
    res.lp_solves = pass + 1;
    if (sol.status != LpStatus::Optimal) {
      res.status = AdaptationStatus::Infeasible;
      return res;
    }
    const Eigen::VectorXd g = sol.x.head(K);
    res.weights = candidates.columns * g;
    update = req.state + req.dt * (req.stage_derivatives * res.weights);
    if (active.absorb(update, box, eps) == 0) {
      if (box.violation(update) > eps) {
        res.status = AdaptationStatus::Infeasible;
        return res;
      }
      res.status = AdaptationStatus::Adapted;
      res.order = 0;
      for (Eigen::Index k = 0; k < K; ++k)
        if (g(k) > kUsedColumnTol) {
          const int ok = candidates.orders[static_cast<std::size_t>(k)];
          res.order = res.order == 0 ? ok : std::min(res.order, ok);
        }
      const Eigen::VectorXd d = res.weights - req.base_weights;
      res.perturbation = (req.dt * (req.stage_derivatives * d)).cwiseAbs().maxCoeff();
      res.weight_change = d.lpNorm<1>();
      return res;
    }
  }
  throw std::runtime_error("convex_adapt: active constraint set failed to stabilize");
}

}  // namespace bprk

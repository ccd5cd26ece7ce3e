#pragma once

#include <Eigen/Dense>

#include <vector>

#include "bprk/bounds.hpp"
#include "bprk/order_conditions.hpp"
#include "bprk/tableau.hpp"

namespace bprk {

/// Inputs for one weight-adaptation attempt on a single step. The matrix F
/// holds the stage derivatives columnwise, so the update with weights w is
/// u + dt * F * w. References must outlive the call; nothing is copied.
struct AdaptationRequest {
  Eigen::Ref<const Eigen::MatrixXd> stage_derivatives;  ///< F, m x s
  Eigen::Ref<const Eigen::VectorXd> state;              ///< u^n
  double dt = 0.0;
  const Bounds* bounds = nullptr;
  const OrderConditionSystem* order_system = nullptr;  ///< target order (free mode)
  Eigen::Ref<const Eigen::VectorXd> base_weights;      ///< the method's b
};

enum class AdaptationStatus {
  Unmodified,  ///< unadapted update already inside the box; weights == b
  Adapted,     ///< weights replaced, update inside the box
  Infeasible,  ///< no admissible weights at the requested order
};

struct AdaptationResult {
  AdaptationStatus status = AdaptationStatus::Infeasible;
  Eigen::VectorXd weights;    ///< adapted weights (== b when Unmodified)
  int order = 0;              ///< order certified by the constraints used
  double perturbation = 0.0;  ///< max-norm of dt * F * (weights - b)
  double weight_change = 0.0; ///< l1 distance to b
  int lp_solves = 0;          ///< LP solves spent on active-set enlargement
};

/// Bound-feasibility slack: violations up to this are ignored, and restored
/// updates are only required to respect the box within it.
double bound_slack(const Eigen::VectorXd& state);

/// Choose new weights minimizing |w - b|_1 subject to the order conditions
/// Q w = r of the requested system and the bounds on the updated state. The
/// bound constraints start from the violated components only and the set is
/// enlarged until the full box holds (active-constraint-set reduction).
AdaptationResult free_adapt(const AdaptationRequest& req);

/// Column pool for convex adaptation.
struct WeightCandidates {
  Eigen::MatrixXd columns;   ///< s x K
  std::vector<int> orders;   ///< declared order per column

  /// The method's own weights followed by every attached companion vector.
  static WeightCandidates for_tableau(const ButcherTableau& tableau);
};

/// Choose weights of the form B g with g in the unit simplex, minimizing
/// |B g - b|_1 subject to the bounds. The certified order is the smallest
/// declared order among columns with g_k > 1e-12. Any order system in the
/// request is ignored; order bookkeeping is by column here.
AdaptationResult convex_adapt(const AdaptationRequest& req,
                              const WeightCandidates& candidates);

}  // namespace bprk

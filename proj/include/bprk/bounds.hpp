#pragma once

#include <Eigen/Dense>

#include <limits>

namespace bprk {

/// Componentwise box alpha_i <= u_i <= beta_i. Entries of -inf/+inf disable
/// a side for that component; an empty `upper` means no upper bounds at all
/// (the common positivity-only case keeps lower = 0, upper empty).
struct Bounds {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  static Bounds nonnegative(Eigen::Index m) {
    return {Eigen::VectorXd::Zero(m), Eigen::VectorXd()};
  }

  static Bounds box(Eigen::Index m, double lo, double hi) {
    return {Eigen::VectorXd::Constant(m, lo), Eigen::VectorXd::Constant(m, hi)};
  }

  bool has_upper() const { return upper.size() > 0; }

  /// Largest violation of the box by v, zero if v is inside.
  double violation(const Eigen::VectorXd& v) const {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      if (lower.size()) worst = std::max(worst, lower(i) - v(i));
      if (has_upper()) worst = std::max(worst, v(i) - upper(i));
    }
    return worst;
  }
};

}  // namespace bprk

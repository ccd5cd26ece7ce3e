#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "bprk/tableau.hpp"

namespace bprk {

/// Maximum order for which conditions are assembled. Tree counts grow
/// quickly past this and nothing in the toolkit asks for more.
inline constexpr int kMaxConditionOrder = 5;

/// Rooted tree in canonical form: children are kept sorted by their own
/// canonical encodings, so structurally equal trees compare equal.
struct RootedTree {
  std::vector<RootedTree> children;
  int order = 1;                ///< number of nodes
  std::int64_t density = 1;     ///< gamma(tau)
  std::string encoding;         ///< canonical parenthesis string

  bool operator==(const RootedTree& other) const {
    return encoding == other.encoding;
  }
};

/// All rooted trees of order <= max_order, sorted by (order, encoding).
std::vector<RootedTree> enumerate_trees(int max_order);

/// Cumulative number of order conditions through order p (1, 2, 4, 8, 17).
int condition_count(int p);

/// Elementary weight vector psi(tau) for stage matrix A: psi(leaf) = ones,
/// psi([t1..tm]) = prod_k A psi(t_k) taken componentwise.
Eigen::VectorXd elementary_weight(const Eigen::MatrixXd& A, const RootedTree& tau);

/// The linear system Q w = r whose solutions w are weight vectors giving
/// order p with the given stage matrix. Row i is psi(tau_i)^T, r_i is
/// 1/gamma(tau_i), one row per tree of order <= p.
struct OrderConditionSystem {
  int order = 0;
  Eigen::MatrixXd Q;  ///< condition_count(p) x s
  Eigen::VectorXd r;
  std::vector<RootedTree> trees;  ///< row order matches Q

  /// Max-norm residual of Q w = r.
  double residual(const Eigen::VectorXd& w) const {
    return (Q * w - r).cwiseAbs().maxCoeff();
  }
};

/// Assemble the order-p condition system for a tableau (1 <= p <= 5).
OrderConditionSystem assemble(const ButcherTableau& tableau, int p);

/// Dimension of the affine solution space of Q w = r at order p:
/// stages - rank(Q), with rank taken from the SVD at relative tolerance
/// 1e-8. This is the number of free directions weight adaptation can use.
int degrees_of_freedom(const ButcherTableau& tableau, int p);

}  // namespace bprk

#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace bprk {

/// Structural class of a Runge-Kutta coefficient matrix.
enum class TableauStructure { Explicit, DiagonallyImplicit, FullyImplicit };

/// A secondary weight vector attached to a tableau (embedded pair or
/// companion method sharing the same stages).
struct EmbeddedWeights {
  std::string label;
  Eigen::VectorXd b;
  int order = 0;
};

/// Butcher tableau (A, b, c) with design order and structural class.
///
/// Tableaux are immutable after construction and safe to share across
/// threads.
struct ButcherTableau {
  std::string name;  ///< stable lowercase identifier, e.g. "ssp33"
  Eigen::MatrixXd A;
  Eigen::VectorXd b;
  Eigen::VectorXd c;
  int order = 0;     ///< design order p
  TableauStructure structure = TableauStructure::Explicit;
  std::vector<EmbeddedWeights> embedded;

  Eigen::Index stages() const { return b.size(); }

  /// The stepper handles explicit and diagonally implicit tableaux only.
  bool runnable() const { return structure != TableauStructure::FullyImplicit; }

  /// First embedded vector, used for truncation-error estimation.
  const EmbeddedWeights* error_pair() const {
    return embedded.empty() ? nullptr : &embedded.front();
  }
};

/// Classify A by its sparsity pattern (entries below `tol` count as zero).
TableauStructure classify_structure(const Eigen::MatrixXd& A, double tol = 0.0);

/// Look up a catalog method by identifier. Identifiers are matched
/// case-insensitively with '-' and '_' ignored, so "cash-karp", "CashKarp"
/// and "cashkarp" name the same method.
ButcherTableau builtin(const std::string& name);

/// Canonical identifiers of all catalog methods, in catalog order.
std::vector<std::string> builtin_names();

/// Backward-Euler extrapolation method of the given depth k in {2, 3, 4}.
///
/// Chain j performs j backward-Euler substeps of size dt/j; the chains are
/// combined with the Aitken-Neville coefficients for extrapolation to zero
/// step size over the harmonic sequence, giving design order k with
/// s = k(k+1)/2 stages. Two companion vectors are attached: the depth-(k-1)
/// extrapolation (order k-1, used as the error pair) and "be-chain", the
/// plain chain of k backward-Euler substeps (order 1).
ButcherTableau extrapolation_be(int depth);

}  // namespace bprk

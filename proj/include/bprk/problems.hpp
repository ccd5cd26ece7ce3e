#pragma once

#include <Eigen/Dense>

#include <functional>
#include <string>
#include <vector>

#include "bprk/bounds.hpp"

namespace bprk {

struct LinearInvariant {
  std::string label;
  Eigen::VectorXd weights;  ///< m with m . f(t,u) = 0 for all t, u
};

enum class ReferenceKind { None, MatrixExponential, FineIntegration };

/// An initial value problem u' = f(t, u), u(t_begin) = initial_state,
/// together with the bound box the solution should respect, declared linear
/// invariants, and how reference solutions are obtained. Definitions are
/// immutable and rhs evaluation is reentrant.
struct OdeProblem {
  std::string name;
  Eigen::Index dimension = 0;
  std::function<void(double, const Eigen::VectorXd&, Eigen::VectorXd&)> rhs;
  /// Analytic Jacobian; empty means callers fall back to finite differences.
  std::function<void(double, const Eigen::VectorXd&, Eigen::MatrixXd&)> jacobian;
  Bounds bounds;
  std::vector<LinearInvariant> invariants;
  Eigen::VectorXd initial_state;
  double t_begin = 0.0;
  double t_end = 1.0;
  ReferenceKind reference = ReferenceKind::None;
  /// Affine problems expose u' = L u + g for exact references.
  Eigen::MatrixXd linear_operator;
  Eigen::VectorXd affine_source;

  bool is_affine() const { return linear_operator.size() > 0; }

  Eigen::VectorXd eval(double t, const Eigen::VectorXd& u) const {
    Eigen::VectorXd out(dimension);
    rhs(t, u, out);
    return out;
  }
};

/// 2-species linear exchange u' = L u, L = ((-5, 1), (5, -1)), u0 = (1, 0).
/// Eigenvalues 0 and -6; total mass conserved; stationary state (1, 5)/6.
OdeProblem linear2x2();

/// 4-species reaction system with Monod-type coupling, u0 = (8, 2, 1, 4).
/// The conservative variant (default) balances the 0.003 u4 exchange so
/// total mass is conserved; conservative = false reproduces a published
/// variant of the system where that term appears with a positive sign in
/// both equations, breaking conservation.
OdeProblem reaction4(bool conservative = true);

/// Upwind semidiscretization of u_t = -a u_x - K u on (0, 1), inflow
/// u(t, 0) = 1, a = K = 1, N points, zero initial data. Affine.
OdeProblem advection_decay(int n = 100);

/// Central-difference heat equation u_t = D u_xx on [-0.5, 0.5], Dirichlet,
/// D = 1, N interior points, unit spike initial data at the center index.
OdeProblem diffusion(int n = 100);

/// Periodic advection-diffusion-reaction system on [0, 1]: the reaction4
/// kinetics per cell plus upwind advection (a = 1e-2) and central diffusion
/// (d = 1e-6), N cells per species, state layout (u1 block, ..., u4 block).
OdeProblem adr(int n = 100);

/// Six-species stratospheric photochemistry (O1D, O, O3, O2, NO, NO2) with
/// diurnal photolysis, 12 h to 84 h. Internally normalized so every
/// component starts at 1; the invariant vectors (oxygen and nitrogen mass)
/// are transformed to match.
OdeProblem stratospheric();

/// Look up a problem by name ("linear2x2", "reaction4", ...), with optional
/// parameter overrides applied by the CLI layer.
OdeProblem problem_by_name(const std::string& name);
std::vector<std::string> problem_names();

/// Reference solution at time t. MatrixExponential problems use the exact
/// affine flow via the matrix exponential of the augmented operator;
/// FineIntegration problems run an unadapted high-order method with step
/// dt_hint / 100 (a span-based default when dt_hint <= 0).
Eigen::VectorXd reference_solution(const OdeProblem& problem, double t,
                                   double dt_hint = 0.0);

}  // namespace bprk

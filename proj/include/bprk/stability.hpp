#pragma once

#include <Eigen/Dense>

#include <complex>
#include <vector>

#include "bprk/tableau.hpp"

namespace bprk {

/// R_w(z) = 1 + z w^T (I - zA)^{-1} e via a complex linear solve. A pole of
/// R (singular I - zA) is reported as an infinite-magnitude value.
std::complex<double> stability_function(const ButcherTableau& tableau,
                                        const Eigen::VectorXd& w,
                                        std::complex<double> z);

/// |z (I - zA)^{-1} e|_inf, the weight-sensitivity envelope of R at z:
/// changing the weights by d changes R by at most |d|_1 times this.
double perturbation_envelope(const ButcherTableau& tableau, std::complex<double> z);

/// |R(z)| sampled on a regular grid over a rectangle of the complex plane.
struct StabilitySample {
  double re_min = 0, re_max = 0, im_min = 0, im_max = 0;
  int nx = 0, ny = 0;
  Eigen::VectorXd weights;
  /// Row-major over (iy, ix): node (ix, iy) sits at index iy * nx + ix.
  std::vector<double> magnitude;

  double re_at(int ix) const {
    return re_min + (re_max - re_min) * ix / (nx - 1);
  }
  double im_at(int iy) const {
    return im_min + (im_max - im_min) * iy / (ny - 1);
  }
};

StabilitySample sample_region(const ButcherTableau& tableau, const Eigen::VectorXd& w,
                              double re_min, double re_max, double im_min,
                              double im_max, int nx = 400, int ny = 400);

/// Checks the convex-combination stability bound at the given points:
/// |R_{Bg}(z)| <= sum_i g_i |R_{B_i}(z)|, and membership of z in the
/// combined region whenever z lies in every column's region.
struct ContainmentReport {
  long points = 0;
  long intersection_points = 0;  ///< z inside every column's region
  long violations = 0;           ///< failures beyond the 1e-12 slack
  double worst_excess = 0.0;
};

ContainmentReport verify_convex_containment(const ButcherTableau& tableau,
                                            const Eigen::MatrixXd& columns,
                                            const Eigen::VectorXd& g,
                                            const std::vector<std::complex<double>>& zs);

/// |R_bt(z)| <= |R_b(z)| + |bt - b|_1 * perturbation_envelope(z) + 1e-12.
bool perturbation_bound_check(const ButcherTableau& tableau, const Eigen::VectorXd& b,
                              const Eigen::VectorXd& bt, std::complex<double> z);

}  // namespace bprk

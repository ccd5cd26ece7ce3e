#include "bprk/stability.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace bprk {

namespace {

using Complex = std::complex<double>;

// (I - zA)^{-1} e, or an empty vector when I - zA is singular.
Eigen::VectorXcd resolvent_times_ones(const ButcherTableau& tableau, Complex z) {
  const Eigen::Index s = tableau.stages();
  const Eigen::MatrixXcd M =
      Eigen::MatrixXcd::Identity(s, s) - z * tableau.A.cast<Complex>();
  const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
  // PartialPivLU has no rank query; detect the pole from the factor.
  const double diag_min = lu.matrixLU().diagonal().cwiseAbs().minCoeff();
  const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
  if (diag_min <= 1e-14 * scale) return {};
  return lu.solve(Eigen::VectorXcd::Ones(s));
}

}  // namespace

std::complex<double> stability_function(const ButcherTableau& tableau,
                                        const Eigen::VectorXd& w, Complex z) {
  const Eigen::VectorXcd v = resolvent_times_ones(tableau, z);
  if (v.size() == 0)
    return {std::numeric_limits<double>::infinity(), 0.0};
  const Complex wv = (w.cast<Complex>().transpose() * v).value();
  return 1.0 + z * wv;
}

double perturbation_envelope(const ButcherTableau& tableau, Complex z) {
  const Eigen::VectorXcd v = resolvent_times_ones(tableau, z);
  if (v.size() == 0) return std::numeric_limits<double>::infinity();
  return (z * v).cwiseAbs().maxCoeff();
}

StabilitySample sample_region(const ButcherTableau& tableau, const Eigen::VectorXd& w,
                              double re_min, double re_max, double im_min,
                              double im_max, int nx, int ny) {
  if (nx < 2 || ny < 2)
    throw std::invalid_argument("sample_region: resolution must be >= 2 per axis");
  StabilitySample sample;
  sample.re_min = re_min;
  sample.re_max = re_max;
  sample.im_min = im_min;
  sample.im_max = im_max;
  sample.nx = nx;
  sample.ny = ny;
  sample.weights = w;
  sample.magnitude.resize(static_cast<std::size_t>(nx) * ny);
  for (int iy = 0; iy < ny; ++iy)
    for (int ix = 0; ix < nx; ++ix) {
      const Complex z(sample.re_at(ix), sample.im_at(iy));
      sample.magnitude[static_cast<std::size_t>(iy) * nx + ix] =
          std::abs(stability_function(tableau, w, z));
    }
  return sample;
}

ContainmentReport verify_convex_containment(const ButcherTableau& tableau,
                                            const Eigen::MatrixXd& columns,
                                            const Eigen::VectorXd& g,
                                            const std::vector<Complex>& zs) {
  constexpr double kSlack = 1e-12;
  const Eigen::VectorXd combined = columns * g;
  ContainmentReport report;
  for (const Complex z : zs) {
    ++report.points;
    const double r_comb = std::abs(stability_function(tableau, combined, z));
    double convex_sum = 0.0;
    bool inside_all = true;
    for (Eigen::Index k = 0; k < columns.cols(); ++k) {
      const double r_k = std::abs(stability_function(tableau, columns.col(k), z));
      convex_sum += g(k) * r_k;
      if (r_k > 1.0 + kSlack) inside_all = false;
    }
    double excess = r_comb - convex_sum;
    if (inside_all) {
      ++report.intersection_points;
      excess = std::max(excess, r_comb - 1.0);
    }
    if (excess > kSlack) {
      ++report.violations;
      report.worst_excess = std::max(report.worst_excess, excess);
    }
  }
  return report;
}

bool perturbation_bound_check(const ButcherTableau& tableau, const Eigen::VectorXd& b,
                              const Eigen::VectorXd& bt, Complex z) {
  const double lhs = std::abs(stability_function(tableau, bt, z));
  const double rhs = std::abs(stability_function(tableau, b, z)) +
                     (bt - b).lpNorm<1>() * perturbation_envelope(tableau, z);
  return lhs <= rhs + 1e-12;
}

}  // namespace bprk

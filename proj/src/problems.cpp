#include "bprk/problems.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <stdexcept>

#include "bprk/stepper.hpp"

namespace bprk {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Monod-type uptake term of the 4-species kinetics. Guarding the
// denominator keeps the value finite for stage values pushed negative by
// explicit methods (the pole sits at u1 = -0.01) while leaving the decay
// rate linear through u1 = 0, which the unguarded formula also has for
// small |u1|.
double uptake(double u1, double u2) {
  return u1 * u2 / (0.01 + std::max(u1, 0.0));
}

double toggle(double u2) { return 0.5 * (1.0 - std::exp(-1.21 * u2 * u2)); }

// Kinetic part of reaction4/adr for one cell. The conservative flag picks
// the sign of the 0.003 u4 self-term in the u4 equation; only the negative
// sign balances the production 0.003 u4 in u1.
void kinetics(const double* u, double* f, bool conservative) {
  const double p = uptake(u[0], u[1]);
  const double g = toggle(u[1]);
  f[0] = 0.01 * u[1] + 0.01 * u[2] + 0.003 * u[3] - p;
  f[1] = p - 0.01 * u[1] - g * u[2] - 0.05 * u[1];
  f[2] = g * u[2] - 0.01 * u[2] - 0.02 * u[2];
  f[3] = 0.05 * u[1] + 0.02 * u[2] + (conservative ? -0.003 : 0.003) * u[3];
}

// Fraction of daylight driving the photolysis rates: a cosine bump over
// T in [4.5, 19.5] hours, zero at night, with the signed-square argument
// keeping it C^1 at the edges.
double daylight(double t_seconds) {
  const double rise = 4.5, set = 19.5;
  const double T = std::fmod(t_seconds / 3600.0, 24.0);
  if (T < rise || T > set) return 0.0;
  const double w = (2.0 * T - rise - set) / (set - rise);
  return 0.5 + 0.5 * std::cos(kPi * std::abs(w) * w);
}

}  // namespace

OdeProblem linear2x2() {
  OdeProblem p;
  p.name = "linear2x2";
  p.dimension = 2;
  Eigen::MatrixXd L(2, 2);
  L << -5.0, 1.0, 5.0, -1.0;
  p.linear_operator = L;
  p.affine_source = Eigen::VectorXd::Zero(2);
  p.rhs = [L](double, const Eigen::VectorXd& u, Eigen::VectorXd& f) { f = L * u; };
  p.jacobian = [L](double, const Eigen::VectorXd&, Eigen::MatrixXd& J) { J = L; };
  p.bounds = Bounds::nonnegative(2);
  p.invariants.push_back({"mass", Eigen::VectorXd::Ones(2)});
  p.initial_state = Eigen::Vector2d(1.0, 0.0);
  p.t_begin = 0.0;
  p.t_end = 1.0;
  p.reference = ReferenceKind::MatrixExponential;
  return p;
}

OdeProblem reaction4(bool conservative) {
  OdeProblem p;
  p.name = conservative ? "reaction4" : "reaction4-printed";
  p.dimension = 4;
  p.rhs = [conservative](double, const Eigen::VectorXd& u, Eigen::VectorXd& f) {
    kinetics(u.data(), f.data(), conservative);
  };
  p.bounds = Bounds::nonnegative(4);
  if (conservative) p.invariants.push_back({"mass", Eigen::VectorXd::Ones(4)});
  p.initial_state = Eigen::Vector4d(8.0, 2.0, 1.0, 4.0);
  p.t_begin = 0.0;
  p.t_end = 3.0;
  p.reference = ReferenceKind::FineIntegration;
  return p;
}

OdeProblem advection_decay(int n) {
  if (n < 2) throw std::invalid_argument("advection_decay: need at least 2 points");
  const double a = 1.0, K = 1.0;
  const double dx = 1.0 / n;
  OdeProblem p;
  p.name = "advection-decay";
  p.dimension = n;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    L(i, i) = -a / dx - K;
    if (i > 0) L(i, i - 1) = a / dx;
  }
  Eigen::VectorXd g = Eigen::VectorXd::Zero(n);
  g(0) = a / dx;  // inflow boundary value 1
  p.linear_operator = L;
  p.affine_source = g;
  p.rhs = [L, g](double, const Eigen::VectorXd& u, Eigen::VectorXd& f) {
    f = L * u + g;
  };
  p.jacobian = [L](double, const Eigen::VectorXd&, Eigen::MatrixXd& J) { J = L; };
  p.bounds = Bounds::nonnegative(n);
  p.initial_state = Eigen::VectorXd::Zero(n);
  p.t_begin = 0.0;
  p.t_end = 1.0;
  p.reference = ReferenceKind::MatrixExponential;
  return p;
}

OdeProblem diffusion(int n) {
  if (n < 3) throw std::invalid_argument("diffusion: need at least 3 points");
  const double D = 1.0;
  const double dx = 1.0 / (n + 1);  // interior points of [-0.5, 0.5]
  OdeProblem p;
  p.name = "diffusion";
  p.dimension = n;
  Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
  const double w = D / (dx * dx);
  for (int i = 0; i < n; ++i) {
    L(i, i) = -2.0 * w;
    if (i > 0) L(i, i - 1) = w;
    if (i + 1 < n) L(i, i + 1) = w;
  }
  p.linear_operator = L;
  p.affine_source = Eigen::VectorXd::Zero(n);
  p.rhs = [L](double, const Eigen::VectorXd& u, Eigen::VectorXd& f) { f = L * u; };
  p.jacobian = [L](double, const Eigen::VectorXd&, Eigen::MatrixXd& J) { J = L; };
  p.bounds = Bounds::nonnegative(n);
  p.initial_state = Eigen::VectorXd::Zero(n);
  p.initial_state(n / 2) = 1.0;
  p.t_begin = 0.0;
  p.t_end = 0.01;
  p.reference = ReferenceKind::MatrixExponential;
  return p;
}

OdeProblem adr(int n) {
  if (n < 3) throw std::invalid_argument("adr: need at least 3 cells");
  const double a = 1e-2, d = 1e-6;
  const double dx = 1.0 / n;
  OdeProblem p;
  p.name = "adr";
  p.dimension = 4 * n;
  p.rhs = [n, a, d, dx](double, const Eigen::VectorXd& u, Eigen::VectorXd& f) {
    double cell[4], dcell[4];
    for (int i = 0; i < n; ++i) {
      const int left = i == 0 ? n - 1 : i - 1;
      const int right = i + 1 == n ? 0 : i + 1;
      for (int k = 0; k < 4; ++k) cell[k] = u(k * n + i);
      kinetics(cell, dcell, true);
      for (int k = 0; k < 4; ++k) {
        const double ul = u(k * n + left);
        const double ur = u(k * n + right);
        f(k * n + i) = dcell[k] + (a / dx) * (ul - cell[k]) +
                       (d / (dx * dx)) * (ul - 2.0 * cell[k] + ur);
      }
    }
  };
  p.bounds = Bounds::nonnegative(4 * n);
  p.invariants.push_back({"mass", Eigen::VectorXd::Ones(4 * n)});
  // The component scales follow the 4-species kinetics' (8, 2, 1, 4);
  // strictly positive smooth periodic profiles, our choice.
  p.initial_state.resize(4 * n);
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / n;
    const double s = std::sin(kPi * x);
    p.initial_state(0 * n + i) = 8.0 + 2.0 * s * s;
    p.initial_state(1 * n + i) = 2.0 + 0.5 * std::cos(2.0 * kPi * x);
    p.initial_state(2 * n + i) = 1.0 + 0.5 * std::sin(2.0 * kPi * x);
    p.initial_state(3 * n + i) = 4.0 + std::cos(kPi * x) * std::cos(kPi * x);
  }
  p.t_begin = 0.0;
  p.t_end = 50.0;
  p.reference = ReferenceKind::FineIntegration;
  return p;
}

OdeProblem stratospheric() {
  const double M = 8.120e16;
  Eigen::VectorXd u0(6);
  u0 << 9.906e+1, 6.624e8, 5.326e11, 1.697e16, 4.000e6, 1.093e9;

  // Raw rates in concentration units; the problem is exposed in normalized
  // variables v = u / u0 so every component starts at 1.
  auto raw_rhs = [M](double t, const Eigen::VectorXd& u, Eigen::VectorXd& f) {
    const double sig = daylight(t);
    const double O1D = u(0), O = u(1), O3 = u(2), O2 = u(3), NO = u(4), NO2 = u(5);
    const double r1 = 2.643e-10 * sig * sig * sig * O2;
    const double r2 = 8.018e-17 * O * O2;
    const double r3 = 6.120e-4 * sig * O3;
    const double r4 = 1.567e-15 * O3 * O;
    const double r5 = 1.070e-3 * sig * sig * O3;
    const double r6 = 7.110e-11 * M * O1D;
    const double r7 = 1.200e-10 * O1D * O3;
    const double r8 = 6.062e-15 * O3 * NO;
    const double r9 = 1.069e-11 * NO2 * O;
    const double r10 = 1.289e-2 * sig * NO2;
    const double r11 = 1.0e-8 * NO * O;
    f(0) = r5 - r6 - r7;
    f(1) = 2.0 * r1 - r2 + r3 - r4 + r6 - r9 + r10 - r11;
    f(2) = r2 - r3 - r4 - r5 - r7 - r8;
    f(3) = -r1 - r2 + r3 + 2.0 * r4 + r5 + 2.0 * r7 + r8 + r9;
    f(4) = -r8 + r9 + r10 - r11;
    f(5) = r8 - r9 - r10 + r11;
  };

  OdeProblem p;
  p.name = "stratospheric";
  p.dimension = 6;
  p.rhs = [raw_rhs, u0](double t, const Eigen::VectorXd& v, Eigen::VectorXd& f) {
    Eigen::VectorXd u = u0.cwiseProduct(v);
    raw_rhs(t, u, f);
    f.array() /= u0.array();
  };
  p.bounds = Bounds::nonnegative(6);
  Eigen::VectorXd mo(6), mn(6);
  mo << 1, 1, 3, 2, 1, 2;
  mn << 0, 0, 0, 0, 1, 1;
  // Invariants transformed along with the change of variables.
  p.invariants.push_back({"oxygen", mo.cwiseProduct(u0)});
  p.invariants.push_back({"nitrogen", mn.cwiseProduct(u0)});
  p.initial_state = Eigen::VectorXd::Ones(6);
  p.t_begin = 12.0 * 3600.0;
  p.t_end = 84.0 * 3600.0;
  p.reference = ReferenceKind::FineIntegration;
  return p;
}

OdeProblem problem_by_name(const std::string& name) {
  if (name == "linear2x2") return linear2x2();
  if (name == "reaction4") return reaction4(true);
  if (name == "reaction4-printed") return reaction4(false);
  if (name == "advection-decay") return advection_decay();
  if (name == "diffusion") return diffusion();
  if (name == "adr") return adr();
  if (name == "stratospheric") return stratospheric();
  throw std::invalid_argument("unknown problem '" + name + "'");
}

std::vector<std::string> problem_names() {
  return {"linear2x2", "reaction4",      "reaction4-printed", "advection-decay",
          "diffusion", "adr",            "stratospheric"};
}

Eigen::VectorXd reference_solution(const OdeProblem& problem, double t,
                                   double dt_hint) {
  if (problem.reference == ReferenceKind::None)
    throw std::invalid_argument("problem '" + problem.name + "' has no reference");
  const double span = t - problem.t_begin;
  if (span == 0.0) return problem.initial_state;
  if (span < 0.0) throw std::invalid_argument("reference_solution: t precedes t_begin");

  if (problem.reference == ReferenceKind::MatrixExponential) {
    const Eigen::Index m = problem.dimension;
    // Augment the affine system so one matrix exponential covers the
    // inhomogeneous term: d/dt (u, 1) = ((L, g), (0, 0)) (u, 1).
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(m + 1, m + 1);
    W.topLeftCorner(m, m) = problem.linear_operator;
    W.topRightCorner(m, 1) = problem.affine_source;
    Eigen::VectorXd z(m + 1);
    z.head(m) = problem.initial_state;
    z(m) = 1.0;
    const Eigen::MatrixXd E = (span * W).exp();
    return (E * z).head(m);
  }

  // FineIntegration: plain fixed-step run of a high-order method with no
  // adaptation, implicit so stiff problems are covered too.
  const ButcherTableau fine = extrapolation_be(4);
  double dt = dt_hint > 0.0 ? dt_hint / 100.0 : span / 2000.0;
  const auto steps = static_cast<long>(std::ceil(span / dt - 1e-12));
  dt = span / static_cast<double>(steps);
  Eigen::VectorXd u = problem.initial_state;
  double time = problem.t_begin;
  for (long i = 0; i < steps; ++i) {
    const StageData stages = compute_stages(problem, fine, time, u, dt);
    u = combine(u, dt, stages.derivatives, fine.b);
    time += dt;
  }
  return u;
}

}  // namespace bprk

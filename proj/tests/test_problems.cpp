#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <stdexcept>

#include "bprk/problems.hpp"

using namespace bprk;

TEST_SUITE("problems") {

TEST_CASE("every catalog problem is well formed") {
  const std::vector<std::string> names = problem_names();
  REQUIRE(names.size() == 7);
  for (const std::string& name : names) {
    const OdeProblem p = problem_by_name(name);
    CHECK(p.name == name);
    CHECK(p.dimension >= 1);
    CHECK(p.initial_state.size() == p.dimension);
    CHECK(p.t_end > p.t_begin);
    CHECK(p.bounds.lower.size() == p.dimension);
    CHECK(p.bounds.violation(p.initial_state) == 0.0);
    for (const LinearInvariant& inv : p.invariants)
      CHECK(inv.weights.size() == p.dimension);
    Eigen::VectorXd f(p.dimension);
    p.rhs(p.t_begin, p.initial_state, f);
    CHECK(f.allFinite());
  }
  CHECK_THROWS_AS((void)problem_by_name("bogus"), std::invalid_argument);
}

TEST_CASE("linear 2x2 exchange: exact flow") {
  const OdeProblem p = linear2x2();
  REQUIRE(p.is_affine());
  // Eigenpairs by hand: L (1,5) = 0 and L (1,-1) = -6 (1,-1), so from
  // u0 = (1,0) = (1,5)/6 + (5/6)(1,-1) the solution at time t is
  // (1/6, 5/6) + (5/6) e^{-6t} (1, -1).
  const double e6 = std::exp(-6.0);
  const Eigen::VectorXd ref = reference_solution(p, 1.0);
  CHECK(ref(0) == doctest::Approx(1.0 / 6.0 + 5.0 / 6.0 * e6).epsilon(1e-12));
  CHECK(ref(1) == doctest::Approx(5.0 / 6.0 - 5.0 / 6.0 * e6).epsilon(1e-12));

  // Mass is the declared invariant.
  REQUIRE(p.invariants.size() == 1);
  CHECK(p.invariants[0].weights.dot(ref) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("declared invariants annihilate the right-hand side") {
  std::mt19937_64 rng(7u);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const std::string& name : problem_names()) {
    const OdeProblem p = problem_by_name(name);
    if (p.invariants.empty()) continue;
    Eigen::VectorXd u(p.dimension), f(p.dimension);
    for (int draw = 0; draw < 25; ++draw) {
      for (Eigen::Index i = 0; i < u.size(); ++i)
        u(i) = 2.0 * unit(rng) * (std::abs(p.initial_state(i)) + 1.0);
      const double t = p.t_begin + unit(rng) * (p.t_end - p.t_begin);
      p.rhs(t, u, f);
      for (const LinearInvariant& inv : p.invariants) {
        const double resid = std::abs(inv.weights.dot(f));
        // Scale by the largest term in the dot product so cancellation noise
        // passes but a dropped or flipped rate term cannot.
        const double scale = inv.weights.cwiseProduct(f).cwiseAbs().maxCoeff();
        CHECK_MESSAGE(resid <= 1e-7 * (1.0 + scale), name << "/" << inv.label);
      }
    }
  }
}

TEST_CASE("the printed reaction variant leaks mass") {
  const OdeProblem p = problem_by_name("reaction4-printed");
  CHECK(p.invariants.empty());
  Eigen::VectorXd f(4);
  p.rhs(0.0, p.initial_state, f);
  // Both 0.003 u4 terms enter with a positive sign, so total mass grows at
  // rate 0.006 u4 = 0.024 at the initial state.
  CHECK(f.sum() == doctest::Approx(0.006 * 4.0).epsilon(1e-12));

  const OdeProblem cons = reaction4();
  cons.rhs(0.0, cons.initial_state, f);
  CHECK(std::abs(f.sum()) < 1e-14);
}

TEST_CASE("reaction kinetics stay finite at negative stage values") {
  const OdeProblem p = reaction4();
  Eigen::VectorXd u(4), f(4);
  u << -1.0, 2.0, 1.0, 4.0;
  p.rhs(0.0, u, f);
  CHECK(f.allFinite());
  u << -0.01, 2.0, 1.0, 4.0;  // the unguarded denominator's pole
  p.rhs(0.0, u, f);
  CHECK(f.allFinite());
}

TEST_CASE("flow points inward on the boundary of the orthant") {
  std::mt19937_64 rng(11u);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (const std::string& name : problem_names()) {
    const OdeProblem p = problem_by_name(name);
    Eigen::VectorXd u(p.dimension), f(p.dimension);
    for (int draw = 0; draw < 30; ++draw) {
      for (Eigen::Index i = 0; i < u.size(); ++i)
        u(i) = unit(rng) * (std::abs(p.initial_state(i)) + 1.0);
      const Eigen::Index face =
          static_cast<Eigen::Index>(rng() % static_cast<unsigned long>(p.dimension));
      u(face) = 0.0;
      const double t = p.t_begin + unit(rng) * (p.t_end - p.t_begin);
      p.rhs(t, u, f);
      CHECK_MESSAGE(f(face) >= -1e-10 * (1.0 + f.cwiseAbs().maxCoeff()),
                    name << " face " << face);
    }
  }
}

TEST_CASE("advection-decay semidiscretization") {
  const int n = 25;
  const OdeProblem p = advection_decay(n);
  REQUIRE(p.dimension == n);
  REQUIRE(p.is_affine());

  // rhs really is L u + g.
  std::mt19937_64 rng(3u);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::VectorXd u(n), f(n);
  for (Eigen::Index i = 0; i < n; ++i) u(i) = unit(rng);
  p.rhs(0.0, u, f);
  CHECK((f - (p.linear_operator * u + p.affine_source)).cwiseAbs().maxCoeff() < 1e-13);

  // Inflow drives the first cell: from rest the only motion is at x = 0.
  p.rhs(0.0, Eigen::VectorXd::Zero(n), f);
  CHECK(f(0) == doctest::Approx(static_cast<double>(n)).epsilon(1e-13));
  CHECK(f.tail(n - 1).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS((void)advection_decay(1), std::invalid_argument);
}

TEST_CASE("diffusion semidiscretization") {
  const int n = 21;
  const OdeProblem p = diffusion(n);
  REQUIRE(p.dimension == n);
  CHECK(p.initial_state(n / 2) == 1.0);
  CHECK(p.initial_state.sum() == 1.0);

  const Eigen::MatrixXd& L = p.linear_operator;
  CHECK((L - L.transpose()).cwiseAbs().maxCoeff() == 0.0);
  const double w = static_cast<double>(n + 1) * (n + 1);
  CHECK(L(0, 0) == doctest::Approx(-2.0 * w).epsilon(1e-13));
  CHECK(L(0, 1) == doctest::Approx(w).epsilon(1e-13));
  // Interior row sums vanish; the Dirichlet rows lose one neighbor.
  const Eigen::VectorXd sums = L.rowwise().sum();
  CHECK(sums.segment(1, n - 2).cwiseAbs().maxCoeff() < 1e-9 * w);
  CHECK(sums(0) == doctest::Approx(-w).epsilon(1e-12));
  CHECK(sums(n - 1) == doctest::Approx(-w).epsilon(1e-12));
}

TEST_CASE("advection-diffusion-reaction layout and conservation") {
  const int n = 16;
  const OdeProblem p = adr(n);
  REQUIRE(p.dimension == 4 * n);
  CHECK(p.initial_state.minCoeff() > 0.0);
  REQUIRE(p.invariants.size() == 1);

  // Periodic transport plus balanced kinetics conserve the total mass.
  std::mt19937_64 rng(5u);
  std::uniform_real_distribution<double> unit(0.1, 2.0);
  Eigen::VectorXd u(4 * n), f(4 * n);
  for (Eigen::Index i = 0; i < u.size(); ++i) u(i) = unit(rng);
  p.rhs(0.0, u, f);
  CHECK(std::abs(f.sum()) < 1e-11);
}

TEST_CASE("stratospheric chemistry in normalized variables") {
  const OdeProblem p = stratospheric();
  REQUIRE(p.dimension == 6);
  CHECK((p.initial_state - Eigen::VectorXd::Ones(6)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(p.t_begin == doctest::Approx(12.0 * 3600.0));
  CHECK(p.t_end == doctest::Approx(84.0 * 3600.0));
  REQUIRE(p.invariants.size() == 2);
  CHECK(p.invariants[0].label == "oxygen");
  CHECK(p.invariants[1].label == "nitrogen");

  // The photolysis terms switch on during the day; either way the declared
  // combinations stay flat.
  Eigen::VectorXd f(6);
  for (const double t : {12.0 * 3600.0, 2.0 * 3600.0, 30.0 * 3600.0}) {
    p.rhs(t, p.initial_state, f);
    for (const LinearInvariant& inv : p.invariants) {
      const double scale = inv.weights.cwiseProduct(f).cwiseAbs().maxCoeff();
      CHECK(std::abs(inv.weights.dot(f)) <= 1e-7 * (1.0 + scale));
    }
  }
}

TEST_CASE("fine-integration references are step-size robust") {
  const OdeProblem p = reaction4();
  const Eigen::VectorXd a = reference_solution(p, 0.5, 0.02);
  const Eigen::VectorXd b = reference_solution(p, 0.5, 0.04);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(a.minCoeff() > 0.0);
}

TEST_CASE("reference requests before the initial time are rejected") {
  const OdeProblem p = linear2x2();
  CHECK_THROWS_AS((void)reference_solution(p, -1.0), std::invalid_argument);
  const Eigen::VectorXd at_start = reference_solution(p, 0.0);
  CHECK((at_start - p.initial_state).cwiseAbs().maxCoeff() == 0.0);
}

}  // TEST_SUITE

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>

#include "bprk/adaptation.hpp"
#include "bprk/bounds.hpp"
#include "bprk/order_conditions.hpp"
#include "bprk/tableau.hpp"

using namespace bprk;

namespace {

// Single step of the 2-species exchange u' = ((-5,1),(5,-1)) u taken with
// ssp33. The step size is folded into the state and derivatives (dt = 1), so
// the stage derivative matrix and the working state are
//   F = [(-5,5) (5,-5) (-5,5)],  u* = (29/9, -20/9),
// giving the unadapted update u* + F b = (-1/9, 10/9), which leaves the
// nonnegative orthant in the first component. The order-2 weight family is
// b + alpha (1/2, 1/2, -1); nonnegativity holds exactly for
// alpha in [1/45, 2/9], and the L1-closest feasible point is alpha = 1/45.
struct FoldedExchangeStep {
  Eigen::MatrixXd F{2, 3};
  Eigen::VectorXd u{2};
  Bounds box = Bounds::nonnegative(2);
  ButcherTableau ssp = builtin("ssp33");

  FoldedExchangeStep() {
    F.col(0) << -5.0, 5.0;
    F.col(1) << 5.0, -5.0;
    F.col(2) << -5.0, 5.0;
    u << 29.0 / 9.0, -20.0 / 9.0;
  }
};

}  // namespace

TEST_SUITE("adaptation") {

TEST_CASE("bound slack scales with the state") {
  Eigen::VectorXd small(2), large(2);
  small << 0.5, -0.25;
  large << 3.0, -20.0;
  CHECK(bound_slack(small) == doctest::Approx(1e-9).epsilon(1e-12));
  CHECK(bound_slack(large) == doctest::Approx(20e-9).epsilon(1e-12));
}

TEST_CASE("exchange step: closed-form optimum at order two") {
  FoldedExchangeStep ex;
  const OrderConditionSystem sys2 = assemble(ex.ssp, 2);
  AdaptationRequest req{ex.F, ex.u, 1.0, &ex.box, &sys2, ex.ssp.b};

  const AdaptationResult res = free_adapt(req);
  REQUIRE(res.status == AdaptationStatus::Adapted);
  CHECK(res.order == 2);
  CHECK(res.lp_solves >= 1);

  CHECK(std::abs(res.weights(0) - 8.0 / 45.0) < 1e-9);
  CHECK(std::abs(res.weights(1) - 8.0 / 45.0) < 1e-9);
  CHECK(std::abs(res.weights(2) - 29.0 / 45.0) < 1e-9);
  CHECK(std::abs(res.weight_change - 2.0 / 45.0) < 1e-10);

  const Eigen::VectorXd update = ex.u + ex.F * res.weights;
  CHECK(std::abs(update(0) - 0.0) < 1e-9);
  CHECK(std::abs(update(1) - 1.0) < 1e-9);

  // The update moved by (1/9, -1/9) relative to the design weights.
  CHECK(res.perturbation == doctest::Approx(1.0 / 9.0).epsilon(1e-9));

  // The adapted weights still satisfy the order-2 conditions.
  CHECK(sys2.residual(res.weights) < 1e-10);
}

TEST_CASE("exchange step: pinned probes bracket the feasible interval") {
  // Pinning the third weight freezes the family parameter alpha. Offering
  // the pinned candidate as base weights with an augmented system that
  // forbids any further motion turns free_adapt into a feasibility probe:
  // inside the interval the candidate passes untouched, outside it the LP
  // has no room and must report infeasibility.
  FoldedExchangeStep ex;
  const OrderConditionSystem sys2 = assemble(ex.ssp, 2);
  OrderConditionSystem pinned;
  pinned.order = 2;
  pinned.Q.resize(sys2.Q.rows() + 1, 3);
  pinned.Q.topRows(sys2.Q.rows()) = sys2.Q;
  pinned.Q.bottomRows(1) << 0.0, 0.0, 1.0;
  pinned.r.resize(sys2.r.size() + 1);  // unused by free_adapt, kept coherent
  pinned.r.head(sys2.r.size()) = sys2.r;

  Eigen::VectorXd direction(3);
  direction << 0.5, 0.5, -1.0;

  auto probe = [&](double alpha) {
    const Eigen::VectorXd candidate = ex.ssp.b + alpha * direction;
    pinned.r(sys2.r.size()) = candidate(2);
    AdaptationRequest req{ex.F, ex.u, 1.0, &ex.box, &pinned, candidate};
    return free_adapt(req).status;
  };

  CHECK(probe(1.0 / 45.0 + 1e-6) != AdaptationStatus::Infeasible);
  CHECK(probe(2.0 / 9.0 - 1e-6) != AdaptationStatus::Infeasible);
  CHECK(probe(1.0 / 45.0 - 1e-6) == AdaptationStatus::Infeasible);
  CHECK(probe(2.0 / 9.0 + 1e-6) == AdaptationStatus::Infeasible);
}

TEST_CASE("exchange step: order three is infeasible") {
  // ssp33 has no order-3 freedom (the condition matrix has full column
  // rank), so the only order-3 weights are the design weights, whose update
  // violates the box.
  FoldedExchangeStep ex;
  const OrderConditionSystem sys3 = assemble(ex.ssp, 3);
  AdaptationRequest req{ex.F, ex.u, 1.0, &ex.box, &sys3, ex.ssp.b};
  const AdaptationResult res = free_adapt(req);
  CHECK(res.status == AdaptationStatus::Infeasible);
  CHECK(res.lp_solves == 1);
}

TEST_CASE("updates already in bounds pass through unmodified") {
  FoldedExchangeStep ex;
  Eigen::VectorXd inside(2);
  inside << 10.0, 10.0;
  const OrderConditionSystem sys2 = assemble(ex.ssp, 2);
  AdaptationRequest req{ex.F, inside, 0.1, &ex.box, &sys2, ex.ssp.b};
  const AdaptationResult res = free_adapt(req);
  CHECK(res.status == AdaptationStatus::Unmodified);
  CHECK(res.weights == ex.ssp.b);
  CHECK(res.order == 2);
  CHECK(res.lp_solves == 0);
  CHECK(res.weight_change == 0.0);
  CHECK(res.perturbation == 0.0);
}

TEST_CASE("upper bounds are enforced too") {
  // One component, box [0, 1], an update overshooting the ceiling. The
  // order-1 family of ssp33 has two degrees of freedom, plenty to pull the
  // update back to the boundary.
  const ButcherTableau ssp = builtin("ssp33");
  Eigen::MatrixXd F(1, 3);
  F << 1.0, 1.0, 1.0;  // every weight vector summing to 1 shifts by dt
  Eigen::VectorXd u(1);
  u << 0.5;
  Bounds box = Bounds::box(1, 0.0, 1.0);
  const OrderConditionSystem sys1 = assemble(ssp, 1);
  AdaptationRequest req{F, u, 2.0, &box, &sys1, ssp.b};
  // With all stage derivatives equal, the shift dt * F * w = 2 for every
  // w summing to one: no reweighting can help.
  CHECK(free_adapt(req).status == AdaptationStatus::Infeasible);

  // Distinct columns make the ceiling reachable.
  F << 1.0, 0.5, 0.1;
  const AdaptationResult res = free_adapt(req);
  REQUIRE(res.status == AdaptationStatus::Adapted);
  const double update = (u + 2.0 * (F * res.weights))(0);
  CHECK(update <= 1.0 + 1e-9);
  CHECK(update >= -1e-9);
}

TEST_CASE("convex candidates collect design and companion columns") {
  const WeightCandidates cand = WeightCandidates::for_tableau(extrapolation_be(3));
  REQUIRE(cand.columns.cols() == 3);
  REQUIRE(cand.orders.size() == 3);
  CHECK(cand.orders[0] == 3);
  CHECK(cand.orders[1] == 2);
  CHECK(cand.orders[2] == 1);
  CHECK((cand.columns.col(0) - extrapolation_be(3).b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("convex adaptation mixes toward the feasible column") {
  // Scalar instance with per-column update shifts -0.3 (design), -0.25
  // (companion extrapolation), -0.05 (backward-Euler chain) from state 0.1:
  // only the chain direction can restore the bound, and the L1-cheapest mix
  // is g = (0.2, 0, 0.8), which parks the update exactly on the boundary.
  const ButcherTableau be3 = extrapolation_be(3);
  const WeightCandidates cand = WeightCandidates::for_tableau(be3);
  Eigen::MatrixXd F(1, 6);
  const double a = 2.0 / 15.0 + 0.25, c = 1.0 / 15.0, d = -0.05;
  F << a, c, c, d, d, d;
  Eigen::VectorXd u(1);
  u << 0.1;
  Bounds box = Bounds::nonnegative(1);
  AdaptationRequest req{F, u, 1.0, &box, nullptr, be3.b};

  const AdaptationResult res = convex_adapt(req, cand);
  REQUIRE(res.status == AdaptationStatus::Adapted);
  CHECK(res.order == 1);  // the chain column participates
  const Eigen::VectorXd expect = 0.2 * cand.columns.col(0) + 0.8 * cand.columns.col(2);
  CHECK((res.weights - expect).cwiseAbs().maxCoeff() < 1e-8);
  const double update = (u + F * res.weights)(0);
  CHECK(std::abs(update) < 1e-8);
  CHECK(res.perturbation == doctest::Approx(0.2).epsilon(1e-7));
  CHECK(res.weight_change == doctest::Approx(0.8 * 8.0).epsilon(1e-7));

  SUBCASE("feasible base weights come back unmodified") {
    Eigen::VectorXd comfortable(1);
    comfortable << 1.0;
    AdaptationRequest ok{F, comfortable, 1.0, &box, nullptr, be3.b};
    const AdaptationResult pass = convex_adapt(ok, cand);
    CHECK(pass.status == AdaptationStatus::Unmodified);
    CHECK(pass.order == 3);
  }

  SUBCASE("no candidate mix can rescue a hopeless state") {
    Eigen::VectorXd tiny(1);
    tiny << 0.01;
    AdaptationRequest bad{F, tiny, 1.0, &box, nullptr, be3.b};
    CHECK(convex_adapt(bad, cand).status == AdaptationStatus::Infeasible);
  }
}

}  // TEST_SUITE

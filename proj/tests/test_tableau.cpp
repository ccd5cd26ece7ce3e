#include <doctest.h>

#include <Eigen/Dense>

#include <stdexcept>

#include "bprk/tableau.hpp"

using namespace bprk;

namespace {

// Largest deviation of the row sums of A from c. Every catalog method is
// expected to satisfy this consistency convention exactly (up to rounding).
double row_sum_defect(const ButcherTableau& t) {
  return (t.A.rowwise().sum() - t.c).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_SUITE("tableau") {

TEST_CASE("catalog lists thirteen methods and all load") {
  const std::vector<std::string> names = builtin_names();
  REQUIRE(names.size() == 13);
  for (const std::string& name : names) {
    const ButcherTableau t = builtin(name);
    CHECK(t.name == name);
    CHECK(t.order >= 1);
    CHECK(t.stages() >= 1);
    CHECK(t.A.rows() == t.stages());
    CHECK(t.A.cols() == t.stages());
    CHECK(t.c.size() == t.stages());
    for (const EmbeddedWeights& e : t.embedded) {
      CHECK(e.b.size() == t.stages());
      CHECK(e.order >= 1);
      CHECK(!e.label.empty());
    }
  }
}

TEST_CASE("lookup ignores case, dashes and underscores") {
  CHECK(builtin("CashKarp").name == "cash-karp");
  CHECK(builtin("cash_karp").name == "cash-karp");
  CHECK(builtin("DORMAND-PRINCE").name == "dormand-prince");
  CHECK(builtin("extrapolation_be3").name == "extrapolation-be3");
  CHECK_THROWS_AS((void)builtin("no-such-method"), std::invalid_argument);
}

TEST_CASE("row sums of A equal c") {
  for (const std::string& name : builtin_names())
    CHECK_MESSAGE(row_sum_defect(builtin(name)) < 1e-13, name);
}

TEST_CASE("weights sum to one") {
  for (const std::string& name : builtin_names()) {
    const ButcherTableau t = builtin(name);
    CHECK_MESSAGE(t.b.sum() == doctest::Approx(1.0).epsilon(1e-13), name);
    for (const EmbeddedWeights& e : t.embedded)
      CHECK_MESSAGE(e.b.sum() == doctest::Approx(1.0).epsilon(1e-13),
                    name << "/" << e.label);
  }
}

TEST_CASE("structure classification") {
  Eigen::MatrixXd strictly_lower(2, 2), diagonal(2, 2), full(2, 2);
  strictly_lower << 0, 0, 1, 0;
  diagonal << 0.5, 0, 1, 0.5;
  full << 0.25, -0.1, 1, 0.25;
  CHECK(classify_structure(strictly_lower) == TableauStructure::Explicit);
  CHECK(classify_structure(diagonal) == TableauStructure::DiagonallyImplicit);
  CHECK(classify_structure(full) == TableauStructure::FullyImplicit);
  // Entries below the tolerance count as zero.
  CHECK(classify_structure(full, 0.2) == TableauStructure::DiagonallyImplicit);

  CHECK(builtin("ssp33").structure == TableauStructure::Explicit);
  CHECK(builtin("sdirk54").structure == TableauStructure::DiagonallyImplicit);
  CHECK(builtin("lobatto-iiic4").structure == TableauStructure::FullyImplicit);
  CHECK(builtin("lobatto-iiic4").runnable() == false);
  CHECK(builtin("ssp33").runnable());
}

TEST_CASE("ssp33 coefficients") {
  const ButcherTableau t = builtin("ssp33");
  REQUIRE(t.stages() == 3);
  CHECK(t.order == 3);
  CHECK(t.A(1, 0) == 1.0);
  CHECK(t.A(2, 0) == 0.25);
  CHECK(t.A(2, 1) == 0.25);
  CHECK(t.c(0) == 0.0);
  CHECK(t.c(1) == 1.0);
  CHECK(t.c(2) == 0.5);
  CHECK(t.b(0) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(t.b(1) == doctest::Approx(1.0 / 6.0).epsilon(1e-15));
  CHECK(t.b(2) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("backward euler extrapolation: chain structure") {
  const ButcherTableau t = extrapolation_be(3);
  REQUIRE(t.stages() == 6);
  CHECK(t.order == 3);
  CHECK(t.structure == TableauStructure::DiagonallyImplicit);

  // Chains of 1, 2 and 3 implicit Euler substeps of size dt/j, laid out as
  // diagonal blocks. Spot-check the block entries and the stage times.
  CHECK(t.A(0, 0) == 1.0);
  CHECK(t.A(1, 1) == 0.5);
  CHECK(t.A(2, 1) == 0.5);
  CHECK(t.A(2, 2) == 0.5);
  CHECK(t.A(3, 3) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(t.A(5, 3) == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(t.A(1, 0) == 0.0);  // chains do not couple
  CHECK(t.A(3, 2) == 0.0);
  Eigen::VectorXd c_expect(6);
  c_expect << 1.0, 0.5, 1.0, 1.0 / 3.0, 2.0 / 3.0, 1.0;
  CHECK((t.c - c_expect).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("backward euler extrapolation: frozen weights") {
  // Aitken-Neville coefficients over the harmonic sequence, evaluated at
  // step size zero, worked out by hand from the Lagrange basis.
  {
    const ButcherTableau t = extrapolation_be(2);
    Eigen::VectorXd expect(3);
    expect << -1.0, 1.0, 1.0;
    CHECK((t.b - expect).cwiseAbs().maxCoeff() < 1e-13);
  }
  {
    const ButcherTableau t = extrapolation_be(3);
    Eigen::VectorXd expect(6);
    expect << 0.5, -2.0, -2.0, 1.5, 1.5, 1.5;
    CHECK((t.b - expect).cwiseAbs().maxCoeff() < 1e-13);

    REQUIRE(t.embedded.size() == 2);
    CHECK(t.embedded[0].label == "extrapolation-be2");
    CHECK(t.embedded[0].order == 2);
    Eigen::VectorXd pair(6);
    pair << -1.0, 1.0, 1.0, 0.0, 0.0, 0.0;
    CHECK((t.embedded[0].b - pair).cwiseAbs().maxCoeff() < 1e-13);

    CHECK(t.embedded[1].label == "be-chain");
    CHECK(t.embedded[1].order == 1);
    Eigen::VectorXd chain(6);
    chain << 0.0, 0.0, 0.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0;
    CHECK((t.embedded[1].b - chain).cwiseAbs().maxCoeff() < 1e-15);
  }
  {
    const ButcherTableau t = extrapolation_be(4);
    Eigen::VectorXd expect(10);
    expect << -1.0 / 6.0, 2.0, 2.0, -4.5, -4.5, -4.5, 8.0 / 3.0, 8.0 / 3.0,
        8.0 / 3.0, 8.0 / 3.0;
    CHECK((t.b - expect).cwiseAbs().maxCoeff() < 1e-13);
  }
  CHECK_THROWS_AS((void)extrapolation_be(1), std::invalid_argument);
  CHECK_THROWS_AS((void)extrapolation_be(5), std::invalid_argument);
}

TEST_CASE("error pairs") {
  CHECK(builtin("rk4").error_pair() == nullptr);
  const ButcherTableau ck = builtin("cash-karp");
  REQUIRE(ck.error_pair() != nullptr);
  CHECK(ck.error_pair()->order == 4);
  const ButcherTableau be3 = builtin("extrapolation-be3");
  REQUIRE(be3.error_pair() != nullptr);
  CHECK(be3.error_pair()->order == 2);
}

}  // TEST_SUITE

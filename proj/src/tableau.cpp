// Catalog of Runge-Kutta tableaux.
//
// Coefficient sources:
//   ssp33           Shu & Osher (1988), the classical 3-stage SSP method
//   rk4             Kutta (1901), "the" fourth-order method
//   ssprk104        Ketcheson (2008), low-storage SSP(10,4) in Butcher form
//   cash-karp       Cash & Karp (1990)
//   dormand-prince  Dormand & Prince (1980), RK5(4)7M
//   backward-euler  implicit Euler as a one-stage tableau
//   sdirk54         Hairer & Wanner (1996), Table IV.6.5 (L-stable, gamma=1/4)
//   tr-bdf2         Bank et al. (1985) one-step form, gamma = 2 - sqrt(2)
//   lobatto-iiic4   Lobatto IIIC, 4 stages (Hairer & Wanner 1996)
//   radau-iia3      Radau IIA, 3 stages (Hairer & Wanner 1996)
//   extrapolation-be{2,3,4}  generated, see extrapolation_be() below

#include "bprk/tableau.hpp"

#include <cctype>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <unordered_map>

namespace bprk {

namespace {

// Exact rational scalar for the extrapolation generator. Numerators and
// denominators stay tiny (well under 10^4), so overflow is not a concern.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Rational() = default;
  Rational(std::int64_t n) : num(n), den(1) {}
  Rational(std::int64_t n, std::int64_t d) : num(n), den(d) { reduce(); }

  void reduce() {
    if (den < 0) {
      num = -num;
      den = -den;
    }
    const std::int64_t g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

Rational operator*(Rational a, Rational b) { return {a.num * b.num, a.den * b.den}; }
Rational operator/(Rational a, Rational b) { return {a.num * b.den, a.den * b.num}; }
Rational operator+(Rational a, Rational b) {
  return {a.num * b.den + b.num * a.den, a.den * b.den};
}

// Aitken-Neville weight of chain j when extrapolating depth k over the
// harmonic step sequence: lambda_j = prod_{i != j} j / (j - i).
Rational neville_weight(int j, int k) {
  Rational w(1);
  for (int i = 1; i <= k; ++i) {
    if (i == j) continue;
    w = w * Rational(j, j - i);
  }
  return w;
}

// Extrapolation weights of depth `depth` spread over the stage layout of a
// depth-k tableau (chains beyond `depth` get weight zero).
Eigen::VectorXd extrapolation_weights(int depth, int k) {
  const int s = k * (k + 1) / 2;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(s);
  Rational sum(0);
  int base = 0;
  for (int j = 1; j <= k; ++j) {
    if (j <= depth) {
      const Rational w = neville_weight(j, depth) / Rational(j);
      for (int m = 0; m < j; ++m) b(base + m) = w.value();
      sum = sum + neville_weight(j, depth);
    }
    base += j;
  }
  if (sum.num != sum.den)
    throw std::logic_error("extrapolation weights do not sum to one");
  return b;
}

ButcherTableau make_ssp33() {
  ButcherTableau t;
  t.name = "ssp33";
  t.order = 3;
  t.A = Eigen::MatrixXd::Zero(3, 3);
  t.A(1, 0) = 1.0;
  t.A(2, 0) = 0.25;
  t.A(2, 1) = 0.25;
  t.b = Eigen::Vector3d(1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0);
  t.c = Eigen::Vector3d(0.0, 1.0, 0.5);
  return t;
}

ButcherTableau make_rk4() {
  ButcherTableau t;
  t.name = "rk4";
  t.order = 4;
  t.A = Eigen::MatrixXd::Zero(4, 4);
  t.A(1, 0) = 0.5;
  t.A(2, 1) = 0.5;
  t.A(3, 2) = 1.0;
  t.b = Eigen::Vector4d(1.0 / 6.0, 1.0 / 3.0, 1.0 / 3.0, 1.0 / 6.0);
  t.c = Eigen::Vector4d(0.0, 0.5, 0.5, 1.0);
  return t;
}

// Butcher form of Ketcheson's low-storage SSP(10,4): all weights 1/10, A
// built from the two 1/6-cascades with the 1/15 coupling row.
ButcherTableau make_ssprk104() {
  ButcherTableau t;
  t.name = "ssprk104";
  t.order = 4;
  t.A = Eigen::MatrixXd::Zero(10, 10);
  for (int i = 1; i < 10; ++i) {
    for (int j = 0; j < i; ++j) {
      if (i >= 5 && j < 5)
        t.A(i, j) = 1.0 / 15.0;
      else
        t.A(i, j) = 1.0 / 6.0;
    }
  }
  t.b = Eigen::VectorXd::Constant(10, 0.1);
  t.c = t.A.rowwise().sum();
  return t;
}

ButcherTableau make_cash_karp() {
  ButcherTableau t;
  t.name = "cash-karp";
  t.order = 5;
  t.A = Eigen::MatrixXd::Zero(6, 6);
  t.A(1, 0) = 1.0 / 5.0;
  t.A(2, 0) = 3.0 / 40.0;
  t.A(2, 1) = 9.0 / 40.0;
  t.A(3, 0) = 3.0 / 10.0;
  t.A(3, 1) = -9.0 / 10.0;
  t.A(3, 2) = 6.0 / 5.0;
  t.A(4, 0) = -11.0 / 54.0;
  t.A(4, 1) = 5.0 / 2.0;
  t.A(4, 2) = -70.0 / 27.0;
  t.A(4, 3) = 35.0 / 27.0;
  t.A(5, 0) = 1631.0 / 55296.0;
  t.A(5, 1) = 175.0 / 512.0;
  t.A(5, 2) = 575.0 / 13824.0;
  t.A(5, 3) = 44275.0 / 110592.0;
  t.A(5, 4) = 253.0 / 4096.0;
  t.b.resize(6);
  t.b << 37.0 / 378.0, 0.0, 250.0 / 621.0, 125.0 / 594.0, 0.0, 512.0 / 1771.0;
  t.c.resize(6);
  t.c << 0.0, 1.0 / 5.0, 3.0 / 10.0, 3.0 / 5.0, 1.0, 7.0 / 8.0;
  Eigen::VectorXd bh(6);
  bh << 2825.0 / 27648.0, 0.0, 18575.0 / 48384.0, 13525.0 / 55296.0,
      277.0 / 14336.0, 1.0 / 4.0;
  t.embedded.push_back({"order4", bh, 4});
  return t;
}

ButcherTableau make_dormand_prince() {
  ButcherTableau t;
  t.name = "dormand-prince";
  t.order = 5;
  t.A = Eigen::MatrixXd::Zero(7, 7);
  t.A(1, 0) = 1.0 / 5.0;
  t.A(2, 0) = 3.0 / 40.0;
  t.A(2, 1) = 9.0 / 40.0;
  t.A(3, 0) = 44.0 / 45.0;
  t.A(3, 1) = -56.0 / 15.0;
  t.A(3, 2) = 32.0 / 9.0;
  t.A(4, 0) = 19372.0 / 6561.0;
  t.A(4, 1) = -25360.0 / 2187.0;
  t.A(4, 2) = 64448.0 / 6561.0;
  t.A(4, 3) = -212.0 / 729.0;
  t.A(5, 0) = 9017.0 / 3168.0;
  t.A(5, 1) = -355.0 / 33.0;
  t.A(5, 2) = 46732.0 / 5247.0;
  t.A(5, 3) = 49.0 / 176.0;
  t.A(5, 4) = -5103.0 / 18656.0;
  t.A(6, 0) = 35.0 / 384.0;
  t.A(6, 2) = 500.0 / 1113.0;
  t.A(6, 3) = 125.0 / 192.0;
  t.A(6, 4) = -2187.0 / 6784.0;
  t.A(6, 5) = 11.0 / 84.0;
  t.b.resize(7);
  t.b << 35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0,
      11.0 / 84.0, 0.0;
  t.c.resize(7);
  t.c << 0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0;
  Eigen::VectorXd bh(7);
  bh << 5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0,
      -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0;
  t.embedded.push_back({"order4", bh, 4});
  return t;
}

ButcherTableau make_backward_euler() {
  ButcherTableau t;
  t.name = "backward-euler";
  t.order = 1;
  t.A = Eigen::MatrixXd::Constant(1, 1, 1.0);
  t.b = Eigen::VectorXd::Constant(1, 1.0);
  t.c = Eigen::VectorXd::Constant(1, 1.0);
  return t;
}

ButcherTableau make_sdirk54() {
  ButcherTableau t;
  t.name = "sdirk54";
  t.order = 4;
  t.A = Eigen::MatrixXd::Zero(5, 5);
  t.A(0, 0) = 0.25;
  t.A(1, 0) = 0.5;
  t.A(1, 1) = 0.25;
  t.A(2, 0) = 17.0 / 50.0;
  t.A(2, 1) = -1.0 / 25.0;
  t.A(2, 2) = 0.25;
  t.A(3, 0) = 371.0 / 1360.0;
  t.A(3, 1) = -137.0 / 2720.0;
  t.A(3, 2) = 15.0 / 544.0;
  t.A(3, 3) = 0.25;
  t.A(4, 0) = 25.0 / 24.0;
  t.A(4, 1) = -49.0 / 48.0;
  t.A(4, 2) = 125.0 / 16.0;
  t.A(4, 3) = -85.0 / 12.0;
  t.A(4, 4) = 0.25;
  t.b = t.A.row(4).transpose();
  t.c.resize(5);
  t.c << 0.25, 0.75, 11.0 / 20.0, 0.5, 1.0;
  Eigen::VectorXd bh(5);
  bh << 59.0 / 48.0, -17.0 / 96.0, 225.0 / 32.0, -85.0 / 12.0, 0.0;
  t.embedded.push_back({"order3", bh, 3});
  return t;
}

ButcherTableau make_tr_bdf2() {
  const double g = 2.0 - std::sqrt(2.0);
  const double r = std::sqrt(2.0) / 4.0;
  ButcherTableau t;
  t.name = "tr-bdf2";
  t.order = 2;
  t.A = Eigen::MatrixXd::Zero(3, 3);
  t.A(1, 0) = g / 2.0;
  t.A(1, 1) = g / 2.0;
  t.A(2, 0) = r;
  t.A(2, 1) = r;
  t.A(2, 2) = g / 2.0;
  t.b = t.A.row(2).transpose();
  t.c = Eigen::Vector3d(0.0, g, 1.0);
  Eigen::VectorXd bh(3);
  bh << (1.0 - r) / 3.0, (3.0 * r + 1.0) / 3.0, g / 6.0;
  t.embedded.push_back({"order3", bh, 3});
  return t;
}

ButcherTableau make_lobatto_iiic4() {
  const double s5 = std::sqrt(5.0);
  ButcherTableau t;
  t.name = "lobatto-iiic4";
  t.order = 6;
  t.A.resize(4, 4);
  t.A.row(0) << 1.0 / 12.0, -s5 / 12.0, s5 / 12.0, -1.0 / 12.0;
  t.A.row(1) << 1.0 / 12.0, 0.25, (10.0 - 7.0 * s5) / 60.0, s5 / 60.0;
  t.A.row(2) << 1.0 / 12.0, (10.0 + 7.0 * s5) / 60.0, 0.25, -s5 / 60.0;
  t.A.row(3) << 1.0 / 12.0, 5.0 / 12.0, 5.0 / 12.0, 1.0 / 12.0;
  t.b = t.A.row(3).transpose();
  t.c.resize(4);
  t.c << 0.0, (5.0 - s5) / 10.0, (5.0 + s5) / 10.0, 1.0;
  return t;
}

ButcherTableau make_radau_iia3() {
  const double s6 = std::sqrt(6.0);
  ButcherTableau t;
  t.name = "radau-iia3";
  t.order = 5;
  t.A.resize(3, 3);
  t.A.row(0) << (88.0 - 7.0 * s6) / 360.0, (296.0 - 169.0 * s6) / 1800.0,
      (-2.0 + 3.0 * s6) / 225.0;
  t.A.row(1) << (296.0 + 169.0 * s6) / 1800.0, (88.0 + 7.0 * s6) / 360.0,
      (-2.0 - 3.0 * s6) / 225.0;
  t.A.row(2) << (16.0 - s6) / 36.0, (16.0 + s6) / 36.0, 1.0 / 9.0;
  t.b = t.A.row(2).transpose();
  t.c.resize(3);
  t.c << (4.0 - s6) / 10.0, (4.0 + s6) / 10.0, 1.0;
  return t;
}

// Identifier normalization: lowercase, '-' and '_' stripped.
std::string normalize(const std::string& name) {
  std::string key;
  key.reserve(name.size());
  for (char ch : name) {
    if (ch == '-' || ch == '_') continue;
    key.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
  }
  return key;
}

}  // namespace

TableauStructure classify_structure(const Eigen::MatrixXd& A, double tol) {
  bool diagonal = false;
  for (Eigen::Index i = 0; i < A.rows(); ++i) {
    for (Eigen::Index j = i; j < A.cols(); ++j) {
      if (std::abs(A(i, j)) <= tol) continue;
      if (j > i) return TableauStructure::FullyImplicit;
      diagonal = true;
    }
  }
  return diagonal ? TableauStructure::DiagonallyImplicit
                  : TableauStructure::Explicit;
}

ButcherTableau extrapolation_be(int depth) {
  if (depth < 2 || depth > 4)
    throw std::invalid_argument("extrapolation_be: depth must be 2, 3 or 4");
  const int k = depth;
  const int s = k * (k + 1) / 2;
  ButcherTableau t;
  t.name = "extrapolation-be" + std::to_string(k);
  t.order = k;
  t.A = Eigen::MatrixXd::Zero(s, s);
  t.c = Eigen::VectorXd::Zero(s);
  int base = 0;
  for (int j = 1; j <= k; ++j) {
    for (int m = 0; m < j; ++m) {
      for (int l = 0; l <= m; ++l) t.A(base + m, base + l) = 1.0 / j;
      t.c(base + m) = static_cast<double>(m + 1) / j;
    }
    base += j;
  }
  t.b = extrapolation_weights(k, k);
  t.embedded.push_back(
      {"extrapolation-be" + std::to_string(k - 1), extrapolation_weights(k - 1, k), k - 1});
  // Plain chain of k backward-Euler substeps: first order, but it inherits
  // backward Euler's unconditional positivity.
  Eigen::VectorXd chain = Eigen::VectorXd::Zero(s);
  chain.tail(k).setConstant(1.0 / k);
  t.embedded.push_back({"be-chain", chain, 1});
  t.structure = TableauStructure::DiagonallyImplicit;
  return t;
}

ButcherTableau builtin(const std::string& name) {
  static const std::unordered_map<std::string, ButcherTableau (*)()> catalog = {
      {"ssp33", make_ssp33},
      {"rk4", make_rk4},
      {"ssprk104", make_ssprk104},
      {"cashkarp", make_cash_karp},
      {"dormandprince", make_dormand_prince},
      {"backwardeuler", make_backward_euler},
      {"sdirk54", make_sdirk54},
      {"trbdf2", make_tr_bdf2},
      {"lobattoiiic4", make_lobatto_iiic4},
      {"radauiia3", make_radau_iia3},
  };
  const std::string key = normalize(name);
  if (key == "extrapolationbe2") return extrapolation_be(2);
  if (key == "extrapolationbe3") return extrapolation_be(3);
  if (key == "extrapolationbe4") return extrapolation_be(4);
  auto it = catalog.find(key);
  if (it == catalog.end())
    throw std::invalid_argument("unknown method '" + name + "'");
  ButcherTableau t = it->second();
  t.structure = classify_structure(t.A);
  return t;
}

std::vector<std::string> builtin_names() {
  return {"ssp33",          "rk4",
          "ssprk104",       "cash-karp",
          "dormand-prince", "backward-euler",
          "sdirk54",        "tr-bdf2",
          "lobatto-iiic4",  "radau-iia3",
          "extrapolation-be2", "extrapolation-be3", "extrapolation-be4"};
}

}  // namespace bprk

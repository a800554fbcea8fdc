#include "ivobs/poly.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace ivobs;

TEST_CASE("poly_eval on small polynomials") {
  CHECK(poly_eval(Poly({1.0}), 5.0) == 1.0);
  CHECK(poly_eval(Poly({0.0, 1.0}), 0.7) == doctest::Approx(0.7));
  // Numerator printed with the two-state example's gains; constant term at tau = 0.
  const Poly num({0.0043, -0.0409, 0.2132, -0.4410, 0.3064});
  CHECK(num(0.0) == 0.0043);
  CHECK(num(1.0) == doctest::Approx(0.0043 - 0.0409 + 0.2132 - 0.4410 + 0.3064).epsilon(1e-14));
}

TEST_CASE("trailing exact zeros are trimmed, nothing else") {
  CHECK(Poly({1.0, 2.0, 0.0, 0.0}).degree() == 1);
  CHECK(Poly({0.0, 0.0}).is_zero());
  CHECK(Poly({1.0, 1e-300}).degree() == 1);
  CHECK(Poly().degree() == 0);
}

TEST_CASE("poly_derivative follows the power rule") {
  CHECK(poly_derivative(Poly({3.5})).is_zero());
  CHECK(poly_derivative(Poly({0.0, 0.0, 1.0})) == Poly({0.0, 2.0}));
  CHECK(poly_derivative(Poly({1.0, 2.0, 3.0})) == Poly({2.0, 6.0}));
}

TEST_CASE("derivative agrees with central differences") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coef(-1.0, 1.0), at(-1.0, 2.0);
  std::uniform_int_distribution<int> deg(0, 8);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> c(deg(rng) + 1);
    for (auto& v : c) v = coef(rng);
    const Poly p(c);
    const Poly dp = p.derivative();
    const double tau = at(rng);
    const double fd = oracle::central_difference([&](double x) { return p(x); }, tau, 1e-6);
    CHECK(std::abs(dp(tau) - fd) <= 1e-6 * (1.0 + std::abs(dp(tau))));
  }
}

TEST_CASE("polynomial arithmetic") {
  const Poly a({1.0, 1.0});   // 1 + t
  const Poly b({-1.0, 1.0});  // -1 + t
  CHECK(a * b == Poly({-1.0, 0.0, 1.0}));
  CHECK(a + b == Poly({0.0, 2.0}));
  CHECK((a - a).is_zero());
  CHECK(2.0 * a == Poly({2.0, 2.0}));
  CHECK(Poly::monomial(3, 2.0) == Poly({0.0, 0.0, 0.0, 2.0}));
  CHECK_THROWS_AS(Poly::monomial(-1), std::invalid_argument);
}

TEST_CASE("handelman_basis enumeration") {
  const double T = 0.7;
  const HandelmanBasis b1 = handelman_basis(0.0, T, 1);
  REQUIRE(b1.elements.size() == 3);
  std::vector<Poly> expect{Poly({1.0}), Poly({0.0, 1.0}), Poly({T, -1.0})};
  for (const auto& e : expect) {
    bool found = false;
    for (const auto& el : b1.elements) found = found || el == e;
    CHECK(found);
  }
  CHECK(handelman_basis(0.0, 1.0, 2).elements.size() == 6);

  const HandelmanBasis b2 = handelman_basis(0.0, 1.0, 2);
  for (std::size_t k = 0; k < b2.elements.size(); ++k)
    if (b2.exponents[k] == std::make_pair(1, 1)) CHECK(b2.elements[k] == Poly({0.0, 1.0, -1.0}));

  CHECK_THROWS_AS(handelman_basis(1.0, 1.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(handelman_basis(2.0, 1.0, 2), std::invalid_argument);
}

TEST_CASE("handelman_basis counts and nonnegativity") {
  for (int d = 0; d <= 10; ++d) CHECK(handelman_basis(0.0, 1.0, d).elements.size() == (d + 1) * (d + 2) / 2);
  // Clock intervals of unit scale; monomial evaluation near the ends loses
  // roughly eps * (|lo| + hi)^d, so wide intervals are not covered here.
  for (auto [lo, hi] : {std::pair{0.0, 0.7}, std::pair{0.0, 1.0}, std::pair{0.25, 1.0}}) {
    const HandelmanBasis b = handelman_basis(lo, hi, 10);
    double worst = 1.0;
    for (double t : linspace(lo, hi, 10000))
      for (const auto& e : b.elements) worst = std::min(worst, e(t));
    CHECK(worst >= -1e-12);
  }
}

TEST_CASE("bernstein_basis is a nonnegative partition of unity") {
  const auto basis = bernstein_basis(0.5, 2.0, 6);
  REQUIRE(basis.size() == 7);
  for (double t : linspace(0.5, 2.0, 301)) {
    double s = 0.0;
    for (const auto& b : basis) {
      CHECK(b(t) >= -1e-12);
      s += b(t);
    }
    CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
  }
  CHECK(basis.front()(0.5) == doctest::Approx(1.0));
  CHECK(basis.back()(2.0) == doctest::Approx(1.0));
  CHECK_THROWS_AS(bernstein_basis(1.0, 0.0, 2), std::invalid_argument);
}

TEST_CASE("polymat_eval and derivative") {
  PolyMatrix I = PolyMatrix::constant(Matrix::Identity(2, 2));
  CHECK(polymat_eval(I, 3.3) == Matrix::Identity(2, 2));

  PolyMatrix t(1, 1);
  t(0, 0) = Poly({0.0, 1.0});
  CHECK(polymat_eval(t, 0.7)(0, 0) == doctest::Approx(0.7));

  const PolyMatrix X = PolyMatrix::diagonal({Poly({1.0, 1.0}), Poly({2.0})});
  CHECK(X.eval(1.0) == Matrix(Eigen::Vector2d(2.0, 2.0).asDiagonal()));
  CHECK(X.max_degree() == 1);
  CHECK(X.derivative().max_degree() == 0);
  CHECK(X.derivative().eval(5.0) == Matrix(Eigen::Vector2d(1.0, 0.0).asDiagonal()));
}

TEST_CASE("linspace covers both ends") {
  const auto g = linspace(0.0, 0.7, 8);
  REQUIRE(g.size() == 8);
  CHECK(g.front() == 0.0);
  CHECK(g.back() == 0.7);
  CHECK(linspace(1.0, 1.0, 1) == std::vector<double>{1.0});
}

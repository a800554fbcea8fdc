#include "ivobs/lp.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace ivobs;

TEST_CASE("lp_solve small examples") {
  SUBCASE("maximize x on [0, 1]") {
    LinearProgram lp;
    const int x = lp.add_variable(0.0, kInf, -1.0);
    lp.add_constraint({{x, 1.0}}, Relation::LessEq, 1.0);
    const LpOutcome out = lp_solve(lp);
    REQUIRE(out.optimal());
    CHECK(out.solution(x) == doctest::Approx(1.0));
    CHECK(out.objective == doctest::Approx(-1.0));
  }
  SUBCASE("x <= -1 with x >= 0") {
    LinearProgram lp;
    const int x = lp.add_variable(0.0, kInf);
    lp.add_constraint({{x, 1.0}}, Relation::LessEq, -1.0);
    CHECK(lp_solve(lp).status == LpStatus::Infeasible);
  }
  SUBCASE("simplex facet") {
    LinearProgram lp;
    const int x = lp.add_variable(0.0, kInf, -1.0);
    const int y = lp.add_variable(0.0, kInf, -1.0);
    lp.add_constraint({{x, 1.0}, {y, 1.0}}, Relation::LessEq, 1.0);
    const LpOutcome out = lp_solve(lp);
    REQUIRE(out.optimal());
    CHECK(out.objective == doctest::Approx(-1.0));
    CHECK(out.solution.sum() == doctest::Approx(1.0));
    CHECK(out.solution.minCoeff() >= -1e-12);
  }
  SUBCASE("unbounded ray") {
    LinearProgram lp;
    lp.add_variable(0.0, kInf, -1.0);
    CHECK(lp_solve(lp).status == LpStatus::Unbounded);
  }
}

TEST_CASE("lp_feasibility examples") {
  {
    LinearProgram lp;
    const int x = lp.add_variable(-kInf, kInf, 5.0);
    lp.add_constraint({{x, 1.0}}, Relation::GreaterEq, 1.0);
    lp.add_constraint({{x, 1.0}}, Relation::LessEq, 2.0);
    const LpOutcome out = lp_feasibility(lp);
    REQUIRE(out.optimal());
    CHECK(out.solution(x) >= 1.0 - 1e-12);
    CHECK(out.solution(x) <= 2.0 + 1e-12);
  }
  {
    LinearProgram lp;
    const int x = lp.add_variable(-kInf, kInf);
    lp.add_constraint({{x, 1.0}}, Relation::GreaterEq, 1.0);
    lp.add_constraint({{x, 1.0}}, Relation::LessEq, 0.0);
    CHECK(lp_feasibility(lp).status == LpStatus::Infeasible);
  }
  {
    LinearProgram lp;
    lp.add_variable(-kInf, kInf);
    CHECK(lp_feasibility(lp).optimal());
  }
}

TEST_CASE("free variables, equalities and one-sided bounds") {
  LinearProgram lp;
  const int x = lp.add_variable(-kInf, kInf, 1.0);
  const int y = lp.add_variable(-kInf, 4.0, 1.0);
  lp.add_constraint({{x, 1.0}, {y, -1.0}}, Relation::Equal, 1.0);
  lp.add_constraint({{x, 1.0}, {y, 1.0}}, Relation::GreaterEq, 3.0);
  const LpOutcome out = lp_solve(lp);
  REQUIRE(out.optimal());
  CHECK(out.objective == doctest::Approx(3.0));
  CHECK(out.solution(x) == doctest::Approx(2.0));
  CHECK(out.solution(y) == doctest::Approx(1.0));
}

TEST_CASE("degenerate program that cycles under naive pricing") {
  // Beale's example; optimum -5/4.
  LinearProgram lp;
  const int x4 = lp.add_variable(0.0, kInf, -0.75);
  const int x5 = lp.add_variable(0.0, kInf, 20.0);
  const int x6 = lp.add_variable(0.0, kInf, -0.5);
  const int x7 = lp.add_variable(0.0, kInf, 6.0);
  lp.add_constraint({{x4, 0.25}, {x5, -8.0}, {x6, -1.0}, {x7, 9.0}}, Relation::LessEq, 0.0);
  lp.add_constraint({{x4, 0.5}, {x5, -12.0}, {x6, -0.5}, {x7, 3.0}}, Relation::LessEq, 0.0);
  lp.add_constraint({{x6, 1.0}}, Relation::LessEq, 1.0);
  const LpOutcome out = lp_solve(lp);
  REQUIRE(out.optimal());
  CHECK(out.objective == doctest::Approx(-1.25));
}

TEST_CASE("constraint rows without variables") {
  LinearProgram lp;
  const int x = lp.add_variable(0.0, 1.0);
  lp.add_constraint({{x, 0.0}}, Relation::GreaterEq, 0.0);
  CHECK(lp_feasibility(lp).optimal());
  lp.add_constraint({{x, 0.0}}, Relation::GreaterEq, 1.0);
  CHECK(lp_feasibility(lp).status == LpStatus::Infeasible);
}

TEST_CASE("non-finite data is rejected") {
  LinearProgram lp;
  const int x = lp.add_variable(0.0, 1.0);
  lp.add_constraint({{x, std::numeric_limits<double>::quiet_NaN()}}, Relation::LessEq, 1.0);
  CHECK_THROWS_AS(lp_solve(lp), std::invalid_argument);

  LinearProgram lp2;
  const int y = lp2.add_variable(0.0, 1.0);
  lp2.add_constraint({{y, 1.0}}, Relation::LessEq, kInf);
  CHECK_THROWS_AS(lp_solve(lp2), std::invalid_argument);
}

TEST_CASE("row scaling does not change the optimum") {
  for (double s : {1e-6, 1.0, 1e6}) {
    LinearProgram lp;
    const int x = lp.add_variable(0.0, kInf, -1.0);
    const int y = lp.add_variable(0.0, kInf, -2.0);
    lp.add_constraint({{x, s}, {y, s}}, Relation::LessEq, 4.0 * s);
    lp.add_constraint({{x, 1.0}, {y, 3.0}}, Relation::LessEq, 6.0);
    const LpOutcome out = lp_solve(lp);
    REQUIRE(out.optimal());
    CHECK(out.objective == doctest::Approx(-5.0));
  }
}

TEST_CASE("random feasible programs are never declared infeasible") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0), pos(0.0, 1.0);
  std::uniform_int_distribution<int> nvar(2, 8), nrow(2, 12), rel(0, 2);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = nvar(rng), m = nrow(rng);
    Eigen::VectorXd v0(n);
    for (int j = 0; j < n; ++j) v0(j) = 5.0 * u(rng);
    LinearProgram lp;
    for (int j = 0; j < n; ++j) lp.add_variable(-10.0, 10.0, u(rng));
    for (int i = 0; i < m; ++i) {
      LinearTerms terms;
      double av = 0.0;
      for (int j = 0; j < n; ++j) {
        const double a = u(rng);
        terms.push_back({j, a});
        av += a * v0(j);
      }
      switch (rel(rng)) {
        case 0: lp.add_constraint(terms, Relation::LessEq, av + pos(rng)); break;
        case 1: lp.add_constraint(terms, Relation::GreaterEq, av - pos(rng)); break;
        default: lp.add_constraint(terms, Relation::Equal, av); break;
      }
    }
    const LpOutcome out = lp_solve(lp);
    REQUIRE(out.optimal());
    CHECK(lp.max_relative_violation(out.solution) <= 1e-9);
    CHECK(out.objective <= lp.objective_at(v0) + 1e-9 * (1.0 + std::abs(out.objective)));
  }
}

TEST_CASE("optimum matches brute-force vertex enumeration") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> nvar(1, 3), nrow(1, 6), rel(0, 1);
  int infeasible = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const int n = nvar(rng), m = nrow(rng);
    LinearProgram lp;
    Eigen::VectorXd c(n);
    for (int j = 0; j < n; ++j) {
      c(j) = u(rng);
      lp.add_variable(-5.0, 5.0, c(j));
    }
    // Oracle rows: every constraint as a'v <= b, bounds included.
    oracle::Mat A(m + 2 * n, n);
    oracle::Vec b(m + 2 * n);
    A.setZero();
    for (int i = 0; i < m; ++i) {
      LinearTerms terms;
      Eigen::VectorXd a(n);
      for (int j = 0; j < n; ++j) {
        a(j) = u(rng);
        terms.push_back({j, a(j)});
      }
      const double rhs = 2.0 * u(rng);
      if (rel(rng) == 0) {
        lp.add_constraint(terms, Relation::LessEq, rhs);
        A.row(i) = a.transpose();
        b(i) = rhs;
      } else {
        lp.add_constraint(terms, Relation::GreaterEq, rhs);
        A.row(i) = -a.transpose();
        b(i) = -rhs;
      }
    }
    for (int j = 0; j < n; ++j) {
      A(m + 2 * j, j) = 1.0;
      b(m + 2 * j) = 5.0;
      A(m + 2 * j + 1, j) = -1.0;
      b(m + 2 * j + 1) = 5.0;
    }
    const auto best = oracle::lp_by_vertices(c, A, b);
    const LpOutcome out = lp_solve(lp);
    if (!best) {
      ++infeasible;
      CHECK(out.status == LpStatus::Infeasible);
      continue;
    }
    REQUIRE(out.optimal());
    CHECK(out.objective == doctest::Approx(best->objective).epsilon(1e-8));
  }
  CHECK(infeasible < 200);
}

TEST_CASE("returned points satisfy the stored constraints") {
  LinearProgram lp;
  const int x = lp.add_variable(0.0, kInf, 1.0);
  const int y = lp.add_variable(0.0, kInf, 1.0);
  lp.add_dense_constraint(Eigen::Vector2d(1.0, 2.0), Relation::GreaterEq, 4.0);
  lp.add_constraint({{x, 3.0}, {y, 1.0}}, Relation::GreaterEq, 6.0);
  const LpOutcome out = lp_solve(lp);
  REQUIRE(out.optimal());
  CHECK(lp.max_violation(out.solution) <= 1e-9);
  CHECK(out.objective == doctest::Approx(2.8));
}

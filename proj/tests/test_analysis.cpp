#include "ivobs/analysis.hpp"
#include "ivobs/sim.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace ivobs;

namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

ImpulsiveSystem autonomous(const Matrix& A, const Matrix& J) {
  return ImpulsiveSystem::make(A, Matrix::Zero(A.rows(), 0), {J}, Matrix::Zero(A.rows(), 0));
}

ImpulsiveSystem two_state_plant() {
  Matrix A(2, 2), J(2, 2);
  A << -1, 0, 1, -2;
  J << 2, 1, 1, 3;
  return autonomous(A, J);
}

double rel_frobenius(const Matrix& a, const Matrix& b) { return (a - b).norm() / b.norm(); }

// Largest violation of the clock conditions, evaluated here without the library's checker.
double clock_violation(const ImpulsiveSystem& sys, const ClockCertificate& c) {
  const int n = sys.n();
  auto zeta = [&](double t) { return Vector(c.zeta.eval(t).col(0)); };
  auto dzeta = [&](double t) { return Vector(c.zeta.derivative().eval(t).col(0)); };
  double worst = -kInf;
  const Vector ones = Vector::Ones(n);
  if (c.spec.is_range()) {
    for (double t : linspace(0.0, c.spec.tmax(), 10000)) {
      const Vector flow = dzeta(t) + sys.A_at(t).transpose() * zeta(t);
      worst = std::max(worst, flow.maxCoeff());
    }
    for (const auto& J : sys.J)
      for (double th : linspace(c.spec.tmin(), c.spec.tmax(), 10000)) {
        const Vector jump = J.transpose() * zeta(0.0) - zeta(th) + c.eps * ones;
        worst = std::max(worst, jump.maxCoeff());
      }
    worst = std::max(worst, -zeta(0.0).minCoeff());
  } else {
    const double tb = c.spec.tbar();
    for (double t : linspace(0.0, tb, 10000)) {
      const Vector flow = -dzeta(t) + sys.A_at(t).transpose() * zeta(t);
      worst = std::max(worst, flow.maxCoeff());
    }
    for (const auto& J : sys.J) {
      const Vector jump = J.transpose() * zeta(tb) - zeta(0.0) + c.eps * ones;
      worst = std::max(worst, jump.maxCoeff());
    }
    worst = std::max(worst, (sys.A_at(tb).transpose() * zeta(tb)).maxCoeff());
    worst = std::max(worst, -zeta(tb).minCoeff());
  }
  return worst;
}

}  // namespace

TEST_CASE("transition_matrix examples") {
  CHECK(transition_matrix(scalar(0.0), 3.0, 10).value == scalar(1.0));
  CHECK(transition_matrix(scalar(-1.0), 1.0, 200).value(0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-10));

  Matrix A(2, 2);
  A << -1, 0, 1, -2;
  const Matrix phi = transition_matrix(A, 0.7, 200).value;
  const double t = 0.7;
  Matrix closed(2, 2);
  closed << std::exp(-t), 0, std::exp(-t) - std::exp(-2 * t), std::exp(-2 * t);
  CHECK((phi - closed).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(phi(0, 0) == doctest::Approx(0.496585).epsilon(1e-6));
  CHECK(phi(1, 0) == doctest::Approx(0.249989).epsilon(1e-5));
  CHECK(phi(1, 1) == doctest::Approx(0.246597).epsilon(1e-6));

  const TransitionMatrix zero = transition_matrix(A, 0.0, 5);
  CHECK(zero.value == Matrix::Identity(2, 2));
  const TransitionMatrix tm = transition_matrix(A, 1.0, 10);
  CHECK(tm.nodes.size() == 11);
  CHECK(tm.nodes.front() == Matrix::Identity(2, 2));
  CHECK(tm.step() == doctest::Approx(0.1));

  CHECK_THROWS_AS(transition_matrix(A, -1.0, 10), std::invalid_argument);
  CHECK_THROWS_AS(transition_matrix(A, 1.0, 0), std::invalid_argument);
}

TEST_CASE("transition_matrix matches the scaling-and-squaring oracle") {
  std::mt19937_64 rng(101);
  std::uniform_int_distribution<int> dim(1, 4);
  std::uniform_real_distribution<double> horizon(0.1, 2.0);
  for (int k = 0; k < 20; ++k) {
    const Matrix A = oracle::random_metzler_stable(dim(rng), rng);
    const double T = horizon(rng);
    CHECK(rel_frobenius(transition_matrix(A, T, 200).value, oracle::expm(A * T)) <= 1e-8);
  }
}

TEST_CASE("clock-dependent flow") {
  PolyMatrix A(1, 1);
  A(0, 0) = Poly({-1.0, -1.0});
  const double T = 1.3;
  CHECK(transition_matrix(A, T, 200).value(0, 0) == doctest::Approx(std::exp(-T - 0.5 * T * T)).epsilon(1e-9));
}

TEST_CASE("range spectral certificates") {
  SUBCASE("contracting jumps") {
    const auto r = certify_range_spectral(autonomous(scalar(-1), scalar(0.5)), 0.5, 2.0);
    REQUIRE(r.certified());
    CHECK(r.certificate->lambda(0) == doctest::Approx(1.0));
    CHECK(r.certificate->margin == doctest::Approx(0.5 * std::exp(-0.5) - 1.0).epsilon(1e-6));
    CHECK(r.certificate->margin < 0.0);

    const auto r2 = certify_range_spectral(autonomous(-Matrix::Identity(2, 2), 0.5 * Matrix::Identity(2, 2)), 1.0, 2.0);
    REQUIRE(r2.certified());
    CHECK(r2.certificate->lambda.minCoeff() >= 1e-6);
    CHECK(r2.certificate->lambda.sum() == doctest::Approx(2.0));
  }
  SUBCASE("two-state plant at 0.7 is not certifiable") {
    const ImpulsiveSystem sys = two_state_plant();
    const Matrix M = sys.J[0] * oracle::expm(sys.A_at(0.0) * 0.7) - Matrix::Identity(2, 2);
    CHECK(M(0, 0) == doctest::Approx(0.2432).epsilon(2e-4));
    CHECK(M(1, 0) == doctest::Approx(1.2466).epsilon(2e-4));
    CHECK(M(0, 1) == doctest::Approx(0.2466).epsilon(2e-4));
    CHECK(M(1, 1) == doctest::Approx(-0.2602).epsilon(2e-4));
    // A positive lambda would need lambda' M(:,0) < 0 with a positive column.
    CHECK(M.col(0).minCoeff() > 0.0);
    CHECK(certify_range_spectral(sys, 0.7, 0.7).status == CertStatus::Infeasible);
  }
  SUBCASE("identity jump over a zero flow") {
    CHECK(certify_range_spectral(autonomous(scalar(0.0), scalar(1.0)), 0.5, 1.0).status == CertStatus::Infeasible);
  }
  SUBCASE("non-positive systems are rejected") {
    Matrix A(2, 2);
    A << -1, -1, 0, -1;
    CHECK_THROWS_AS(certify_range_spectral(autonomous(A, Matrix::Identity(2, 2)), 0.5, 1.0), std::invalid_argument);
  }
}

TEST_CASE("minimum spectral certificates") {
  const auto a = certify_min_spectral(autonomous(scalar(-1), scalar(0.5)), 0.1);
  REQUIRE(a.certified());
  CHECK(a.certificate->lambda(0) == doctest::Approx(1.0));
  CHECK(certify_min_spectral(autonomous(scalar(-1), scalar(2.0)), 0.1).status == CertStatus::Infeasible);
  const auto c = certify_min_spectral(autonomous(scalar(-1), scalar(2.0)), 1.0);
  REQUIRE(c.certified());
  CHECK(c.certificate->margin == doctest::Approx(2.0 * std::exp(-1.0) - 1.0).epsilon(1e-6));
  CHECK(certify_min_spectral(two_state_plant(), 0.7).status == CertStatus::Infeasible);
  CHECK(certify_min_spectral(autonomous(scalar(0.0), scalar(1.0)), 1.0).status == CertStatus::Infeasible);
}

TEST_CASE("range clock certificates") {
  for (const Relaxation& relax : {Relaxation::handelman(1), Relaxation::grid(1)}) {
    const ImpulsiveSystem sys = autonomous(scalar(-1), scalar(0.5));
    const auto r = certify_range_clock(sys, 1.0, 2.0, relax);
    REQUIRE(r.certified());
    CHECK(clock_violation(sys, *r.certificate) <= 1e-8);
    CHECK(clock_certificate_slack(sys, *r.certificate) >= -1e-8);
    CHECK(r.certificate->relaxation.tag() == relax.tag());
  }
  for (int d : {1, 2, 4, 6})
    for (Backend b : {Backend::Handelman, Backend::Grid}) {
      const Relaxation relax = b == Backend::Grid ? Relaxation::grid(d) : Relaxation::handelman(d);
      CHECK(certify_range_clock(autonomous(scalar(-1), scalar(2.0)), 0.25, 0.5, relax).status != CertStatus::Certified);
    }
  CHECK_THROWS_AS(certify_range_clock(autonomous(scalar(-1), scalar(0.5)), 1.0, 2.0, Relaxation::handelman(0)),
                  std::invalid_argument);
}

TEST_CASE("minimum clock certificates") {
  for (const Relaxation& relax : {Relaxation::handelman(4), Relaxation::grid(4)}) {
    const ImpulsiveSystem sys = autonomous(scalar(-1), scalar(2.0));
    const auto r = certify_min_clock(sys, 1.0, relax);
    REQUIRE(r.certified());
    CHECK(clock_violation(sys, *r.certificate) <= 1e-8);
    CHECK(clock_certificate_slack(sys, *r.certificate) >= -1e-8);
    CHECK(certify_min_clock(sys, 0.5, relax).status != CertStatus::Certified);
    CHECK(certify_min_clock(autonomous(scalar(0.0), scalar(1.0)), 1.0, relax).status != CertStatus::Certified);
    CHECK(certify_min_clock(two_state_plant(), 0.7, relax).status != CertStatus::Certified);
  }
}

TEST_CASE("clock certificates on a two-state system re-verify independently") {
  Matrix A(2, 2), J(2, 2);
  A << -2, 0.5, 0.3, -1;
  J << 0.6, 0.2, 0.1, 0.9;
  const ImpulsiveSystem sys = autonomous(A, J);
  const auto r = certify_range_clock(sys, 0.3, 1.2, Relaxation::handelman(4));
  REQUIRE(r.certified());
  CHECK(clock_violation(sys, *r.certificate) <= 1e-8);
  const auto m = certify_min_clock(sys, 0.3, Relaxation::grid(4));
  REQUIRE(m.certified());
  CHECK(clock_violation(sys, *m.certificate) <= 1e-8);
}

TEST_CASE("clock feasibility implies spectral feasibility on random systems") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> dim(1, 3);
  int clock_ok = 0;
  for (int trial = 0; trial < 12; ++trial) {
    const int n = dim(rng);
    Matrix A(n, n), J(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        A(i, j) = i == j ? -3.0 * u(rng) : 0.5 * u(rng);
        J(i, j) = 1.2 * u(rng);
      }
    const ImpulsiveSystem sys = autonomous(A, J);
    const double tmin = 0.2 + u(rng), tmax = tmin + u(rng);
    const auto clock = certify_range_clock(sys, tmin, tmax, Relaxation::handelman(4));
    if (clock.certified()) {
      ++clock_ok;
      CHECK(certify_range_spectral(sys, tmin, tmax).certified());
    }
    const auto mclock = certify_min_clock(sys, tmin, Relaxation::handelman(4));
    if (mclock.certified()) CHECK(certify_min_spectral(sys, tmin).certified());
  }
  CHECK(clock_ok > 0);
}

TEST_CASE("iss_bound closed forms") {
  const ImpulsiveSystem sys = ImpulsiveSystem::make(scalar(-1), scalar(1), {scalar(0.5)}, Matrix::Zero(1, 0));
  const auto cert = certify_range_spectral(sys, 1.0, 1.0);
  REQUIRE(cert.certified());
  const IssBound b = iss_bound(sys, *cert.certificate, 1.0, 0.0, 1.0, 1.0);
  const double e1 = std::exp(-1.0);
  CHECK(b.epsilon == doctest::Approx(0.5 * e1).epsilon(1e-8));
  CHECK(std::abs(b.epsilon - 0.18394) <= 1e-4);
  CHECK(b.M(0, 0) == doctest::Approx(1.0 - e1).epsilon(1e-8));
  CHECK(b.mu == doctest::Approx(0.5 * (1.0 - e1)).epsilon(1e-8));
  CHECK(std::abs(b.ultimate - 0.38730) <= 1e-4);

  const IssBound zero = iss_bound(sys, *cert.certificate, 0.0, 0.0, 1.0, 1.0);
  CHECK(zero.mu == 0.0);
  CHECK(zero.ultimate == 0.0);

  const ImpulsiveSystem dead = ImpulsiveSystem::make(scalar(-1), scalar(1), {scalar(0.0)}, Matrix::Zero(1, 1));
  const auto dc = certify_range_spectral(dead, 1.0, 1.0);
  REQUIRE(dc.certified());
  // A dead jump contracts to zero, outside the open interval the bound is defined on.
  CHECK_THROWS_AS(iss_bound(dead, *dc.certificate, 5.0, 3.0, 1.0, 1.0), std::domain_error);
}

TEST_CASE("iss ultimate bound holds along simulations") {
  const ImpulsiveSystem sys = ImpulsiveSystem::make(scalar(-1), scalar(1), {scalar(0.5)}, Matrix::Zero(1, 0));
  const auto cert = certify_range_spectral(sys, 1.0, 1.0);
  REQUIRE(cert.certified());
  const IssBound b = iss_bound(sys, *cert.certificate, 1.0, 0.0, 1.0, 1.0);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int run = 0; run < 4; ++run) {
    const double w = 0.5 + 4.0 * u(rng), phase = 6.0 * u(rng);
    PlantRun pr;
    pr.x0 = Vector::Constant(1, 3.0 * u(rng));
    pr.wc = [=](double t) { return Vector::Constant(1, run == 0 ? 1.0 : std::sin(w * t + phase)); };
    const DwellSequence seq = gen_dwell(DwellSpec::range(1.0, 1.0), 30.5, 1);
    const HybridTrajectory tr = simulate_plant(sys, seq, pr, 1e-2);
    double limsup = -kInf;
    for (std::size_t i = 0; i < tr.size(); ++i)
      if (tr.side[i] == Side::Right && tr.t[i] > 15.0) limsup = std::max(limsup, cert.certificate->lambda.dot(tr.x[i]));
    CHECK(limsup <= b.ultimate + 1e-6);
  }
}

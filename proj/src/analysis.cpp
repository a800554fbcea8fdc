#include "ivobs/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace ivobs {

const char* to_string(CertStatus s) {
  switch (s) {
    case CertStatus::Certified: return "certified";
    case CertStatus::Infeasible: return "infeasible";
    case CertStatus::FineGridViolation: return "fine-grid-violation";
  }
  return "unknown";
}

TransitionMatrix transition_matrix(const FlowFn& A, int n, double T, int steps) {
  if (!(T >= 0.0)) throw std::invalid_argument("transition_matrix: negative horizon");
  if (steps < 1) throw std::invalid_argument("transition_matrix: steps must be >= 1");
  TransitionMatrix out;
  out.horizon = T;
  out.steps = steps;
  out.nodes.reserve(steps + 1);
  Matrix phi = Matrix::Identity(n, n);
  out.nodes.push_back(phi);
  if (T == 0.0) {
    out.nodes.assign(steps + 1, phi);
    out.value = phi;
    return out;
  }
  const double h = T / steps;
  for (int k = 0; k < steps; ++k) {
    const double s = k * h;
    const Matrix a0 = A(s);
    const Matrix a1 = A(s + 0.5 * h);
    const Matrix a2 = A(s + h);
    const Matrix k1 = a0 * phi;
    const Matrix k2 = a1 * (phi + 0.5 * h * k1);
    const Matrix k3 = a1 * (phi + 0.5 * h * k2);
    const Matrix k4 = a2 * (phi + h * k3);
    phi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    out.nodes.push_back(phi);
  }
  out.value = phi;
  return out;
}

TransitionMatrix transition_matrix(const Matrix& A, double T, int steps) {
  return transition_matrix([&A](double) { return A; }, static_cast<int>(A.rows()), T, steps);
}

TransitionMatrix transition_matrix(const PolyMatrix& A, double T, int steps) {
  return transition_matrix([&A](double tau) { return A.eval(tau); }, A.rows(), T, steps);
}

namespace {

void require_positive(const ImpulsiveSystem& sys, double horizon, const char* who) {
  sys.validate();
  const PositivityReport pr = check_positivity(sys, linspace(0.0, horizon, 101));
  if (!pr.positive)
    throw std::invalid_argument(std::string(who) + ": the system is not positive on the clock interval");
}

std::vector<double> theta_grid(double tmin, double tmax, int samples) {
  if (tmax <= tmin) return {tmin};
  return linspace(tmin, tmax, std::max(2, samples));
}

// Largest entry of lambda'(J Phi(theta) - I) over the given thetas and jumps.
double jump_row_max(const FlowFn& A, int n, const std::vector<Matrix>& jumps, const Vector& lambda,
                    const std::vector<double>& thetas, int steps) {
  double worst = -kInf;
  const Matrix I = Matrix::Identity(n, n);
  for (double theta : thetas) {
    const Matrix phi = transition_matrix(A, n, theta, steps).value;
    for (const auto& J : jumps) {
      const Vector row = (J * phi - I).transpose() * lambda;
      worst = std::max(worst, row.maxCoeff());
    }
  }
  return worst;
}

// LP over lambda: lambda >= margin, sum(lambda) = n and the given row blocks
// M_k with lambda' M_k <= -margin.
std::optional<Vector> solve_lambda(int n, const std::vector<Matrix>& blocks, const CertOptions& opts) {
  LinearProgram lp;
  for (int i = 0; i < n; ++i) lp.add_variable(opts.margin, opts.bound);
  LinearTerms sum;
  for (int i = 0; i < n; ++i) sum.emplace_back(i, 1.0);
  lp.add_constraint(sum, Relation::Equal, static_cast<double>(n));
  for (const auto& M : blocks) {
    for (Eigen::Index c = 0; c < M.cols(); ++c) {
      LinearTerms row;
      for (int i = 0; i < n; ++i)
        if (M(i, c) != 0.0) row.emplace_back(i, M(i, c));
      lp.add_constraint(row, Relation::LessEq, -opts.margin);
    }
  }
  const LpOutcome res = lp_feasibility(lp);
  if (!res.optimal()) return std::nullopt;
  return res.solution;
}

}  // namespace

SpectralResult certify_range_spectral(const FlowFn& A, const std::vector<Matrix>& jumps, double tmin,
                                      double tmax, const CertOptions& opts) {
  if (!(tmin > 0.0) || tmax < tmin) throw std::invalid_argument("certify_range_spectral: need 0 < tmin <= tmax");
  if (jumps.empty()) throw std::invalid_argument("certify_range_spectral: no jump maps");
  const int n = static_cast<int>(jumps.front().rows());
  const Matrix I = Matrix::Identity(n, n);

  const std::vector<double> coarse = theta_grid(tmin, tmax, opts.theta_samples);
  std::vector<Matrix> blocks;
  for (double theta : coarse) {
    const Matrix phi = transition_matrix(A, n, theta, opts.steps).value;
    for (const auto& J : jumps) blocks.push_back(J * phi - I);
  }

  SpectralResult out;
  const auto lambda = solve_lambda(n, blocks, opts);
  if (!lambda) return out;

  const std::vector<double> fine = theta_grid(tmin, tmax, (opts.theta_samples - 1) * opts.refine_factor + 1);
  SpectralCertificate cert;
  cert.lambda = *lambda;
  cert.theta_grid = coarse;
  cert.margin = std::max(jump_row_max(A, n, jumps, cert.lambda, coarse, opts.steps),
                         jump_row_max(A, n, jumps, cert.lambda, fine, opts.steps));
  out.status = cert.margin < 0.0 ? CertStatus::Certified : CertStatus::FineGridViolation;
  out.certificate = std::move(cert);
  return out;
}

SpectralResult certify_range_spectral(const ImpulsiveSystem& sys, double tmin, double tmax,
                                      const CertOptions& opts) {
  require_positive(sys, tmax, "certify_range_spectral");
  return certify_range_spectral([&sys](double tau) { return sys.A_at(tau); }, sys.J, tmin, tmax, opts);
}

SpectralResult certify_min_spectral(const FlowFn& A, const std::vector<Matrix>& jumps, double tbar,
                                    const CertOptions& opts) {
  if (!(tbar > 0.0)) throw std::invalid_argument("certify_min_spectral: need tbar > 0");
  if (jumps.empty()) throw std::invalid_argument("certify_min_spectral: no jump maps");
  const int n = static_cast<int>(jumps.front().rows());
  const Matrix I = Matrix::Identity(n, n);
  const Matrix a_end = A(tbar);
  const Matrix phi = transition_matrix(A, n, tbar, opts.steps).value;

  std::vector<Matrix> blocks{a_end};
  for (const auto& J : jumps) blocks.push_back(J * phi - I);

  SpectralResult out;
  const auto lambda = solve_lambda(n, blocks, opts);
  if (!lambda) return out;

  SpectralCertificate cert;
  cert.lambda = *lambda;
  cert.theta_grid = {tbar};
  double worst = -kInf;
  for (const auto& M : blocks) worst = std::max(worst, (M.transpose() * cert.lambda).maxCoeff());
  cert.margin = worst;
  out.status = worst < 0.0 ? CertStatus::Certified : CertStatus::FineGridViolation;
  out.certificate = std::move(cert);
  return out;
}

SpectralResult certify_min_spectral(const ImpulsiveSystem& sys, double tbar, const CertOptions& opts) {
  require_positive(sys, tbar, "certify_min_spectral");
  return certify_min_spectral([&sys](double tau) { return sys.A_at(tau); }, sys.J, tbar, opts);
}

namespace {

// (zeta' A)_i as polynomial expressions.
std::vector<PolyExpr> zeta_times_A(const std::vector<PolyExpr>& zeta, const PolyMatrix& A) {
  const int n = A.rows();
  std::vector<PolyExpr> out(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (!A(j, i).is_zero()) out[i] += zeta[j] * A(j, i);
  return out;
}

LinExpr row_entry(const std::vector<LinExpr>& z, const Matrix& M, int col) {
  LinExpr e;
  for (int j = 0; j < static_cast<int>(z.size()); ++j)
    if (M(j, col) != 0.0) e += z[j] * M(j, col);
  return e;
}

ClockResult finish_clock(CertificateProgram& prog, const std::vector<PolyExpr>& zeta, const Relaxation& relax,
                         const DwellSpec& spec, const CertOptions& opts) {
  ClockResult out;
  const RelaxOutcome res = prog.solve();
  out.lp_variables = res.lp_variables;
  out.lp_constraints = res.lp_constraints;
  if (res.status == RelaxStatus::Infeasible) return out;
  ClockCertificate cert;
  cert.zeta = PolyMatrix(static_cast<int>(zeta.size()), 1);
  for (std::size_t i = 0; i < zeta.size(); ++i) cert.zeta(static_cast<int>(i), 0) = zeta[i].eval(res.solution);
  cert.eps = opts.eps;
  cert.relaxation = relax;
  cert.spec = spec;
  cert.worst_slack = res.worst_slack;
  out.status = res.status == RelaxStatus::Feasible ? CertStatus::Certified : CertStatus::FineGridViolation;
  out.certificate = std::move(cert);
  return out;
}

}  // namespace

ClockResult certify_range_clock(const ImpulsiveSystem& sys, double tmin, double tmax, const Relaxation& relax,
                                const CertOptions& opts) {
  const DwellSpec spec = DwellSpec::range(tmin, tmax);
  if (relax.degree < 1) throw std::invalid_argument("certify_range_clock: degree must be >= 1");
  if (relax.backend == Backend::Grid && relax.grid_points < 2)
    throw std::invalid_argument("certify_range_clock: grid needs at least 2 points");
  require_positive(sys, tmax, "certify_range_clock");

  const int n = sys.n();
  CertificateProgram prog(relax);
  std::vector<PolyExpr> zeta;
  for (int i = 0; i < n; ++i) zeta.push_back(prog.add_bernstein_poly(relax.degree, opts.bound, 0.0, tmax));

  // -(zeta' + zeta'A)_i >= 0 on [0, tmax]
  const std::vector<PolyExpr> zA = zeta_times_A(zeta, sys.A);
  for (int i = 0; i < n; ++i)
    prog.require_nonneg((zeta[i].derivative() + zA[i]) * -1.0, 0.0, tmax, "flow[" + std::to_string(i) + "]");

  // zeta(theta)_i - (zeta(0)'J)_i - eps >= 0 on [tmin, tmax]
  std::vector<LinExpr> z0;
  for (const auto& z : zeta) z0.push_back(z.at(0.0));
  for (std::size_t k = 0; k < sys.J.size(); ++k) {
    for (int i = 0; i < n; ++i) {
      PolyExpr p = zeta[i];
      p -= PolyExpr({row_entry(z0, sys.J[k], i) + LinExpr::scalar(opts.eps)});
      prog.require_nonneg(p, tmin, tmax, "jump" + std::to_string(k) + "[" + std::to_string(i) + "]");
    }
  }
  for (int i = 0; i < n; ++i) prog.require(z0[i], Relation::GreaterEq, opts.margin, "zeta(0)");
  return finish_clock(prog, zeta, relax, spec, opts);
}

ClockResult certify_min_clock(const ImpulsiveSystem& sys, double tbar, const Relaxation& relax,
                              const CertOptions& opts) {
  const DwellSpec spec = DwellSpec::minimum(tbar);
  if (relax.degree < 1) throw std::invalid_argument("certify_min_clock: degree must be >= 1");
  if (relax.backend == Backend::Grid && relax.grid_points < 2)
    throw std::invalid_argument("certify_min_clock: grid needs at least 2 points");
  require_positive(sys, tbar, "certify_min_clock");

  const int n = sys.n();
  CertificateProgram prog(relax);
  std::vector<PolyExpr> zeta;
  for (int i = 0; i < n; ++i) zeta.push_back(prog.add_bernstein_poly(relax.degree, opts.bound, 0.0, tbar));

  // zeta(tbar)'A(tbar) <= -eps
  std::vector<LinExpr> zT, z0;
  for (const auto& z : zeta) {
    zT.push_back(z.at(tbar));
    z0.push_back(z.at(0.0));
  }
  const Matrix a_end = sys.A_at(tbar);
  for (int i = 0; i < n; ++i) prog.require(row_entry(zT, a_end, i), Relation::LessEq, -opts.eps, "A(tbar)");

  // (zeta' - zeta'A)_i >= 0 on [0, tbar]
  const std::vector<PolyExpr> zA = zeta_times_A(zeta, sys.A);
  for (int i = 0; i < n; ++i)
    prog.require_nonneg(zeta[i].derivative() - zA[i], 0.0, tbar, "flow[" + std::to_string(i) + "]");

  // zeta(0)_i - (zeta(tbar)'J)_i - eps >= 0
  for (std::size_t k = 0; k < sys.J.size(); ++k)
    for (int i = 0; i < n; ++i)
      prog.require(z0[i] - row_entry(zT, sys.J[k], i), Relation::GreaterEq, opts.eps, "jump");
  for (int i = 0; i < n; ++i) prog.require(zT[i], Relation::GreaterEq, opts.margin, "zeta(tbar)");
  return finish_clock(prog, zeta, relax, spec, opts);
}

double clock_certificate_slack(const ImpulsiveSystem& sys, const ClockCertificate& cert, int points) {
  const int n = sys.n();
  const PolyMatrix dzeta = cert.zeta.derivative();
  auto zeta_at = [&](double tau) -> Vector { return cert.zeta.eval(tau).col(0); };
  auto dzeta_at = [&](double tau) -> Vector { return dzeta.eval(tau).col(0); };
  double worst = kInf;

  if (cert.spec.is_range()) {
    const double tmin = cert.spec.tmin();
    const double tmax = cert.spec.tmax();
    for (double tau : linspace(0.0, tmax, points)) {
      const Vector flow = dzeta_at(tau) + sys.A_at(tau).transpose() * zeta_at(tau);
      worst = std::min(worst, (-flow).minCoeff());
    }
    const Vector z0 = zeta_at(0.0);
    worst = std::min(worst, z0.minCoeff());
    const auto thetas = tmax > tmin ? linspace(tmin, tmax, points) : std::vector<double>{tmin};
    for (double theta : thetas) {
      const Vector zt = zeta_at(theta);
      for (const auto& J : sys.J) {
        const Vector jump = J.transpose() * z0 - zt + Vector::Constant(n, cert.eps);
        worst = std::min(worst, (-jump).minCoeff());
      }
    }
  } else {
    const double tbar = cert.spec.tbar();
    const Vector zT = zeta_at(tbar);
    const Vector z0 = zeta_at(0.0);
    worst = std::min(worst, zT.minCoeff());
    worst = std::min(worst, (-(sys.A_at(tbar).transpose() * zT)).minCoeff());
    for (double tau : linspace(0.0, tbar, points)) {
      const Vector flow = -dzeta_at(tau) + sys.A_at(tau).transpose() * zeta_at(tau);
      worst = std::min(worst, (-flow).minCoeff());
    }
    for (const auto& J : sys.J) {
      const Vector jump = J.transpose() * zT - z0 + Vector::Constant(n, cert.eps);
      worst = std::min(worst, (-jump).minCoeff());
    }
  }
  return worst;
}

namespace {

// int_0^theta Phi(theta) Phi(s)^{-1} Ec(s) ds by composite Simpson (trapezoid
// when the step count is odd) on the RK4 nodes.
Matrix forced_response_integral(const ImpulsiveSystem& sys, double theta, int steps) {
  const FlowFn A = [&sys](double tau) { return sys.A_at(tau); };
  const TransitionMatrix tm = transition_matrix(A, sys.n(), theta, steps);
  const double h = tm.step();
  Matrix acc = Matrix::Zero(sys.n(), sys.pc());
  if (sys.pc() == 0 || theta == 0.0) return acc;
  const bool simpson = steps % 2 == 0;
  for (int k = 0; k <= steps; ++k) {
    const Matrix y = tm.nodes[k].partialPivLu().solve(sys.Ec_at(k * h));
    double w;
    if (simpson)
      w = (k == 0 || k == steps) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    else
      w = (k == 0 || k == steps) ? 0.5 : 1.0;
    acc += w * y;
  }
  acc *= simpson ? h / 3.0 : h;
  return tm.value * acc;
}

}  // namespace

IssBound iss_bound(const ImpulsiveSystem& sys, const SpectralCertificate& cert, double wc_sup, double wd_sup,
                   double tmin, double tmax, const CertOptions& opts) {
  const int n = sys.n();
  if (cert.lambda.size() != n) throw std::invalid_argument("iss_bound: certificate dimension mismatch");
  if (!(cert.lambda.minCoeff() > 0.0)) throw std::invalid_argument("iss_bound: lambda must be positive");
  const FlowFn A = [&sys](double tau) { return sys.A_at(tau); };
  const Matrix I = Matrix::Identity(n, n);
  const Vector& lambda = cert.lambda;

  // Fine step for the quadrature: at least opts.steps, about 1e-3 per step.
  const std::vector<double> thetas = theta_grid(tmin, tmax, opts.theta_samples);
  double ratio = -kInf;
  Matrix M = Matrix::Constant(n, sys.pc(), -kInf);
  for (double theta : thetas) {
    const int steps = std::max(opts.steps, 2 * static_cast<int>(std::ceil(theta / 2e-3)));
    const Matrix phi = transition_matrix(A, n, theta, steps).value;
    for (const auto& J : sys.J) {
      const Vector row = (J * phi - I).transpose() * lambda;
      ratio = std::max(ratio, row.cwiseQuotient(lambda).maxCoeff());
    }
    if (sys.pc() > 0) M = M.cwiseMax(forced_response_integral(sys, theta, steps));
  }
  if (sys.pc() == 0) M = Matrix::Zero(n, 0);

  IssBound out;
  out.epsilon = 1.0 + ratio;
  if (!(out.epsilon > 0.0 && out.epsilon < 1.0))
    throw std::domain_error("iss_bound: contraction factor " + std::to_string(out.epsilon) + " not in (0,1)");
  out.M = M;
  double jump_term = 0.0;
  if (sys.pc() > 0) {
    for (const auto& J : sys.J)
      jump_term = std::max(jump_term, lambda.dot(J * M * Vector::Ones(sys.pc())) * wc_sup);
  }
  const double disc_term = sys.pd() > 0 ? lambda.dot(sys.Ed * Vector::Ones(sys.pd())) * wd_sup : 0.0;
  out.mu = disc_term + jump_term;
  out.ultimate = out.mu / (1.0 - out.epsilon);
  return out;
}

}  // namespace ivobs

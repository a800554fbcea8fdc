#include "ivobs/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ivobs {

double ObserverGains::clamp_clock(double tau) const {
  return std::clamp(tau, 0.0, spec.horizon());
}

Matrix ObserverGains::Lc(double tau) const { return recover_gain_at(*this, tau); }

Matrix recover_gain_at(const ObserverGains& gains, double tau) {
  const double t = gains.clamp_clock(tau);
  const int n = gains.X.rows();
  Matrix L(n, gains.Uc.cols());
  for (int i = 0; i < n; ++i) {
    const double x = gains.X(i, i)(t);
    if (!(x >= 0.5 * gains.delta_x)) {
      std::ostringstream os;
      os << "X(" << i << "," << i << ")(" << t << ") = " << x << " is below delta_x/2";
      throw GainRecoveryFailure(os.str());
    }
    for (int r = 0; r < gains.Uc.cols(); ++r) L(i, r) = gains.Uc(i, r)(t) / x;
  }
  return L;
}

FlowFn error_flow(const ImpulsiveSystem& sys, const ObserverGains& gains) {
  return [&sys, &gains](double tau) -> Matrix {
    return sys.A_at(tau) - recover_gain_at(gains, tau) * sys.Cc;
  };
}

std::vector<Matrix> error_jumps(const ImpulsiveSystem& sys, const std::vector<Matrix>& Ld) {
  std::vector<Matrix> out;
  for (std::size_t k = 0; k < sys.J.size(); ++k) out.push_back(sys.J[k] - Ld.at(k) * sys.Cd);
  return out;
}

JumpPositivity jump_positivity(const ImpulsiveSystem& sys, const std::vector<Matrix>& Ld) {
  if (Ld.size() != sys.J.size()) throw std::invalid_argument("jump_positivity: one L_d per jump map required");
  JumpPositivity out{kInf, kInf};
  for (std::size_t k = 0; k < sys.J.size(); ++k) {
    out.jump = std::min(out.jump, min_entry(sys.J[k] - Ld[k] * sys.Cd));
    out.ed = std::min(out.ed, min_entry(sys.Ed - Ld[k] * sys.Fd));
  }
  return out;
}

namespace {

constexpr double kMarginTol = 1e-8;

void check_synth_preconditions(const ImpulsiveSystem& sys, const SynthOptions& opts) {
  sys.validate();
  if (!sys.has_outputs()) throw std::invalid_argument("synthesis requires measured outputs (qc or qd >= 1)");
  if (!sys.A.is_constant() || !sys.Ec.is_constant())
    throw std::invalid_argument("synthesis requires time-invariant A and Ec");
  if (opts.degree < 1 || opts.max_degree < opts.degree || opts.degree_step < 1)
    throw std::invalid_argument("synthesis: invalid degree policy");
}

struct SynthVariables {
  std::vector<PolyExpr> chi;                // diagonal of X
  std::vector<std::vector<PolyExpr>> uc;    // n x qc
  std::vector<std::vector<std::vector<LinExpr>>> ud;  // per jump, n x qd
  LinExpr alpha;
};

// Entry (i, j) of X(tau) A - U_c(tau) C_c.
PolyExpr flow_entry(const SynthVariables& v, const Matrix& A, const Matrix& Cc, int i, int j) {
  PolyExpr e = v.chi[i] * Poly::constant(A(i, j));
  for (std::size_t r = 0; r < v.uc[i].size(); ++r)
    if (Cc(r, j) != 0.0) e -= v.uc[i][r] * Poly::constant(Cc(r, j));
  return e;
}

// Entry (i, j) of X(tau) Ec - U_c(tau) Fc.
PolyExpr input_entry(const SynthVariables& v, const Matrix& Ec, const Matrix& Fc, int i, int j) {
  PolyExpr e = v.chi[i] * Poly::constant(Ec(i, j));
  for (std::size_t r = 0; r < v.uc[i].size(); ++r)
    if (Fc(r, j) != 0.0) e -= v.uc[i][r] * Poly::constant(Fc(r, j));
  return e;
}

// Entry (i, j) of X(anchor) M - U_d N for constant M, N.
LinExpr jump_entry(const std::vector<LinExpr>& x_anchor, const std::vector<std::vector<LinExpr>>& ud,
                   const Matrix& M, const Matrix& N, int i, int j) {
  LinExpr e = x_anchor[i] * M(i, j);
  for (std::size_t r = 0; r < ud[i].size(); ++r)
    if (N(r, j) != 0.0) e -= ud[i][r] * N(r, j);
  return e;
}

DesignReport synth_once(const ImpulsiveSystem& sys, const DwellSpec& spec, int degree, const SynthOptions& opts) {
  const int n = sys.n();
  const int qc = sys.qc();
  const int qd = sys.qd();
  const Matrix A = sys.A_at(0.0);
  const Matrix Ec = sys.Ec_at(0.0);
  const bool range = spec.is_range();
  const double horizon = spec.horizon();
  const double anchor = range ? 0.0 : spec.tbar();

  Relaxation relax = opts.backend == Backend::Grid ? Relaxation::grid(degree, opts.grid_points)
                                                   : Relaxation::handelman(degree, opts.elevation);
  relax.grid_margin = opts.margin;
  CertificateProgram prog(relax);

  SynthVariables v;
  for (int i = 0; i < n; ++i) v.chi.push_back(prog.add_bernstein_poly(degree, opts.bound, 0.0, horizon));
  v.uc.resize(n);
  for (int i = 0; i < n; ++i)
    for (int r = 0; r < qc; ++r) v.uc[i].push_back(prog.add_bernstein_poly(degree, opts.bound, 0.0, horizon));
  v.ud.resize(sys.J.size());
  for (auto& ud : v.ud) {
    ud.resize(n);
    for (int i = 0; i < n; ++i)
      for (int r = 0; r < qd; ++r) ud[i].push_back(LinExpr::var(prog.add_variable(-opts.bound, opts.bound)));
  }
  v.alpha = LinExpr::var(prog.add_variable(0.0, opts.alpha_max));

  std::vector<LinExpr> x_anchor, x_zero;
  for (const auto& c : v.chi) {
    x_anchor.push_back(c.at(anchor));
    x_zero.push_back(c.at(0.0));
  }

  // X(tau) >= delta_x and the normalization 1'X(anchor)1 = n.
  LinExpr trace;
  for (int i = 0; i < n; ++i) {
    prog.require_nonneg(v.chi[i] - PolyExpr::from_poly(Poly::constant(opts.delta_x)), 0.0, horizon, "X>=delta");
    trace += x_anchor[i];
  }
  prog.require(trace, Relation::Equal, static_cast<double>(n), "normalization");

  // X A - U_c C_c + alpha I >= 0 and X Ec - U_c Fc >= 0 on the clock interval.
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      PolyExpr e = flow_entry(v, A, sys.Cc, i, j);
      if (i == j) e += PolyExpr({v.alpha});
      prog.require_nonneg(e, 0.0, horizon, "metzler");
    }
    for (int j = 0; j < sys.pc(); ++j) prog.require_nonneg(input_entry(v, Ec, sys.Fc, i, j), 0.0, horizon, "Ec");
  }

  // X(anchor) J - U_d C_d >= 0 and X(anchor) Ed - U_d Fd >= 0.
  for (std::size_t k = 0; k < sys.J.size(); ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j)
        prog.require(jump_entry(x_anchor, v.ud[k], sys.J[k], sys.Cd, i, j), Relation::GreaterEq, 0.0, "J");
      for (int j = 0; j < sys.pd(); ++j)
        prog.require(jump_entry(x_anchor, v.ud[k], sys.Ed, sys.Fd, i, j), Relation::GreaterEq, 0.0, "Ed");
    }
  }

  // Column sums of the stability conditions.
  for (int j = 0; j < n; ++j) {
    PolyExpr col;
    for (int i = 0; i < n; ++i) col += flow_entry(v, A, sys.Cc, i, j);
    if (range) {
      // -(chi_j' + col_j) >= 0 on [0, tmax]
      prog.require_nonneg((v.chi[j].derivative() + col) * -1.0, 0.0, horizon, "flow-decrease");
    } else {
      // chi_j' - col_j >= 0 on [0, tbar]; col_j(tbar) + eps <= 0
      prog.require_nonneg(v.chi[j].derivative() - col, 0.0, horizon, "flow-decrease");
      prog.require(col.at(anchor), Relation::LessEq, -opts.eps, "A(tbar)");
    }
    for (std::size_t k = 0; k < sys.J.size(); ++k) {
      LinExpr jsum;
      for (int i = 0; i < n; ++i) jsum += jump_entry(x_anchor, v.ud[k], sys.J[k], sys.Cd, i, j);
      if (range) {
        // chi_j(theta) - jsum - eps >= 0 on [tmin, tmax]
        PolyExpr p = v.chi[j];
        p -= PolyExpr({jsum + LinExpr::scalar(opts.eps)});
        prog.require_nonneg(p, spec.tmin(), spec.tmax(), "jump-decrease");
      } else {
        prog.require(jsum - x_zero[j], Relation::LessEq, -opts.eps, "jump-decrease");
      }
    }
  }

  DesignReport report;
  report.backend = relax.tag();
  report.degree = degree;
  const RelaxOutcome res = prog.solve();
  report.lp_variables = res.lp_variables;
  report.lp_constraints = res.lp_constraints;
  if (res.status == RelaxStatus::Infeasible) {
    report.message = "synthesis LP infeasible at degree " + std::to_string(degree);
    return report;
  }
  if (res.status == RelaxStatus::FineGridViolation) {
    report.message = "grid solution violates " + res.worst_label + " on the fine grid";
    return report;
  }

  const Vector& sol = res.solution;
  ObserverGains g;
  std::vector<Poly> diag;
  for (const auto& c : v.chi) diag.push_back(c.eval(sol));
  g.X = PolyMatrix::diagonal(diag);
  g.Uc = PolyMatrix(n, qc);
  for (int i = 0; i < n; ++i)
    for (int r = 0; r < qc; ++r) g.Uc(i, r) = v.uc[i][r].eval(sol);
  for (const auto& ud : v.ud) {
    Matrix U(n, qd);
    for (int i = 0; i < n; ++i)
      for (int r = 0; r < qd; ++r) U(i, r) = ud[i][r].eval(sol);
    g.Ud.push_back(U);
  }
  g.spec = spec;
  g.alpha = v.alpha.eval(sol);
  g.eps = opts.eps;
  g.delta_x = opts.delta_x;
  for (const auto& U : g.Ud) {
    Matrix L(n, qd);
    for (int i = 0; i < n; ++i) {
      const double x = g.X(i, i)(anchor);
      if (!(x >= 0.5 * opts.delta_x)) {
        report.feasible = true;
        report.message = "gain recovery failed: X(anchor) is nearly singular";
        report.violations.push_back("gain-recovery");
        return report;
      }
      L.row(i) = U.row(i) / x;
    }
    g.Ld.push_back(L);
  }

  DesignReport verified = verify_design(sys, g, spec, opts.fine_grid);
  verified.feasible = true;
  verified.backend = report.backend;
  verified.degree = degree;
  verified.lp_variables = report.lp_variables;
  verified.lp_constraints = report.lp_constraints;
  return verified;
}

}  // namespace

DesignReport synthesize(const ImpulsiveSystem& sys, const DwellSpec& spec, const SynthOptions& opts) {
  check_synth_preconditions(sys, opts);
  DesignReport last;
  for (int d = opts.degree; d <= opts.max_degree; d += opts.degree_step) {
    last = synth_once(sys, spec, d, opts);
    if (last.ok()) return last;
  }
  if (last.message.empty()) last.message = "no verified design up to degree " + std::to_string(opts.max_degree);
  return last;
}

DesignReport synth_range(const ImpulsiveSystem& sys, double tmin, double tmax, const SynthOptions& opts) {
  return synthesize(sys, DwellSpec::range(tmin, tmax), opts);
}

DesignReport synth_min(const ImpulsiveSystem& sys, double tbar, const SynthOptions& opts) {
  return synthesize(sys, DwellSpec::minimum(tbar), opts);
}

DesignReport verify_design(const ImpulsiveSystem& sys, const ObserverGains& gains, const DwellSpec& spec,
                           int fine_grid) {
  DesignReport rep;
  rep.feasible = true;
  rep.gains = gains;
  DesignMargins& m = rep.margins;
  m.metzler = m.ec = m.x_min = kInf;

  const double horizon = spec.horizon();
  const auto grid = linspace(0.0, horizon, std::max(2, fine_grid));
  for (double tau : grid)
    for (int i = 0; i < gains.X.rows(); ++i) m.x_min = std::min(m.x_min, gains.X(i, i)(tau));
  if (!(m.x_min >= 0.5 * gains.delta_x)) {
    rep.violations.push_back("gain-recovery");
    rep.message = "X diagonal dips below delta_x/2";
    return rep;
  }

  for (double tau : grid) {
    const Matrix L = recover_gain_at(gains, tau);
    m.metzler = std::min(m.metzler, metzler_margin(sys.A_at(tau) - L * sys.Cc));
    m.ec = std::min(m.ec, min_entry(sys.Ec_at(tau) - L * sys.Fc));
  }
  const JumpPositivity jp = jump_positivity(sys, gains.Ld);
  m.jump = jp.jump;
  m.ed = jp.ed;

  if (m.metzler < -kMarginTol) rep.violations.push_back("metzler");
  if (m.ec < -kMarginTol) rep.violations.push_back("Ec-LcFc");
  if (m.jump < -kMarginTol) rep.violations.push_back("J-LdCd");
  if (m.ed < -kMarginTol) rep.violations.push_back("Ed-LdFd");

  const FlowFn flow = error_flow(sys, gains);
  const std::vector<Matrix> jumps = error_jumps(sys, gains.Ld);
  const SpectralResult sr = spec.is_range() ? certify_range_spectral(flow, jumps, spec.tmin(), spec.tmax())
                                            : certify_min_spectral(flow, jumps, spec.tbar());
  m.spectral = sr.certificate ? sr.certificate->margin : kInf;
  if (!sr.certified()) rep.violations.push_back("spectral-stability");

  rep.certificate_slack = design_certificate_slack(sys, gains, std::max(2, fine_grid));
  rep.verified = rep.violations.empty();
  if (!rep.verified) {
    rep.message = "verification failed:";
    for (const auto& v : rep.violations) rep.message += " " + v;
  }
  return rep;
}

double design_certificate_slack(const ImpulsiveSystem& sys, const ObserverGains& g, int points) {
  const int n = sys.n();
  const DwellSpec& spec = g.spec;
  const double horizon = spec.horizon();
  const double anchor = g.anchor();
  const Matrix A = sys.A_at(0.0);
  const Matrix Ec = sys.Ec_at(0.0);
  const PolyMatrix dX = g.X.derivative();
  const Matrix I = Matrix::Identity(n, n);
  const Vector ones = Vector::Ones(n);
  double worst = kInf;

  const auto grid = linspace(0.0, horizon, points);
  for (double tau : grid) {
    const Matrix X = g.X.eval(tau);
    const Matrix Uc = g.Uc.eval(tau);
    const Matrix flow = X * A - Uc * sys.Cc;
    worst = std::min(worst, (flow + g.alpha * I).minCoeff());
    if (sys.pc() > 0) worst = std::min(worst, (X * Ec - Uc * sys.Fc).minCoeff());
    worst = std::min(worst, X.diagonal().minCoeff() - g.delta_x);
    const Matrix dec = spec.is_range() ? Matrix(dX.eval(tau) + flow) : Matrix(-dX.eval(tau) + flow);
    worst = std::min(worst, (-(ones.transpose() * dec)).minCoeff());
  }

  const Matrix Xa = g.X.eval(anchor);
  for (std::size_t k = 0; k < sys.J.size(); ++k) {
    const Matrix jmp = Xa * sys.J[k] - g.Ud[k] * sys.Cd;
    worst = std::min(worst, jmp.minCoeff());
    if (sys.pd() > 0) worst = std::min(worst, (Xa * sys.Ed - g.Ud[k] * sys.Fd).minCoeff());
    if (spec.is_range()) {
      const auto thetas = spec.tmax() > spec.tmin() ? linspace(spec.tmin(), spec.tmax(), points)
                                                    : std::vector<double>{spec.tmin()};
      for (double theta : thetas) {
        const Matrix cond = jmp - g.X.eval(theta) + g.eps * I;
        worst = std::min(worst, (-(ones.transpose() * cond)).minCoeff());
      }
    } else {
      const Matrix cond = jmp - g.X.eval(0.0) + g.eps * I;
      worst = std::min(worst, (-(ones.transpose() * cond)).minCoeff());
    }
  }
  if (spec.is_minimum()) {
    const Matrix cond = Xa * A - g.Uc.eval(anchor) * sys.Cc + g.eps * I;
    worst = std::min(worst, (-(ones.transpose() * cond)).minCoeff());
  }
  return worst;
}

double closed_loop_clock_slack(const ImpulsiveSystem& sys, const ObserverGains& g, int points) {
  const int n = sys.n();
  const DwellSpec& spec = g.spec;
  const double horizon = spec.horizon();
  const PolyMatrix dX = g.X.derivative();
  const FlowFn flow = error_flow(sys, g);
  const std::vector<Matrix> jumps = error_jumps(sys, g.Ld);
  auto zeta = [&](double tau) -> Vector { return g.X.eval(tau).diagonal(); };
  auto dzeta = [&](double tau) -> Vector { return dX.eval(tau).diagonal(); };
  const Vector eps1 = Vector::Constant(n, g.eps);
  double worst = kInf;

  for (double tau : linspace(0.0, horizon, points)) {
    const Vector za = flow(tau).transpose() * zeta(tau);
    const Vector cond = spec.is_range() ? Vector(dzeta(tau) + za) : Vector(-dzeta(tau) + za);
    worst = std::min(worst, (-cond).minCoeff());
  }
  if (spec.is_range()) {
    const Vector z0 = zeta(0.0);
    const auto thetas = spec.tmax() > spec.tmin() ? linspace(spec.tmin(), spec.tmax(), points)
                                                  : std::vector<double>{spec.tmin()};
    for (const auto& J : jumps)
      for (double theta : thetas) worst = std::min(worst, (-(J.transpose() * z0 - zeta(theta) + eps1)).minCoeff());
  } else {
    const Vector zT = zeta(spec.tbar());
    worst = std::min(worst, (-(flow(spec.tbar()).transpose() * zT + eps1)).minCoeff());
    for (const auto& J : jumps) worst = std::min(worst, (-(J.transpose() * zT - zeta(0.0) + eps1)).minCoeff());
  }
  return worst;
}

}  // namespace ivobs

#include "ivobs/systems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace ivobs {

DwellSpec DwellSpec::range(double tmin, double tmax) {
  if (!(tmin > 0.0) || !(tmax >= tmin) || !std::isfinite(tmax)) {
    std::ostringstream os;
    os << "range dwell-time requires 0 < tmin <= tmax < inf, got [" << tmin << ", " << tmax << "]";
    throw std::invalid_argument(os.str());
  }
  return DwellSpec(Kind::Range, tmin, tmax);
}

DwellSpec DwellSpec::minimum(double tbar) {
  if (!(tbar > 0.0) || !std::isfinite(tbar)) {
    std::ostringstream os;
    os << "minimum dwell-time requires tbar > 0, got " << tbar;
    throw std::invalid_argument(os.str());
  }
  return DwellSpec(Kind::Minimum, tbar, tbar);
}

bool DwellSpec::admits(double gap, double tol) const {
  if (kind_ == Kind::Range) return gap >= tmin_ - tol && gap <= tmax_ + tol;
  return gap >= tmin_ - tol;
}

std::string DwellSpec::describe() const {
  std::ostringstream os;
  if (kind_ == Kind::Range)
    os << "range:" << tmin_ << ":" << tmax_;
  else
    os << "min:" << tmin_;
  return os.str();
}

namespace {

void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument("inconsistent system: " + what);
}

bool same(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && (a.size() == 0 || a == b);
}

}  // namespace

void ImpulsiveSystem::validate() const {
  const int nx = n();
  require(nx >= 1, "n must be at least 1");
  require(A.cols() == nx, "A must be square");
  require(Ec.rows() == nx, "Ec must have n rows");
  require(!J.empty(), "at least one jump map J is required");
  for (std::size_t k = 0; k < J.size(); ++k)
    require(J[k].rows() == nx && J[k].cols() == nx, "J[" + std::to_string(k) + "] must be n x n");
  require(Ed.rows() == nx, "Ed must have n rows");
  require(Cc.cols() == nx, "Cc must have n columns");
  require(Fc.rows() == Cc.rows() && Fc.cols() == pc(), "Fc must be qc x pc");
  require(Cd.cols() == nx, "Cd must have n columns");
  require(Fd.rows() == Cd.rows() && Fd.cols() == pd(), "Fd must be qd x pd");
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j)
      for (double c : A(i, j).coeffs()) require(std::isfinite(c), "A has non-finite coefficients");
  for (const auto& m : {Ed, Cc, Fc, Cd, Fd}) require(m.allFinite(), "non-finite matrix entry");
  for (const auto& m : J) require(m.allFinite(), "non-finite jump map entry");
}

ImpulsiveSystem ImpulsiveSystem::make(const Matrix& A, const Matrix& Ec, std::vector<Matrix> jumps,
                                      const Matrix& Ed, const Matrix& Cc, const Matrix& Fc,
                                      const Matrix& Cd, const Matrix& Fd) {
  const auto n = A.rows();
  ImpulsiveSystem sys;
  sys.A = PolyMatrix::constant(A);
  sys.Ec = PolyMatrix::constant(Ec.size() == 0 ? Matrix(n, Ec.cols()) : Ec);
  sys.J = std::move(jumps);
  sys.Ed = Ed.rows() == 0 ? Matrix(n, Ed.cols()) : Ed;
  sys.Cc = Cc.cols() == 0 ? Matrix(Cc.rows(), n) : Cc;
  sys.Fc = Fc.size() == 0 ? Matrix::Zero(sys.Cc.rows(), Ec.cols()) : Fc;
  sys.Cd = Cd.cols() == 0 ? Matrix(Cd.rows(), n) : Cd;
  sys.Fd = Fd.size() == 0 ? Matrix::Zero(sys.Cd.rows(), sys.Ed.cols()) : Fd;
  sys.validate();
  return sys;
}

bool operator==(const ImpulsiveSystem& a, const ImpulsiveSystem& b) {
  if (!(a.A == b.A) || !(a.Ec == b.Ec) || a.J.size() != b.J.size()) return false;
  for (std::size_t k = 0; k < a.J.size(); ++k)
    if (!same(a.J[k], b.J[k])) return false;
  return same(a.Ed, b.Ed) && same(a.Cc, b.Cc) && same(a.Fc, b.Fc) && same(a.Cd, b.Cd) &&
         same(a.Fd, b.Fd) && a.dwell == b.dwell;
}

DisturbanceBounds DisturbanceBounds::symmetric(int pc, double wc_amp, int pd, double wd_amp) {
  DisturbanceBounds b;
  b.wc_lo = [pc, wc_amp](double) { return Vector::Constant(pc, -wc_amp); };
  b.wc_hi = [pc, wc_amp](double) { return Vector::Constant(pc, wc_amp); };
  b.wd_lo = [pd, wd_amp](int) { return Vector::Constant(pd, -wd_amp); };
  b.wd_hi = [pd, wd_amp](int) { return Vector::Constant(pd, wd_amp); };
  return b;
}

double metzler_margin(const Matrix& m) {
  double out = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      if (i != j) out = std::min(out, m(i, j));
  return out;
}

double min_entry(const Matrix& m) {
  return m.size() == 0 ? std::numeric_limits<double>::infinity() : m.minCoeff();
}

PositivityReport check_positivity(const ImpulsiveSystem& sys, const std::vector<double>& tau_grid,
                                  double tol) {
  if (tau_grid.empty()) throw std::invalid_argument("check_positivity: empty tau grid");
  PositivityReport r;
  r.metzler_margin = std::numeric_limits<double>::infinity();
  r.ec_min = std::numeric_limits<double>::infinity();
  for (double tau : tau_grid) {
    r.metzler_margin = std::min(r.metzler_margin, metzler_margin(sys.A_at(tau)));
    r.ec_min = std::min(r.ec_min, min_entry(sys.Ec_at(tau)));
  }
  r.jump_min = std::numeric_limits<double>::infinity();
  for (const auto& J : sys.J) r.jump_min = std::min(r.jump_min, min_entry(J));
  r.ed_min = min_entry(sys.Ed);
  r.positive = r.metzler_margin >= -tol && r.ec_min >= -tol && r.jump_min >= -tol && r.ed_min >= -tol;
  return r;
}

ImpulsiveSystem lift_sampled_data(const Matrix& A, const Matrix& B, const Matrix& E,
                                  const Matrix& Cy, const Matrix& Fy, const Matrix& K1,
                                  const Matrix& K2) {
  const auto n = A.rows();
  const auto m = B.cols();
  const auto p = E.cols();
  const auto q = Cy.rows();
  auto require_dims = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("lift_sampled_data: ") + what);
  };
  require_dims(n >= 1 && A.cols() == n, "A must be square and nonempty");
  require_dims(B.rows() == n, "B must have n rows");
  require_dims(E.rows() == n, "E must have n rows");
  require_dims(Cy.cols() == n, "Cy must have n columns");
  require_dims(Fy.rows() == q && Fy.cols() == p, "Fy must be q x p");
  require_dims(K1.rows() == m && K1.cols() == q, "K1 must be m x q");
  require_dims(K2.rows() == m && K2.cols() == m, "K2 must be m x m");

  const auto N = n + m;
  Matrix flow = Matrix::Zero(N, N);
  flow.topLeftCorner(n, n) = A;
  flow.topRightCorner(n, m) = B;

  Matrix Ec = Matrix::Zero(N, p);
  Ec.topRows(n) = E;

  Matrix jump = Matrix::Zero(N, N);
  jump.topLeftCorner(n, n).setIdentity();
  jump.bottomLeftCorner(m, n) = K1 * Cy;
  jump.bottomRightCorner(m, m) = K2;

  Matrix Ed = Matrix::Zero(N, p);
  Ed.bottomRows(m) = K1 * Fy;

  Matrix C = Matrix::Zero(q + m, N);
  C.topLeftCorner(q, n) = Cy;
  C.bottomRightCorner(m, m).setIdentity();
  Matrix F = Matrix::Zero(q + m, p);
  F.topRows(q) = Fy;

  return ImpulsiveSystem::make(flow, Ec, {jump}, Ed, C, F, C, F);
}

int switched_jump_index(int num_modes, int i, int j) {
  if (i == j || i < 0 || j < 0 || i >= num_modes || j >= num_modes)
    throw std::invalid_argument("switched_jump_index: need distinct modes in range");
  return i * (num_modes - 1) + (j < i ? j : j - 1);
}

ImpulsiveSystem lift_switched(const std::vector<SwitchedMode>& modes) {
  const int N = static_cast<int>(modes.size());
  if (N < 2) throw std::invalid_argument("lift_switched: at least two modes are required");
  const auto n = modes[0].A.rows();
  const auto p = modes[0].E.cols();
  const auto q = modes[0].C.rows();
  for (int i = 0; i < N; ++i) {
    const auto& md = modes[i];
    const bool ok = md.A.rows() == n && md.A.cols() == n && md.E.rows() == n && md.E.cols() == p &&
                    md.C.rows() == q && md.C.cols() == n && md.F.rows() == q && md.F.cols() == p;
    if (!ok || n < 1)
      throw std::invalid_argument("lift_switched: mode " + std::to_string(i + 1) +
                                  " has dimensions different from mode 1");
  }

  const auto Nn = N * n;
  Matrix flow = Matrix::Zero(Nn, Nn);
  Matrix Ec(Nn, p);
  Matrix C = Matrix::Zero(N * q, Nn);
  Matrix F(N * q, p);
  for (int i = 0; i < N; ++i) {
    flow.block(i * n, i * n, n, n) = modes[i].A;
    Ec.middleRows(i * n, n) = modes[i].E;
    C.block(i * q, i * n, q, n) = modes[i].C;
    F.middleRows(i * q, q) = modes[i].F;
  }

  std::vector<Matrix> jumps;
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < N; ++j) {
      if (i == j) continue;
      Matrix Jij = Matrix::Zero(Nn, Nn);
      Jij.block(i * n, j * n, n, n).setIdentity();
      jumps.push_back(std::move(Jij));
    }
  }
  return ImpulsiveSystem::make(flow, Ec, std::move(jumps), Matrix::Zero(Nn, p), C, F, C, F);
}

}  // namespace ivobs

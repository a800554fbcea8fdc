#pragma once

#include "ivobs/poly.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace ivobs {

/// Constraint on the gaps T_k = t_{k+1} - t_k between consecutive impulses.
class DwellSpec {
 public:
  enum class Kind { Range, Minimum };

  /// T_k in [tmin, tmax], 0 < tmin <= tmax < inf.
  static DwellSpec range(double tmin, double tmax);
  /// T_k >= tbar > 0.
  static DwellSpec minimum(double tbar);

  Kind kind() const { return kind_; }
  bool is_range() const { return kind_ == Kind::Range; }
  bool is_minimum() const { return kind_ == Kind::Minimum; }

  double tmin() const { return tmin_; }
  double tmax() const { return tmax_; }
  double tbar() const { return tmin_; }

  /// Right end of the clock interval the certificates live on: tmax or tbar.
  double horizon() const { return kind_ == Kind::Range ? tmax_ : tmin_; }

  bool admits(double gap, double tol = 1e-12) const;
  std::string describe() const;

  friend bool operator==(const DwellSpec&, const DwellSpec&) = default;

 private:
  DwellSpec(Kind kind, double a, double b) : kind_(kind), tmin_(a), tmax_(b) {}
  Kind kind_ = Kind::Minimum;
  double tmin_ = 1.0;
  double tmax_ = 1.0;
};

/**
 * Linear impulsive system with measured outputs
 *
 *   x'(t)      = A(tau) x + Ec(tau) wc,      tau = t - t_k
 *   x(t_k^+)   = J x(t_k) + Ed wd(k)
 *   yc(t)      = Cc x + Fc wc
 *   yd(k)      = Cd x(t_k) + Fd wd(k)
 *
 * A and Ec are polynomial in the clock; degree zero means time-invariant.
 * Several jump maps may be listed (lifted switched systems); conditions
 * involving J are imposed on each of them.
 */
struct ImpulsiveSystem {
  PolyMatrix A;
  PolyMatrix Ec;
  std::vector<Matrix> J;
  Matrix Ed;
  Matrix Cc;
  Matrix Fc;
  Matrix Cd;
  Matrix Fd;
  std::optional<DwellSpec> dwell;

  int n() const { return A.rows(); }
  int pc() const { return Ec.cols(); }
  int pd() const { return static_cast<int>(Ed.cols()); }
  int qc() const { return static_cast<int>(Cc.rows()); }
  int qd() const { return static_cast<int>(Cd.rows()); }
  bool has_outputs() const { return qc() > 0 || qd() > 0; }

  Matrix A_at(double tau) const { return A.eval(tau); }
  Matrix Ec_at(double tau) const { return Ec.eval(tau); }

  /// Throws std::invalid_argument naming the first inconsistent field.
  void validate() const;

  /// Builds a time-invariant system; absent outputs become 0-row matrices.
  static ImpulsiveSystem make(const Matrix& A, const Matrix& Ec, std::vector<Matrix> jumps,
                              const Matrix& Ed, const Matrix& Cc = {}, const Matrix& Fc = {},
                              const Matrix& Cd = {}, const Matrix& Fd = {});
};

bool operator==(const ImpulsiveSystem& a, const ImpulsiveSystem& b);

/// Pointwise bounds wc_lo <= wc <= wc_hi and wd_lo(k) <= wd(k) <= wd_hi(k).
struct DisturbanceBounds {
  std::function<Vector(double)> wc_lo;
  std::function<Vector(double)> wc_hi;
  std::function<Vector(int)> wd_lo;
  std::function<Vector(int)> wd_hi;

  /// Constant box [-wc_amp, wc_amp] x [-wd_amp, wd_amp].
  static DisturbanceBounds symmetric(int pc, double wc_amp, int pd, double wd_amp);
};

struct PositivityReport {
  double metzler_margin = 0.0;  // min off-diagonal entry of A(tau) over the grid
  double ec_min = 0.0;          // min entry of Ec(tau) over the grid
  double jump_min = 0.0;        // min entry over every J
  double ed_min = 0.0;          // min entry of Ed
  bool positive = false;
};

/// Margins are +inf for empty matrices.
PositivityReport check_positivity(const ImpulsiveSystem& sys, const std::vector<double>& tau_grid,
                                  double tol = 1e-12);

/// Smallest off-diagonal entry (+inf for 1x1).
double metzler_margin(const Matrix& m);
/// Smallest entry (+inf for empty).
double min_entry(const Matrix& m);

/**
 * Impulsive representation of a plant under sampled-data static output
 * feedback u(t) = K1 (Cy x(t_k) + Fy w(t_k)) + K2 u(t_k), with state (x, u).
 * The measured output is diag(Cy, I) (x, u) + (Fy; 0) w on both the
 * continuous and discrete channels.
 */
ImpulsiveSystem lift_sampled_data(const Matrix& A, const Matrix& B, const Matrix& E,
                                  const Matrix& Cy, const Matrix& Fy, const Matrix& K1,
                                  const Matrix& K2);

struct SwitchedMode {
  Matrix A;
  Matrix E;
  Matrix C;
  Matrix F;
};

/**
 * Impulsive representation of a switched system: block-diagonal flow over N
 * copies of the mode state, with one jump map (b_i b_j') kron I_n for each
 * ordered pair i != j. Jumps are ordered lexicographically in (i, j); see
 * switched_jump_index.
 */
ImpulsiveSystem lift_switched(const std::vector<SwitchedMode>& modes);

/// Position of J_ij (switch from mode j to mode i, 0-based) in lift_switched's list.
int switched_jump_index(int num_modes, int i, int j);

}  // namespace ivobs

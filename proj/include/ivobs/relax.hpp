#pragma once

#include "ivobs/lp.hpp"
#include "ivobs/poly.hpp"

#include <map>
#include <string>
#include <vector>

namespace ivobs {

/// Affine function of LP decision variables.
struct LinExpr {
  std::map<int, double> terms;
  double constant = 0.0;

  static LinExpr var(int index, double coeff = 1.0);
  static LinExpr scalar(double c);

  bool has_terms() const;
  double eval(const Vector& v) const;
  LinearTerms linear_terms() const;

  LinExpr& operator+=(const LinExpr& o);
  LinExpr& operator-=(const LinExpr& o);
  LinExpr& operator*=(double s);
  friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
  friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
  friend LinExpr operator*(LinExpr a, double s) { return a *= s; }
  friend LinExpr operator*(double s, LinExpr a) { return a *= s; }
};

/// Polynomial in tau whose coefficients are affine in the decision variables.
class PolyExpr {
 public:
  PolyExpr() : coeffs_(1) {}
  explicit PolyExpr(std::vector<LinExpr> coeffs);
  static PolyExpr from_poly(const Poly& p);

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<LinExpr>& coeffs() const { return coeffs_; }
  bool has_terms() const;

  LinExpr at(double tau) const;
  PolyExpr derivative() const;
  /// Numeric polynomial once the variables are fixed.
  Poly eval(const Vector& v) const;

  PolyExpr& operator+=(const PolyExpr& o);
  PolyExpr& operator-=(const PolyExpr& o);
  PolyExpr& operator*=(double s);
  friend PolyExpr operator+(PolyExpr a, const PolyExpr& b) { return a += b; }
  friend PolyExpr operator-(PolyExpr a, const PolyExpr& b) { return a -= b; }
  friend PolyExpr operator*(PolyExpr a, double s) { return a *= s; }
  friend PolyExpr operator*(double s, PolyExpr a) { return a *= s; }
  friend PolyExpr operator*(const PolyExpr& a, const Poly& p);

 private:
  std::vector<LinExpr> coeffs_;
};

enum class Backend { Handelman, Grid };

/**
 * How interval-nonnegativity of a polynomial expression becomes linear
 * constraints.
 *
 * Handelman: p is matched coefficient-by-coefficient to a nonnegative
 * combination of (tau-lo)^i (hi-tau)^j, i+j <= deg(p) + elevation.
 *
 * Grid: p >= 0 at grid_points uniform points; the solution is then checked on
 * a fine grid and violating fine-grid points are added until it passes or
 * exchange_rounds is exhausted. With grid_margin > 0 the sampled inequalities
 * read p >= grid_margin and any negative fine-grid value triggers an exchange.
 */
struct Relaxation {
  Backend backend = Backend::Handelman;
  int degree = 4;  // degree of the decision polynomials
  int grid_points = 20;
  int elevation = 0;
  int exchange_rounds = 40;
  double grid_margin = 0.0;

  static Relaxation handelman(int degree, int elevation = 0);
  static Relaxation grid(int degree, int points = 20);
  std::string tag() const;  // "handelman(d)" / "grid(m)"
};

/// Points used for a-posteriori verification of interval inequalities.
inline constexpr int kVerifyGridPoints = 10001;

enum class RelaxStatus { Feasible, Infeasible, FineGridViolation };

struct RelaxOutcome {
  RelaxStatus status = RelaxStatus::Infeasible;
  Vector solution;
  double worst_slack = 0.0;  // min over fine grids of every interval constraint
  std::string worst_label;
  int lp_solves = 0;
  int lp_variables = 0;
  int lp_constraints = 0;
};

/// Accumulates scalar and interval constraints and solves them as one LP.
class CertificateProgram {
 public:
  explicit CertificateProgram(Relaxation relax) : relax_(relax) {}

  int add_variable(double lower, double upper) { return lp_.add_variable(lower, upper); }
  /// Polynomial of the given degree with fresh monomial coefficients in [-bound, bound].
  PolyExpr add_poly(int degree, double bound);
  /// Polynomial parametrized by its Bernstein coefficients on [lo, hi], each in
  /// [-bound, bound]. Keeps point evaluations on [lo, hi] well conditioned.
  PolyExpr add_bernstein_poly(int degree, double bound, double lo, double hi);

  void require(const LinExpr& e, Relation rel, double rhs, std::string label);
  /// p(tau) >= 0 for every tau in [lo, hi] (a single point when lo == hi).
  void require_nonneg(const PolyExpr& p, double lo, double hi, std::string label);

  RelaxOutcome solve(const LpOptions& opts = {});

  const Relaxation& relaxation() const { return relax_; }

 private:
  struct IntervalConstraint {
    PolyExpr p;
    double lo;
    double hi;
    std::string label;
  };

  void add_point(const PolyExpr& p, double tau, double floor = 0.0);

  Relaxation relax_;
  LinearProgram lp_;
  std::vector<IntervalConstraint> intervals_;
};

/// Minimum of p over a uniform grid of [lo, hi] (p(lo) if lo == hi).
double min_on_grid(const Poly& p, double lo, double hi, int points = kVerifyGridPoints);

}  // namespace ivobs

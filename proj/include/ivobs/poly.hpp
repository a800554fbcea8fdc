#pragma once

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace ivobs {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/**
 * Univariate polynomial in the clock variable tau.
 *
 * Coefficients are stored densely in ascending degree order: coeffs()[i]
 * multiplies tau^i. Trailing exact zeros are trimmed on construction, so the
 * zero polynomial is represented by the single coefficient {0}.
 */
class Poly {
 public:
  Poly() : coeffs_{0.0} {}
  explicit Poly(std::vector<double> coeffs);

  static Poly constant(double c) { return Poly({c}); }
  static Poly monomial(int power, double c = 1.0);

  int degree() const { return static_cast<int>(coeffs_.size()) - 1; }
  const std::vector<double>& coeffs() const { return coeffs_; }
  double coeff(int k) const { return k >= 0 && k <= degree() ? coeffs_[k] : 0.0; }
  bool is_zero() const { return coeffs_.size() == 1 && coeffs_[0] == 0.0; }

  /// Horner evaluation.
  double operator()(double tau) const;

  Poly derivative() const;

  Poly& operator+=(const Poly& other);
  Poly& operator-=(const Poly& other);
  Poly& operator*=(double s);

  friend Poly operator+(Poly a, const Poly& b) { return a += b; }
  friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
  friend Poly operator*(Poly a, double s) { return a *= s; }
  friend Poly operator*(double s, Poly a) { return a *= s; }
  friend Poly operator*(const Poly& a, const Poly& b);
  friend bool operator==(const Poly& a, const Poly& b) { return a.coeffs_ == b.coeffs_; }

 private:
  void trim();
  std::vector<double> coeffs_;
};

double poly_eval(const Poly& p, double tau);
Poly poly_derivative(const Poly& p);

/// Matrix whose entries are polynomials in tau, stored row-major.
class PolyMatrix {
 public:
  PolyMatrix() = default;
  PolyMatrix(int rows, int cols) : rows_(rows), cols_(cols), entries_(rows * cols) {}

  /// Degree-zero polynomial matrix with the entries of m.
  static PolyMatrix constant(const Matrix& m);
  static PolyMatrix diagonal(const std::vector<Poly>& diag);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  Poly& operator()(int i, int j) { return entries_[i * cols_ + j]; }
  const Poly& operator()(int i, int j) const { return entries_[i * cols_ + j]; }

  int max_degree() const;
  bool is_constant() const { return max_degree() == 0; }

  Matrix eval(double tau) const;
  PolyMatrix derivative() const;

  friend bool operator==(const PolyMatrix&, const PolyMatrix&) = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<Poly> entries_;
};

Matrix polymat_eval(const PolyMatrix& m, double tau);

/// Products (tau - lo)^i (hi - tau)^j for i + j <= degree, expanded into
/// monomial coefficients. Every element is nonnegative on [lo, hi].
struct HandelmanBasis {
  double lo = 0.0;
  double hi = 1.0;
  int degree = 0;
  std::vector<Poly> elements;
  std::vector<std::pair<int, int>> exponents;  // (i, j) of each element
};

/// Throws std::invalid_argument unless hi > lo and d >= 0.
HandelmanBasis handelman_basis(double lo, double hi, int d);

/// Bernstein polynomials C(d,k) s^k (1-s)^(d-k), s = (tau-lo)/(hi-lo), k = 0..d.
/// Throws std::invalid_argument unless hi > lo and d >= 0.
std::vector<Poly> bernstein_basis(double lo, double hi, int d);

/// n uniformly spaced points covering [lo, hi] (both ends included).
std::vector<double> linspace(double lo, double hi, int n);

}  // namespace ivobs

#include "ivobs/poly.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace ivobs {

Poly::Poly(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) coeffs_.push_back(0.0);
  trim();
}

Poly Poly::monomial(int power, double c) {
  if (power < 0) throw std::invalid_argument("Poly::monomial: negative power");
  std::vector<double> coeffs(power + 1, 0.0);
  coeffs[power] = c;
  return Poly(std::move(coeffs));
}

void Poly::trim() {
  while (coeffs_.size() > 1 && coeffs_.back() == 0.0) coeffs_.pop_back();
}

double Poly::operator()(double tau) const {
  double acc = 0.0;
  for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * tau + *it;
  return acc;
}

Poly Poly::derivative() const {
  if (coeffs_.size() == 1) return Poly();
  std::vector<double> d(coeffs_.size() - 1);
  for (std::size_t i = 1; i < coeffs_.size(); ++i) d[i - 1] = static_cast<double>(i) * coeffs_[i];
  return Poly(std::move(d));
}

Poly& Poly::operator+=(const Poly& other) {
  if (other.coeffs_.size() > coeffs_.size()) coeffs_.resize(other.coeffs_.size(), 0.0);
  for (std::size_t i = 0; i < other.coeffs_.size(); ++i) coeffs_[i] += other.coeffs_[i];
  trim();
  return *this;
}

Poly& Poly::operator-=(const Poly& other) {
  if (other.coeffs_.size() > coeffs_.size()) coeffs_.resize(other.coeffs_.size(), 0.0);
  for (std::size_t i = 0; i < other.coeffs_.size(); ++i) coeffs_[i] -= other.coeffs_[i];
  trim();
  return *this;
}

Poly& Poly::operator*=(double s) {
  for (double& c : coeffs_) c *= s;
  trim();
  return *this;
}

Poly operator*(const Poly& a, const Poly& b) {
  std::vector<double> out(a.coeffs_.size() + b.coeffs_.size() - 1, 0.0);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
    for (std::size_t j = 0; j < b.coeffs_.size(); ++j) out[i + j] += a.coeffs_[i] * b.coeffs_[j];
  return Poly(std::move(out));
}

double poly_eval(const Poly& p, double tau) { return p(tau); }
Poly poly_derivative(const Poly& p) { return p.derivative(); }

PolyMatrix PolyMatrix::constant(const Matrix& m) {
  PolyMatrix out(static_cast<int>(m.rows()), static_cast<int>(m.cols()));
  for (int i = 0; i < out.rows(); ++i)
    for (int j = 0; j < out.cols(); ++j) out(i, j) = Poly::constant(m(i, j));
  return out;
}

PolyMatrix PolyMatrix::diagonal(const std::vector<Poly>& diag) {
  const int n = static_cast<int>(diag.size());
  PolyMatrix out(n, n);
  for (int i = 0; i < n; ++i) out(i, i) = diag[i];
  return out;
}

int PolyMatrix::max_degree() const {
  int d = 0;
  for (const auto& p : entries_) d = std::max(d, p.degree());
  return d;
}

Matrix PolyMatrix::eval(double tau) const {
  Matrix out(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) out(i, j) = (*this)(i, j)(tau);
  return out;
}

PolyMatrix PolyMatrix::derivative() const {
  PolyMatrix out(rows_, cols_);
  for (std::size_t k = 0; k < entries_.size(); ++k) out.entries_[k] = entries_[k].derivative();
  return out;
}

Matrix polymat_eval(const PolyMatrix& m, double tau) { return m.eval(tau); }

HandelmanBasis handelman_basis(double lo, double hi, int d) {
  if (!(hi > lo)) {
    throw std::invalid_argument("handelman_basis: empty interval [" + std::to_string(lo) + ", " +
                                std::to_string(hi) + "]");
  }
  if (d < 0) throw std::invalid_argument("handelman_basis: negative degree");

  HandelmanBasis basis;
  basis.lo = lo;
  basis.hi = hi;
  basis.degree = d;

  const Poly left({-lo, 1.0});   // tau - lo
  const Poly right({hi, -1.0});  // hi - tau
  std::vector<Poly> left_pow{Poly::constant(1.0)};
  std::vector<Poly> right_pow{Poly::constant(1.0)};
  for (int k = 1; k <= d; ++k) {
    left_pow.push_back(left_pow.back() * left);
    right_pow.push_back(right_pow.back() * right);
  }
  for (int total = 0; total <= d; ++total) {
    for (int i = 0; i <= total; ++i) {
      const int j = total - i;
      basis.elements.push_back(left_pow[i] * right_pow[j]);
      basis.exponents.emplace_back(i, j);
    }
  }
  return basis;
}

std::vector<Poly> bernstein_basis(double lo, double hi, int d) {
  if (!(hi > lo) || d < 0) throw std::invalid_argument("bernstein_basis: need hi > lo and d >= 0");
  const double w = hi - lo;
  const Poly s({-lo / w, 1.0 / w});
  const Poly t({1.0 + lo / w, -1.0 / w});  // 1 - s
  std::vector<Poly> out;
  double binom = 1.0;
  for (int k = 0; k <= d; ++k) {
    Poly b = Poly::constant(binom);
    for (int i = 0; i < k; ++i) b = b * s;
    for (int i = k; i < d; ++i) b = b * t;
    out.push_back(b);
    binom = binom * (d - k) / (k + 1);
  }
  return out;
}

std::vector<double> linspace(double lo, double hi, int n) {
  if (n <= 0) return {};
  if (n == 1) return {lo};
  std::vector<double> out(n);
  const double step = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) out[i] = lo + step * i;
  out.back() = hi;
  return out;
}

}  // namespace ivobs

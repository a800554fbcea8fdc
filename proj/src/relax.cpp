#include "ivobs/relax.hpp"

#include <algorithm>
#include <cmath>

namespace ivobs {

LinExpr LinExpr::var(int index, double coeff) {
  LinExpr e;
  if (coeff != 0.0) e.terms[index] = coeff;
  return e;
}

LinExpr LinExpr::scalar(double c) {
  LinExpr e;
  e.constant = c;
  return e;
}

bool LinExpr::has_terms() const {
  return std::any_of(terms.begin(), terms.end(), [](const auto& t) { return t.second != 0.0; });
}

double LinExpr::eval(const Vector& v) const {
  double acc = constant;
  for (const auto& [j, a] : terms) acc += a * v(j);
  return acc;
}

LinearTerms LinExpr::linear_terms() const {
  LinearTerms out;
  for (const auto& [j, a] : terms)
    if (a != 0.0) out.emplace_back(j, a);
  return out;
}

LinExpr& LinExpr::operator+=(const LinExpr& o) {
  for (const auto& [j, a] : o.terms) terms[j] += a;
  constant += o.constant;
  return *this;
}

LinExpr& LinExpr::operator-=(const LinExpr& o) {
  for (const auto& [j, a] : o.terms) terms[j] -= a;
  constant -= o.constant;
  return *this;
}

LinExpr& LinExpr::operator*=(double s) {
  for (auto& t : terms) t.second *= s;
  constant *= s;
  return *this;
}

PolyExpr::PolyExpr(std::vector<LinExpr> coeffs) : coeffs_(std::move(coeffs)) {
  if (coeffs_.empty()) coeffs_.resize(1);
}

PolyExpr PolyExpr::from_poly(const Poly& p) {
  std::vector<LinExpr> c;
  for (double v : p.coeffs()) c.push_back(LinExpr::scalar(v));
  return PolyExpr(std::move(c));
}

bool PolyExpr::has_terms() const {
  return std::any_of(coeffs_.begin(), coeffs_.end(), [](const LinExpr& e) { return e.has_terms(); });
}

LinExpr PolyExpr::at(double tau) const {
  LinExpr out;
  double power = 1.0;
  for (const auto& c : coeffs_) {
    LinExpr term = c;
    term *= power;
    out += term;
    power *= tau;
  }
  return out;
}

PolyExpr PolyExpr::derivative() const {
  if (coeffs_.size() == 1) return PolyExpr();
  std::vector<LinExpr> d;
  for (std::size_t k = 1; k < coeffs_.size(); ++k) d.push_back(coeffs_[k] * static_cast<double>(k));
  return PolyExpr(std::move(d));
}

Poly PolyExpr::eval(const Vector& v) const {
  std::vector<double> c;
  for (const auto& e : coeffs_) c.push_back(e.eval(v));
  return Poly(std::move(c));
}

PolyExpr& PolyExpr::operator+=(const PolyExpr& o) {
  if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size());
  for (std::size_t k = 0; k < o.coeffs_.size(); ++k) coeffs_[k] += o.coeffs_[k];
  return *this;
}

PolyExpr& PolyExpr::operator-=(const PolyExpr& o) {
  if (o.coeffs_.size() > coeffs_.size()) coeffs_.resize(o.coeffs_.size());
  for (std::size_t k = 0; k < o.coeffs_.size(); ++k) coeffs_[k] -= o.coeffs_[k];
  return *this;
}

PolyExpr& PolyExpr::operator*=(double s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

PolyExpr operator*(const PolyExpr& a, const Poly& p) {
  if (p.is_zero()) return PolyExpr();
  std::vector<LinExpr> out(a.coeffs_.size() + p.coeffs().size() - 1);
  for (std::size_t i = 0; i < a.coeffs_.size(); ++i)
    for (std::size_t j = 0; j < p.coeffs().size(); ++j)
      if (p.coeffs()[j] != 0.0) out[i + j] += a.coeffs_[i] * p.coeffs()[j];
  return PolyExpr(std::move(out));
}

Relaxation Relaxation::handelman(int degree, int elevation) {
  Relaxation r;
  r.backend = Backend::Handelman;
  r.degree = degree;
  r.elevation = elevation;
  return r;
}

Relaxation Relaxation::grid(int degree, int points) {
  Relaxation r;
  r.backend = Backend::Grid;
  r.degree = degree;
  r.grid_points = points;
  return r;
}

std::string Relaxation::tag() const {
  if (backend == Backend::Handelman) return "handelman(" + std::to_string(degree + elevation) + ")";
  return "grid(" + std::to_string(grid_points) + ")";
}

PolyExpr CertificateProgram::add_poly(int degree, double bound) {
  std::vector<LinExpr> c;
  for (int k = 0; k <= degree; ++k) c.push_back(LinExpr::var(lp_.add_variable(-bound, bound)));
  return PolyExpr(std::move(c));
}

PolyExpr CertificateProgram::add_bernstein_poly(int degree, double bound, double lo, double hi) {
  if (!(hi > lo)) return add_poly(degree, bound);
  PolyExpr out;
  for (const Poly& b : bernstein_basis(lo, hi, degree))
    out += PolyExpr({LinExpr::var(lp_.add_variable(-bound, bound))}) * b;
  return out;
}

void CertificateProgram::require(const LinExpr& e, Relation rel, double rhs, std::string label) {
  (void)label;
  lp_.add_constraint(e.linear_terms(), rel, rhs - e.constant);
}

void CertificateProgram::add_point(const PolyExpr& p, double tau, double floor) {
  const LinExpr v = p.at(tau);
  lp_.add_constraint(v.linear_terms(), Relation::GreaterEq, floor - v.constant);
}

void CertificateProgram::require_nonneg(const PolyExpr& p, double lo, double hi, std::string label) {
  if (!p.has_terms()) {
    // Constant data: record it so an infeasible fixed polynomial is reported.
    intervals_.push_back({p, lo, hi, std::move(label)});
    return;
  }
  if (hi <= lo) {
    add_point(p, lo);
    intervals_.push_back({p, lo, lo, std::move(label)});
    return;
  }

  if (relax_.backend == Backend::Grid) {
    for (double tau : linspace(lo, hi, std::max(2, relax_.grid_points))) add_point(p, tau, relax_.grid_margin);
  } else {
    const int D = p.degree() + relax_.elevation;
    const HandelmanBasis basis = handelman_basis(lo, hi, D);
    std::vector<int> mult;
    for (std::size_t e = 0; e < basis.elements.size(); ++e) mult.push_back(lp_.add_variable(0.0, kInf));
    for (int k = 0; k <= D; ++k) {
      LinExpr row = k <= p.degree() ? p.coeffs()[k] : LinExpr();
      for (std::size_t e = 0; e < basis.elements.size(); ++e) {
        const double hk = basis.elements[e].coeff(k);
        if (hk != 0.0) row -= LinExpr::var(mult[e], hk);
      }
      lp_.add_constraint(row.linear_terms(), Relation::Equal, -row.constant);
    }
  }
  intervals_.push_back({p, lo, hi, std::move(label)});
}

double min_on_grid(const Poly& p, double lo, double hi, int points) {
  if (hi <= lo) return p(lo);
  double mn = kInf;
  for (double tau : linspace(lo, hi, points)) mn = std::min(mn, p(tau));
  return mn;
}

RelaxOutcome CertificateProgram::solve(const LpOptions& opts) {
  RelaxOutcome out;
  // Fixed polynomials that are already negative make the program infeasible.
  for (const auto& ic : intervals_) {
    if (!ic.p.has_terms() && min_on_grid(ic.p.eval(Vector()), ic.lo, ic.hi) < -opts.feas_tol) {
      out.status = RelaxStatus::Infeasible;
      out.worst_label = ic.label;
      return out;
    }
  }

  const int rounds = relax_.backend == Backend::Grid ? std::max(1, relax_.exchange_rounds) : 1;
  const double exchange_tol = relax_.grid_margin > 0.0 ? 0.0 : 5e-9;
  for (int round = 0; round < rounds; ++round) {
    const LpOutcome lp = lp_feasibility(lp_, opts);
    ++out.lp_solves;
    out.lp_variables = lp_.num_variables();
    out.lp_constraints = lp_.num_constraints();
    if (!lp.optimal()) {
      out.status = RelaxStatus::Infeasible;
      return out;
    }
    out.solution = lp.solution;
    out.worst_slack = kInf;
    bool added = false;
    for (const auto& ic : intervals_) {
      const Poly p = ic.p.eval(lp.solution);
      if (ic.hi <= ic.lo) {
        const double v = p(ic.lo);
        if (v < out.worst_slack) {
          out.worst_slack = v;
          out.worst_label = ic.label;
        }
        continue;
      }
      const std::vector<double> grid = linspace(ic.lo, ic.hi, kVerifyGridPoints);
      std::vector<double> vals(grid.size());
      for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = p(grid[i]);
      const auto mn = std::min_element(vals.begin(), vals.end());
      if (*mn < out.worst_slack) {
        out.worst_slack = *mn;
        out.worst_label = ic.label;
      }
      if (relax_.backend != Backend::Grid || *mn >= -exchange_tol || !ic.p.has_terms()) continue;
      // Add every violating local minimum of the fine-grid samples.
      for (std::size_t i = 0; i < vals.size(); ++i) {
        if (vals[i] >= -exchange_tol) continue;
        const bool left_ok = i == 0 || vals[i] <= vals[i - 1];
        const bool right_ok = i + 1 == vals.size() || vals[i] <= vals[i + 1];
        if (left_ok && right_ok) {
          add_point(ic.p, grid[i], relax_.grid_margin);
          added = true;
        }
      }
    }
    if (!added) break;
  }
  out.status = out.worst_slack >= -1e-8 ? RelaxStatus::Feasible : RelaxStatus::FineGridViolation;
  return out;
}

}  // namespace ivobs

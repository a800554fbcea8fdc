#include "ivobs/lp.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <string>

namespace ivobs {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
  }
  return "unknown";
}

int LinearProgram::add_variable(double lower, double upper, double cost) {
  cost_.push_back(cost);
  lower_.push_back(lower);
  upper_.push_back(upper);
  return num_variables() - 1;
}

void LinearProgram::set_bounds(int var, double lower, double upper) {
  lower_.at(var) = lower;
  upper_.at(var) = upper;
}

void LinearProgram::add_constraint(LinearTerms terms, Relation rel, double rhs) {
  rows_.push_back({std::move(terms), rel, rhs});
}

void LinearProgram::add_dense_constraint(const Eigen::VectorXd& row, Relation rel, double rhs) {
  LinearTerms terms;
  for (Eigen::Index j = 0; j < row.size(); ++j)
    if (row(j) != 0.0) terms.emplace_back(static_cast<int>(j), row(j));
  add_constraint(std::move(terms), rel, rhs);
}

double LinearProgram::objective_at(const Eigen::VectorXd& v) const {
  double obj = 0.0;
  for (int j = 0; j < num_variables(); ++j) obj += cost_[j] * v(j);
  return obj;
}

double LinearProgram::max_violation(const Eigen::VectorXd& v) const {
  double worst = 0.0;
  for (int j = 0; j < num_variables(); ++j) {
    worst = std::max(worst, lower_[j] - v(j));
    worst = std::max(worst, v(j) - upper_[j]);
  }
  for (const auto& row : rows_) {
    double lhs = 0.0;
    for (const auto& [j, a] : row.terms) lhs += a * v(j);
    const double r = lhs - row.rhs;
    switch (row.rel) {
      case Relation::LessEq: worst = std::max(worst, r); break;
      case Relation::GreaterEq: worst = std::max(worst, -r); break;
      case Relation::Equal: worst = std::max(worst, std::abs(r)); break;
    }
  }
  return worst;
}

double LinearProgram::max_relative_violation(const Eigen::VectorXd& v) const {
  double worst = 0.0;
  for (int j = 0; j < num_variables(); ++j) {
    const double scale = std::max({1.0, std::abs(lower_[j]) < kInf ? std::abs(lower_[j]) : 0.0,
                                   std::abs(upper_[j]) < kInf ? std::abs(upper_[j]) : 0.0});
    worst = std::max(worst, (lower_[j] - v(j)) / scale);
    worst = std::max(worst, (v(j) - upper_[j]) / scale);
  }
  for (const auto& row : rows_) {
    double lhs = 0.0;
    double scale = std::max(1.0, std::abs(row.rhs));
    for (const auto& [j, a] : row.terms) {
      lhs += a * v(j);
      scale = std::max(scale, std::abs(a * v(j)));
    }
    const double r = (lhs - row.rhs) / scale;
    switch (row.rel) {
      case Relation::LessEq: worst = std::max(worst, r); break;
      case Relation::GreaterEq: worst = std::max(worst, -r); break;
      case Relation::Equal: worst = std::max(worst, std::abs(r)); break;
    }
  }
  return worst;
}

namespace {

// Pivots smaller than this fraction of their column's largest entry are treated as zero.
constexpr double kRelPivotTol = 1e-7;
// Pivots between two re-inversions of the tableau.
constexpr int kReinvertEvery = 50;
constexpr double kDriftTol = 1e-12;

double pow2_scale(double magnitude) {
  if (magnitude <= 0.0 || !std::isfinite(magnitude)) return 1.0;
  return std::ldexp(1.0, -static_cast<int>(std::lround(std::log2(magnitude))));
}

void check_finite(const LinearProgram& lp) {
  for (int j = 0; j < lp.num_variables(); ++j) {
    if (!std::isfinite(lp.cost()[j]))
      throw std::invalid_argument("lp_solve: non-finite cost on variable " + std::to_string(j));
    if (std::isnan(lp.lower()[j]) || std::isnan(lp.upper()[j]) || lp.lower()[j] == kInf ||
        lp.upper()[j] == -kInf)
      throw std::invalid_argument("lp_solve: invalid bounds on variable " + std::to_string(j));
  }
  for (int i = 0; i < lp.num_constraints(); ++i) {
    const auto& row = lp.constraints()[i];
    if (!std::isfinite(row.rhs))
      throw std::invalid_argument("lp_solve: non-finite rhs in row " + std::to_string(i));
    for (const auto& [j, a] : row.terms) {
      if (j < 0 || j >= lp.num_variables())
        throw std::invalid_argument("lp_solve: row " + std::to_string(i) + " references unknown variable");
      if (!std::isfinite(a))
        throw std::invalid_argument("lp_solve: non-finite coefficient in row " + std::to_string(i));
    }
  }
}

/*
 * Bounded-variable primal simplex on a dense tableau.
 *
 * Every column (structural, slack, artificial) carries bounds [lo, hi];
 * nonbasic columns sit at a finite bound, or at zero when the range contains it. Rows become
 * a x + s = b with the slack bounded by the relation. Phase one minimizes
 * the artificials; phase two fixes them to zero, so any that stay basic
 * block every step that would move them.
 */
class Simplex {
 public:
  Simplex(const LinearProgram& lp, const LpOptions& opts) : lp_(lp), opts_(opts) {}

  LpOutcome run();

 private:
  enum class At : char { Basic, Lower, Upper, Zero };
  enum class PhaseResult { Optimal, Unbounded };

  bool build();  // false when the data is trivially infeasible
  void reinvert();
  PhaseResult iterate(bool phase_one, bool repair = false);
  bool repair_costs();
  double nonbasic_value(int j) const;
  Eigen::VectorXd column_values() const;

  const LinearProgram& lp_;
  LpOptions opts_;

  int m_ = 0;
  int num_struct_ = 0;
  int num_cols_ = 0;
  int first_art_ = 0;  // artificial columns are [first_art_, num_cols_)
  Eigen::MatrixXd a_;  // scaled rows, m x num_cols_
  Eigen::VectorXd b_;
  Eigen::VectorXd lo_, hi_;
  Eigen::VectorXd col_scale_;  // structural columns only
  Eigen::VectorXd cost_;       // scaled phase-two costs over all columns
  Eigen::VectorXd c_;          // costs of the current phase
  std::vector<int> art_row_;

  std::vector<int> basis_;
  std::vector<At> state_;
  Eigen::MatrixXd tab_;  // B^-1 A
  Eigen::VectorXd xb_;
  Eigen::VectorXd d_;    // reduced costs
  int iterations_ = 0;
  int last_reinvert_ = -1;
};

double Simplex::nonbasic_value(int j) const {
  switch (state_[j]) {
    case At::Lower: return lo_(j);
    case At::Upper: return hi_(j);
    default: return 0.0;
  }
}

Eigen::VectorXd Simplex::column_values() const {
  Eigen::VectorXd x(num_cols_);
  for (int j = 0; j < num_cols_; ++j) x(j) = state_[j] == At::Basic ? 0.0 : nonbasic_value(j);
  for (int k = 0; k < m_; ++k) x(basis_[k]) = xb_(k);
  return x;
}

bool Simplex::build() {
  const int nv = lp_.num_variables();
  num_struct_ = nv;
  for (int j = 0; j < nv; ++j)
    if (lp_.lower()[j] > lp_.upper()[j]) return false;

  // Dense rows; zero rows are checked directly, the rest scaled by powers of two.
  struct Row {
    Eigen::VectorXd a;
    Relation rel;
    double rhs;
  };
  std::vector<Row> rows;
  for (const auto& c : lp_.constraints()) {
    Eigen::VectorXd a = Eigen::VectorXd::Zero(nv);
    for (const auto& [j, v] : c.terms) a(j) += v;
    const double mx = nv > 0 ? a.cwiseAbs().maxCoeff() : 0.0;
    if (mx == 0.0) {
      const double tol = opts_.feas_tol;
      const bool ok = (c.rel == Relation::LessEq && 0.0 <= c.rhs + tol) ||
                      (c.rel == Relation::GreaterEq && 0.0 >= c.rhs - tol) ||
                      (c.rel == Relation::Equal && std::abs(c.rhs) <= tol);
      if (!ok) return false;
      continue;
    }
    const double s = pow2_scale(mx);
    rows.push_back({a * s, c.rel, c.rhs * s});
  }
  m_ = static_cast<int>(rows.size());

  col_scale_ = Eigen::VectorXd::Ones(nv);
  for (int j = 0; j < nv; ++j) {
    double mx = 0.0;
    for (const auto& r : rows) mx = std::max(mx, std::abs(r.a(j)));
    col_scale_(j) = pow2_scale(mx);
  }

  int n_slack = 0;
  for (const auto& r : rows)
    if (r.rel != Relation::Equal) ++n_slack;
  first_art_ = nv + n_slack;
  num_cols_ = first_art_ + m_;

  a_ = Eigen::MatrixXd::Zero(m_, num_cols_);
  b_ = Eigen::VectorXd::Zero(m_);
  lo_ = Eigen::VectorXd::Zero(num_cols_);
  hi_ = Eigen::VectorXd::Constant(num_cols_, kInf);
  cost_ = Eigen::VectorXd::Zero(num_cols_);
  state_.assign(num_cols_, At::Lower);
  basis_.assign(m_, -1);
  art_row_.assign(m_, -1);

  // Structural columns x_j = v_j / scale_j.
  for (int j = 0; j < nv; ++j) {
    lo_(j) = lp_.lower()[j] / col_scale_(j);
    hi_(j) = lp_.upper()[j] / col_scale_(j);
    cost_(j) = lp_.cost()[j] * col_scale_(j);
    if (lo_(j) < 0.0 && hi_(j) > 0.0)
      state_[j] = At::Zero;  // boxes around zero start in the middle
    else if (std::isfinite(lo_(j)))
      state_[j] = At::Lower;
    else
      state_[j] = At::Upper;
  }
  for (int i = 0; i < m_; ++i) {
    for (int j = 0; j < nv; ++j) a_(i, j) = rows[i].a(j) * col_scale_(j);
    b_(i) = rows[i].rhs;
  }

  // Slacks and artificials; a slack starts basic when it can absorb the residual.
  int slack = nv;
  for (int i = 0; i < m_; ++i) {
    double resid = b_(i);
    for (int j = 0; j < nv; ++j)
      if (a_(i, j) != 0.0) resid -= a_(i, j) * nonbasic_value(j);
    const int art = first_art_ + i;
    art_row_[i] = i;
    if (rows[i].rel != Relation::Equal) {
      const int s = slack++;
      a_(i, s) = 1.0;
      if (rows[i].rel == Relation::LessEq) {
        hi_(s) = kInf;
        state_[s] = At::Lower;
      } else {
        lo_(s) = -kInf;
        hi_(s) = 0.0;
        state_[s] = At::Upper;
      }
      const bool fits = rows[i].rel == Relation::LessEq ? resid >= 0.0 : resid <= 0.0;
      if (fits) {
        basis_[i] = s;
        state_[s] = At::Basic;
        a_(i, art) = 1.0;
        continue;
      }
    }
    a_(i, art) = resid >= 0.0 ? 1.0 : -1.0;
    basis_[i] = art;
    state_[art] = At::Basic;
  }
  // Artificials that start nonbasic can never help; fix them.
  for (int i = 0; i < m_; ++i) {
    const int art = first_art_ + i;
    if (state_[art] != At::Basic) {
      hi_(art) = 0.0;
      state_[art] = At::Lower;
    }
  }
  return true;
}

void Simplex::reinvert() {
  last_reinvert_ = iterations_;
  if (m_ == 0) {
    d_ = c_;
    return;
  }
  Eigen::MatrixXd B(m_, m_);
  for (int k = 0; k < m_; ++k) B.col(k) = a_.col(basis_[k]);
  Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
  tab_ = lu.solve(a_);
  Eigen::VectorXd rhs = b_;
  for (int j = 0; j < num_cols_; ++j)
    if (state_[j] != At::Basic) {
      const double v = nonbasic_value(j);
      if (v != 0.0) rhs -= v * a_.col(j);
    }
  xb_ = lu.solve(rhs);
  for (int it = 0; it < 2; ++it) xb_ += lu.solve(rhs - B * xb_);
  for (int k = 0; k < m_; ++k) {
    tab_.col(basis_[k]).setZero();
    tab_(k, basis_[k]) = 1.0;
  }
  Eigen::VectorXd cb(m_);
  for (int k = 0; k < m_; ++k) cb(k) = c_(basis_[k]);
  d_ = c_ - (cb.transpose() * tab_).transpose();
  for (int k = 0; k < m_; ++k) d_(basis_[k]) = 0.0;
}

// Sum-of-infeasibility costs for basics that drifted outside their bounds;
// false when none did.
bool Simplex::repair_costs() {
  c_.setZero();
  bool any = false;
  for (int k = 0; k < m_; ++k) {
    const int j = basis_[k];
    if (xb_(k) > hi_(j) + kDriftTol * (1.0 + std::abs(hi_(j)))) {
      c_(j) = 1.0;
      any = true;
    } else if (xb_(k) < lo_(j) - kDriftTol * (1.0 + std::abs(lo_(j)))) {
      c_(j) = -1.0;
      any = true;
    }
  }
  if (!any) return false;
  Eigen::VectorXd cb(m_);
  for (int k = 0; k < m_; ++k) cb(k) = c_(basis_[k]);
  d_ = c_ - (cb.transpose() * tab_).transpose();
  for (int k = 0; k < m_; ++k) d_(basis_[k]) = 0.0;
  return true;
}

Simplex::PhaseResult Simplex::iterate(bool phase_one, bool repair) {
  const double dj_tol = 1e-9;
  bool bland = false;
  int stall = 0;
  // Columns whose candidate pivots are all roundoff; skipped until the next pivot.
  std::vector<char> rejected(num_cols_, 0);

  reinvert();
  while (true) {
    if (iterations_ >= opts_.max_iterations) throw LpNumericalError("lp_solve: iteration limit reached");
    if (iterations_ - last_reinvert_ >= kReinvertEvery) reinvert();
    if (repair && !repair_costs()) return PhaseResult::Optimal;

    // Pricing: entering column and its direction of motion.
    int e = -1;
    double dir = 0.0;
    double best = 0.0;
    for (int j = 0; j < num_cols_; ++j) {
      if (state_[j] == At::Basic || rejected[j] || lo_(j) == hi_(j)) continue;
      double dj_dir = 0.0;
      if ((state_[j] == At::Lower || state_[j] == At::Zero) && d_(j) < -dj_tol) dj_dir = 1.0;
      if ((state_[j] == At::Upper || state_[j] == At::Zero) && d_(j) > dj_tol) dj_dir = -1.0;
      if (dj_dir == 0.0) continue;
      if (bland) {
        e = j;
        dir = dj_dir;
        break;
      }
      if (std::abs(d_(j)) > best) {
        best = std::abs(d_(j));
        e = j;
        dir = dj_dir;
      }
    }
    if (e < 0) {
      // Confirm optimality on a freshly computed tableau.
      if (last_reinvert_ == iterations_) return PhaseResult::Optimal;
      reinvert();
      std::fill(rejected.begin(), rejected.end(), 0);
      continue;
    }

    // Ratio test over basic bounds and the entering column's own range.
    const Eigen::VectorXd alpha = tab_.col(e);
    const double colmax = m_ > 0 ? alpha.cwiseAbs().maxCoeff() : 0.0;
    const double tol = std::max(opts_.pivot_tol, kRelPivotTol * colmax);
    // The entering column's own range: a bound flip when it is the limit.
    double step = state_[e] == At::Zero ? (dir > 0.0 ? hi_(e) : -lo_(e)) : hi_(e) - lo_(e);
    int r = -1;
    bool to_lower = true;
    bool blocked_by_tiny = false;
    for (int i = 0; i < m_; ++i) {
      const double g = dir * alpha(i);
      const int bj = basis_[i];
      double room;
      bool lower_side = g > 0.0;
      if (g > 0.0) {
        // An infeasible basic above its upper bound stops there first.
        if (xb_(i) > hi_(bj)) {
          room = xb_(i) - hi_(bj);
          lower_side = false;
        } else {
          if (!std::isfinite(lo_(bj))) continue;
          room = std::max(xb_(i) - lo_(bj), 0.0);
        }
      } else if (g < 0.0) {
        if (xb_(i) < lo_(bj)) {
          room = lo_(bj) - xb_(i);
          lower_side = true;
        } else {
          if (!std::isfinite(hi_(bj))) continue;
          room = std::max(hi_(bj) - xb_(i), 0.0);
        }
      } else {
        continue;
      }
      if (std::abs(g) <= tol) {
        if (std::abs(g) > opts_.pivot_tol) blocked_by_tiny = true;
        continue;
      }
      const double ratio = room / std::abs(g);
      const double slack = 1e-12 * (1.0 + (std::isfinite(step) ? std::abs(step) : 0.0));
      bool take = ratio < step - slack;
      if (!take && r >= 0 && ratio <= step + slack)
        take = bland ? basis_[i] < basis_[r] : std::abs(g) > std::abs(alpha(r));
      if (take) {
        r = i;
        step = std::min(step, ratio);
        to_lower = lower_side;
      }
    }

    if (!std::isfinite(step)) {
      // Phase one is bounded below: an unlimited ray there is roundoff.
      if (phase_one || blocked_by_tiny) {
        rejected[e] = 1;
        continue;
      }
      return PhaseResult::Unbounded;
    }

    ++iterations_;
    const double improvement = std::abs(d_(e)) * step;
    xb_ -= (dir * step) * alpha;
    if (r < 0) {
      // Bound flip: no basis change.
      state_[e] = dir > 0.0 ? At::Upper : At::Lower;
    } else {
      const double entering = (state_[e] == At::Basic ? 0.0 : nonbasic_value(e)) + dir * step;
      const int leaving = basis_[r];
      state_[leaving] = to_lower ? At::Lower : At::Upper;
      const double piv = alpha(r);
      tab_.row(r) /= piv;
      Eigen::VectorXd col = alpha;
      col(r) = 0.0;
      tab_.noalias() -= col * tab_.row(r);
      tab_.col(e).setZero();
      tab_(r, e) = 1.0;
      d_ -= d_(e) * tab_.row(r).transpose();
      d_(e) = 0.0;
      basis_[r] = e;
      state_[e] = At::Basic;
      xb_(r) = entering;
    }
    std::fill(rejected.begin(), rejected.end(), 0);

    if (improvement > 1e-12) {
      stall = 0;
      bland = false;
    } else if (++stall > opts_.stall_limit) {
      bland = true;
    }
  }
}

LpOutcome Simplex::run() {
  LpOutcome out;
  if (!build()) return out;

  // Phase one: minimize the artificials that start basic.
  c_ = Eigen::VectorXd::Zero(num_cols_);
  bool any_art = false;
  for (int k = 0; k < m_; ++k)
    if (basis_[k] >= first_art_) {
      c_(basis_[k]) = 1.0;
      any_art = true;
    }
  if (any_art) {
    iterate(true);
    reinvert();
    for (int k = 0; k < m_; ++k) {
      const int j = basis_[k];
      if (j < first_art_) continue;
      // Each artificial is judged against the scale of its own row.
      if (xb_(k) > opts_.feas_tol * (1.0 + std::abs(b_(art_row_[j - first_art_])))) {
        out.iterations = iterations_;
        return out;
      }
    }
  }
  for (int j = first_art_; j < num_cols_; ++j) {
    hi_(j) = 0.0;
    if (state_[j] != At::Basic) state_[j] = At::Lower;
  }

  // Phase two.
  c_ = cost_;
  const PhaseResult phase2 = iterate(false);
  out.iterations = iterations_;
  if (phase2 == PhaseResult::Unbounded) {
    out.status = LpStatus::Unbounded;
    return out;
  }

  // Rank-one updates can leave basics slightly outside their bounds; push them
  // back and re-optimize.
  for (int pass = 0; pass < 3; ++pass) {
    reinvert();
    if (!repair_costs()) break;
    iterate(true, true);
    c_ = cost_;
    if (iterate(false) == PhaseResult::Unbounded) {
      out.status = LpStatus::Unbounded;
      return out;
    }
  }
  out.iterations = iterations_;
  c_ = cost_;
  reinvert();
  const Eigen::VectorXd x = column_values();
  Eigen::VectorXd v(num_struct_);
  for (int j = 0; j < num_struct_; ++j) v(j) = x(j) * col_scale_(j);
  out.max_violation = lp_.max_violation(v);
  const double rel = lp_.max_relative_violation(v);
  if (!(rel <= opts_.feas_tol)) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "lp_solve: vertex violates constraints by %.3g (relative)", rel);
    throw LpNumericalError(buf);
  }
  out.status = LpStatus::Optimal;
  out.solution = std::move(v);
  out.objective = lp_.objective_at(out.solution);
  return out;
}

}  // namespace

LpOutcome lp_solve(const LinearProgram& lp, const LpOptions& opts) {
  check_finite(lp);
  Simplex simplex(lp, opts);
  return simplex.run();
}

LpOutcome lp_feasibility(const LinearProgram& lp, const LpOptions& opts) {
  LinearProgram zero = lp;
  for (int j = 0; j < zero.num_variables(); ++j) zero.set_cost(j, 0.0);
  return lp_solve(zero, opts);
}

}  // namespace ivobs

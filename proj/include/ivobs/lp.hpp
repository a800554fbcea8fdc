#pragma once

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace ivobs {

enum class Relation { LessEq, Equal, GreaterEq };
enum class LpStatus { Optimal, Infeasible, Unbounded };

const char* to_string(LpStatus s);

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Sparse row: (variable index, coefficient) pairs.
using LinearTerms = std::vector<std::pair<int, double>>;

struct LinearConstraint {
  LinearTerms terms;
  Relation rel = Relation::LessEq;
  double rhs = 0.0;
};

/**
 * Linear program  min c'v  subject to row constraints and per-variable bounds.
 *
 * Stored exactly as the caller built it; conversion to standard form happens
 * inside the solver.
 */
class LinearProgram {
 public:
  LinearProgram() = default;

  int add_variable(double lower = 0.0, double upper = kInf, double cost = 0.0);
  void add_constraint(LinearTerms terms, Relation rel, double rhs);
  void add_dense_constraint(const Eigen::VectorXd& row, Relation rel, double rhs);

  void set_cost(int var, double cost) { cost_.at(var) = cost; }
  void set_bounds(int var, double lower, double upper);

  int num_variables() const { return static_cast<int>(cost_.size()); }
  int num_constraints() const { return static_cast<int>(rows_.size()); }

  const std::vector<double>& cost() const { return cost_; }
  const std::vector<double>& lower() const { return lower_; }
  const std::vector<double>& upper() const { return upper_; }
  const std::vector<LinearConstraint>& constraints() const { return rows_; }

  /// Largest violation of any row or bound at v (0 when feasible).
  double max_violation(const Eigen::VectorXd& v) const;
  /// Row residuals divided by max(1, |rhs|, max_j |a_j v_j|); bounds as in max_violation.
  double max_relative_violation(const Eigen::VectorXd& v) const;
  double objective_at(const Eigen::VectorXd& v) const;

 private:
  std::vector<double> cost_;
  std::vector<double> lower_;
  std::vector<double> upper_;
  std::vector<LinearConstraint> rows_;
};

struct LpOutcome {
  LpStatus status = LpStatus::Infeasible;
  Eigen::VectorXd solution;  // empty unless Optimal
  double objective = 0.0;
  double max_violation = 0.0;
  int iterations = 0;

  bool optimal() const { return status == LpStatus::Optimal; }
};

struct LpOptions {
  double feas_tol = 1e-9;
  double pivot_tol = 1e-10;
  int max_iterations = 200000;
  /// Non-improving pivots tolerated under Dantzig pricing before falling back
  /// to Bland's rule.
  int stall_limit = 50;
};

/// Raised when a returned vertex cannot be certified to feas_tol, or the
/// iteration budget is exhausted.
class LpNumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two-phase dense primal simplex. Rejects NaN/Inf data with
/// std::invalid_argument; infinite bounds are allowed.
LpOutcome lp_solve(const LinearProgram& lp, const LpOptions& opts = {});

/// Solves with the objective replaced by zero.
LpOutcome lp_feasibility(const LinearProgram& lp, const LpOptions& opts = {});

}  // namespace ivobs

#pragma once

#include "ivobs/analysis.hpp"

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ivobs {

/// X(tau) came too close to singular for L_c = X^{-1} U_c.
class GainRecoveryFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SynthOptions {
  Backend backend = Backend::Handelman;
  int degree = 4;  // first degree tried for X and U_c
  int max_degree = 10;
  int degree_step = 2;
  int grid_points = 20;
  int elevation = 0;
  double eps = 1e-3;
  double margin = 1e-6;
  double delta_x = 1e-4;  // lower bound on the diagonal of X over the clock interval
  double alpha_max = 1e4;
  double bound = 1e6;
  int fine_grid = 2001;
};

/**
 * Decision variables of a feasible design and the gains they induce:
 * L_c(tau) = X(tau)^{-1} U_c(tau), L_d = X(anchor)^{-1} U_d with anchor 0
 * (range) or tbar (minimum). One U_d / L_d per jump map.
 */
struct ObserverGains {
  PolyMatrix X;   // n x n diagonal
  PolyMatrix Uc;  // n x qc
  std::vector<Matrix> Ud;
  std::vector<Matrix> Ld;
  DwellSpec spec = DwellSpec::minimum(1.0);
  double alpha = 0.0;
  double eps = 0.0;
  double delta_x = 1e-4;

  double anchor() const { return spec.is_range() ? 0.0 : spec.tbar(); }
  /// Clock value the continuous gain is evaluated at: clamped to
  /// [0, tmax] (range) or saturated at tbar (minimum).
  double clamp_clock(double tau) const;
  Matrix Lc(double tau) const;
};

/// Row i of U_c(tau) divided by X_ii(tau), tau clamped per the gain structure.
/// Throws GainRecoveryFailure when X_ii(tau) < delta_x / 2.
Matrix recover_gain_at(const ObserverGains& gains, double tau);

struct DesignMargins {
  double metzler = 0.0;  // min off-diagonal of A - L_c(tau) C_c
  double ec = 0.0;       // min entry of Ec - L_c(tau) F_c
  double jump = 0.0;     // min entry of J - L_d C_d over jump maps
  double ed = 0.0;       // min entry of Ed - L_d F_d over jump maps
  double spectral = 0.0; // spectral margin of the closed-loop error system (< 0 passes)
  double x_min = 0.0;    // min diagonal entry of X over the clock interval
};

struct DesignReport {
  bool feasible = false;  // the synthesis LP had a solution
  bool verified = false;  // every a-posteriori check passed
  std::optional<ObserverGains> gains;
  DesignMargins margins;
  std::vector<std::string> violations;
  std::string backend;
  int degree = 0;
  int lp_variables = 0;
  int lp_constraints = 0;
  double certificate_slack = 0.0;  // min slack of the synthesis inequalities on the fine grid
  std::string message;

  bool ok() const { return feasible && verified; }
};

/// Throws std::invalid_argument for output-free systems, clock-dependent A or
/// bad dwell bounds.
DesignReport synth_range(const ImpulsiveSystem& sys, double tmin, double tmax, const SynthOptions& opts = {});
DesignReport synth_min(const ImpulsiveSystem& sys, double tbar, const SynthOptions& opts = {});
DesignReport synthesize(const ImpulsiveSystem& sys, const DwellSpec& spec, const SynthOptions& opts = {});

/// Positivity of the error dynamics on a fine grid plus a spectral stability
/// re-check of the closed loop. Never throws for failing designs.
DesignReport verify_design(const ImpulsiveSystem& sys, const ObserverGains& gains, const DwellSpec& spec,
                           int fine_grid = 2001);

/// Smallest entries of J - L_d C_d and Ed - L_d F_d (for an externally supplied L_d).
struct JumpPositivity {
  double jump = 0.0;
  double ed = 0.0;
  double min() const { return std::min(jump, ed); }
};
JumpPositivity jump_positivity(const ImpulsiveSystem& sys, const std::vector<Matrix>& Ld);

/// Slack of every synthesis inequality in (X, U_c, U_d, alpha, eps), evaluated
/// on a uniform grid.
double design_certificate_slack(const ImpulsiveSystem& sys, const ObserverGains& gains,
                                int points = kVerifyGridPoints);

/// Slack of the clock conditions for the closed-loop error system with
/// zeta(tau) = X(tau) 1, computed through the recovered gains.
double closed_loop_clock_slack(const ImpulsiveSystem& sys, const ObserverGains& gains,
                               int points = kVerifyGridPoints);

/// Closed-loop error flow A - L_c(tau) C_c with the gain structure applied.
FlowFn error_flow(const ImpulsiveSystem& sys, const ObserverGains& gains);
std::vector<Matrix> error_jumps(const ImpulsiveSystem& sys, const std::vector<Matrix>& Ld);

}  // namespace ivobs

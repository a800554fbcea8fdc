#pragma once

#include "ivobs/relax.hpp"
#include "ivobs/systems.hpp"

#include <functional>
#include <optional>
#include <vector>

namespace ivobs {

/// Clock-dependent flow matrix tau -> A(tau).
using FlowFn = std::function<Matrix(double)>;

/// Phi(T) for Phi' = A(s) Phi, Phi(0) = I, with the RK4 nodes kept.
struct TransitionMatrix {
  Matrix value;
  double horizon = 0.0;
  int steps = 0;
  std::vector<Matrix> nodes;  // nodes[k] = Phi(k * horizon / steps)

  double step() const { return steps > 0 ? horizon / steps : 0.0; }
};

/// Classical fixed-step RK4 on the matrix ODE. Requires T >= 0, steps >= 1.
TransitionMatrix transition_matrix(const FlowFn& A, int n, double T, int steps);
TransitionMatrix transition_matrix(const Matrix& A, double T, int steps);
TransitionMatrix transition_matrix(const PolyMatrix& A, double T, int steps);

struct CertOptions {
  double margin = 1e-6;  // strict inequalities become <= -margin / >= margin
  double eps = 1e-3;     // the epsilon of the clock conditions
  double bound = 1e6;    // box on certificate coefficients
  int theta_samples = 101;
  int refine_factor = 10;
  int steps = 200;  // RK4 steps per transition matrix
};

enum class CertStatus { Certified, Infeasible, FineGridViolation };
const char* to_string(CertStatus s);

/// lambda > 0 with lambda'(J Phi(theta) - I) < 0 (and lambda'A(tbar) < 0 for
/// minimum dwell-time). lambda is normalized to sum to n.
struct SpectralCertificate {
  Vector lambda;
  double margin = 0.0;  // max entry of the certified row vectors over the refined grid
  std::vector<double> theta_grid;
};

struct SpectralResult {
  CertStatus status = CertStatus::Infeasible;
  std::optional<SpectralCertificate> certificate;
  bool certified() const { return status == CertStatus::Certified; }
};

SpectralResult certify_range_spectral(const ImpulsiveSystem& sys, double tmin, double tmax,
                                      const CertOptions& opts = {});
SpectralResult certify_range_spectral(const FlowFn& A, const std::vector<Matrix>& jumps, double tmin,
                                      double tmax, const CertOptions& opts = {});

SpectralResult certify_min_spectral(const ImpulsiveSystem& sys, double tbar, const CertOptions& opts = {});
SpectralResult certify_min_spectral(const FlowFn& A, const std::vector<Matrix>& jumps, double tbar,
                                    const CertOptions& opts = {});

/// Polynomial vector zeta(tau) satisfying the clock-dependent conditions.
struct ClockCertificate {
  PolyMatrix zeta;  // n x 1
  double eps = 0.0;
  Relaxation relaxation;
  DwellSpec spec = DwellSpec::minimum(1.0);
  double worst_slack = 0.0;  // from the fine-grid check at solve time
};

struct ClockResult {
  CertStatus status = CertStatus::Infeasible;
  std::optional<ClockCertificate> certificate;
  int lp_variables = 0;
  int lp_constraints = 0;
  bool certified() const { return status == CertStatus::Certified; }
};

ClockResult certify_range_clock(const ImpulsiveSystem& sys, double tmin, double tmax,
                                const Relaxation& relax, const CertOptions& opts = {});
ClockResult certify_min_clock(const ImpulsiveSystem& sys, double tbar, const Relaxation& relax,
                              const CertOptions& opts = {});

/// Smallest slack of every certified inequality, evaluated directly on a
/// uniform grid of the certificate's clock intervals.
double clock_certificate_slack(const ImpulsiveSystem& sys, const ClockCertificate& cert,
                               int points = kVerifyGridPoints);

/// Ultimate bound on V(x) = lambda'x at impulse instants under bounded inputs.
struct IssBound {
  double epsilon = 0.0;  // V_{k+1} <= epsilon V_k + mu
  double mu = 0.0;
  double ultimate = 0.0;  // mu / (1 - epsilon)
  Matrix M;               // entrywise bound on int_0^theta Psi(theta,s) Ec(s) ds
};

/// Throws std::domain_error when the contraction factor is not in (0, 1).
IssBound iss_bound(const ImpulsiveSystem& sys, const SpectralCertificate& cert, double wc_sup,
                   double wd_sup, double tmin, double tmax, const CertOptions& opts = {});

}  // namespace ivobs

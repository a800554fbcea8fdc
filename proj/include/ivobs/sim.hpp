#pragma once

#include "ivobs/synthesis.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <filesystem>
#include <optional>
#include <random>
#include <stdexcept>
#include <vector>

namespace ivobs {

/// Non-finite state during integration.
class SimulationDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Impulse times t_0 = 0 < t_1 < ... < t_K < horizon. t_0 only starts the
/// clock; jumps happen at t_1..t_K.
struct DwellSequence {
  std::vector<double> times;
  double horizon = 0.0;
  std::uint64_t seed = 0;
  std::optional<DwellSpec> spec;

  int impulses() const { return static_cast<int>(times.size()) - 1; }
  double min_gap() const;
};

/**
 * Range: T_k ~ U[tmin, tmax]. Minimum: T_k ~ tbar + U[0, spread] with spread
 * defaulting to tbar. Throws std::invalid_argument for horizon <= 0.
 */
DwellSequence gen_dwell(const DwellSpec& spec, double horizon, std::uint64_t seed,
                        std::optional<double> spread = std::nullopt);
/// Same draws from a caller-owned generator (seed recorded as 0).
DwellSequence gen_dwell(const DwellSpec& spec, double horizon, std::mt19937_64& rng,
                        std::optional<double> spread = std::nullopt);
/// Sequence with the given impulse times (t_0 = 0 prepended when missing).
DwellSequence fixed_dwell(std::vector<double> times, double horizon);

/// min(min gap / 200, 1e-2).
double default_step(const DwellSequence& dwell);

enum class Side : char { Continuous = 'c', Left = 'l', Right = 'r' };

struct HybridTrajectory {
  std::vector<double> t;
  std::vector<Side> side;
  std::vector<Vector> x;
  std::vector<Vector> x_lo;  // empty unless an observer was simulated
  std::vector<Vector> x_hi;
  std::vector<int> jump_map;  // map applied at each impulse (index k-1)

  std::size_t size() const { return t.size(); }
  bool empty() const { return t.empty(); }
  bool has_observer() const { return !x_lo.empty(); }
  Vector e_lo(std::size_t i) const { return x[i] - x_lo[i]; }
  Vector e_hi(std::size_t i) const { return x_hi[i] - x[i]; }
  /// Last sample at or before time s.
  std::size_t index_at(double s) const;
};

using InputFn = std::function<Vector(double)>;
using DiscreteInputFn = std::function<Vector(int)>;
/// Jump map used at impulse k (k >= 1).
using JumpSelector = std::function<int(int)>;

/// Gains as used by the observer: L_c as a function of the clock, one L_d per jump map.
struct GainSchedule {
  std::function<Matrix(double)> Lc;
  std::vector<Matrix> Ld;

  static GainSchedule from(const ObserverGains& gains);
  static GainSchedule constant(const Matrix& Lc, std::vector<Matrix> Ld);
};

/// Inputs of a plant run shared by the plant and observer simulations.
struct PlantRun {
  Vector x0;
  InputFn wc;
  DiscreteInputFn wd;
  JumpSelector select;  // empty: always map 0
};

/**
 * Fixed-step RK4 between impulses; each gap is split into equal steps no
 * longer than h so impulse times are grid nodes. Throws SimulationDiverged on
 * non-finite states and std::invalid_argument for h <= 0.
 */
HybridTrajectory simulate_plant(const ImpulsiveSystem& sys, const DwellSequence& dwell, const PlantRun& run,
                                double h);

/**
 * Plant and both observer copies integrated on one grid. The upper copy is
 * driven by the upper disturbance bounds, the lower copy by the lower ones;
 * measurements come from the plant state at RK stage times and at the left
 * limit of each impulse.
 */
HybridTrajectory simulate_observer(const ImpulsiveSystem& sys, const GainSchedule& gains,
                                   const DwellSequence& dwell, const Vector& x0_lo, const Vector& x0_hi,
                                   const DisturbanceBounds& bounds, const PlantRun& run, double h);

/**
 * Error dynamics e' = (A - L_c C_c) e + (Ec - L_c Fc) dc,
 * e(t_k+) = (J - L_d C_d) e + (Ed - L_d Fd) dd(k), stored in x.
 */
HybridTrajectory simulate_error(const ImpulsiveSystem& sys, const GainSchedule& gains, const DwellSequence& dwell,
                                const Vector& e0, const InputFn& dc, const DiscreteInputFn& dd,
                                const JumpSelector& select, double h);

struct FramingReport {
  double lower_margin = 0.0;  // min of x - x_lo
  double upper_margin = 0.0;  // min of x_hi - x
  double worst_time = 0.0;
  std::size_t samples = 0;
  bool passed = false;
  double margin() const { return std::min(lower_margin, upper_margin); }
};

inline constexpr double kFramingTol = 1e-9;

/// Throws std::invalid_argument for empty trajectories or ones without observer samples.
FramingReport check_framing(const HybridTrajectory& traj);

/// Header t,side,x1..xn[,xm1..xmn,xp1..xpn]; 17 significant digits.
void write_csv(std::ostream& os, const HybridTrajectory& traj);
void write_csv(const std::filesystem::path& path, const HybridTrajectory& traj);

}  // namespace ivobs

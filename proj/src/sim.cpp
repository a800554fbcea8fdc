#include "ivobs/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace ivobs {

double DwellSequence::min_gap() const {
  double g = kInf;
  for (std::size_t k = 1; k < times.size(); ++k) g = std::min(g, times[k] - times[k - 1]);
  if (!std::isfinite(g)) g = horizon;
  return g;
}

DwellSequence gen_dwell(const DwellSpec& spec, double horizon, std::uint64_t seed, std::optional<double> spread) {
  std::mt19937_64 rng(seed);
  DwellSequence seq = gen_dwell(spec, horizon, rng, spread);
  seq.seed = seed;
  return seq;
}

DwellSequence gen_dwell(const DwellSpec& spec, double horizon, std::mt19937_64& rng, std::optional<double> spread) {
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("gen_dwell: horizon must be positive");
  const double delta = spread.value_or(spec.tbar());
  if (spec.is_minimum() && !(delta >= 0.0)) throw std::invalid_argument("gen_dwell: spread must be nonnegative");

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  DwellSequence seq;
  seq.horizon = horizon;
  seq.spec = spec;
  seq.times.push_back(0.0);
  for (;;) {
    double gap;
    if (spec.is_range())
      gap = spec.tmax() > spec.tmin() ? spec.tmin() + (spec.tmax() - spec.tmin()) * unit(rng) : spec.tmin();
    else
      gap = spec.tbar() + delta * unit(rng);
    const double next = seq.times.back() + gap;
    if (next >= horizon) break;
    seq.times.push_back(next);
  }
  return seq;
}

DwellSequence fixed_dwell(std::vector<double> times, double horizon) {
  if (times.empty() || times.front() != 0.0) times.insert(times.begin(), 0.0);
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1])) throw std::invalid_argument("fixed_dwell: impulse times must increase");
  if (!(horizon > times.back())) throw std::invalid_argument("fixed_dwell: horizon must exceed the last impulse");
  DwellSequence seq;
  seq.times = std::move(times);
  seq.horizon = horizon;
  return seq;
}

double default_step(const DwellSequence& dwell) {
  double g = dwell.min_gap();
  if (!dwell.times.empty()) g = std::min(g, dwell.horizon - dwell.times.back());
  return std::min(g / 200.0, 1e-2);
}

std::size_t HybridTrajectory::index_at(double s) const {
  if (t.empty()) throw std::invalid_argument("index_at: empty trajectory");
  auto it = std::upper_bound(t.begin(), t.end(), s);
  if (it == t.begin()) return 0;
  return static_cast<std::size_t>(it - t.begin()) - 1;
}

GainSchedule GainSchedule::from(const ObserverGains& gains) {
  GainSchedule g;
  g.Lc = [gains](double tau) { return recover_gain_at(gains, tau); };
  g.Ld = gains.Ld;
  return g;
}

GainSchedule GainSchedule::constant(const Matrix& Lc, std::vector<Matrix> Ld) {
  GainSchedule g;
  g.Lc = [Lc](double) { return Lc; };
  g.Ld = std::move(Ld);
  return g;
}

namespace {

using Flow = std::function<Vector(double t, double tau, const Vector& z)>;
using Jump = std::function<Vector(int k, double t, const Vector& z)>;
using Record = std::function<void(double t, Side side, const Vector& z)>;

void guard(const Vector& z, double t) {
  if (!z.allFinite()) {
    std::ostringstream os;
    os << "state became non-finite at t = " << t;
    throw SimulationDiverged(os.str());
  }
}

void integrate(const DwellSequence& dwell, double h, Vector z, const Flow& f, const Jump& jump, const Record& rec) {
  if (!(h > 0.0) || !std::isfinite(h)) throw std::invalid_argument("simulation step must be positive");
  if (dwell.times.empty() || dwell.times.front() != 0.0)
    throw std::invalid_argument("dwell sequence must start at t = 0");
  guard(z, 0.0);
  rec(0.0, Side::Continuous, z);
  const int K = dwell.impulses();
  for (int k = 0; k <= K; ++k) {
    const double s = dwell.times[k];
    const double e = k < K ? dwell.times[k + 1] : dwell.horizon;
    if (!(e > s)) continue;
    const int steps = std::max(1, static_cast<int>(std::ceil((e - s) / h - 1e-9)));
    const double dt = (e - s) / steps;
    for (int i = 0; i < steps; ++i) {
      const double tau = i * dt;
      const double t = s + tau;
      const Vector k1 = f(t, tau, z);
      const Vector k2 = f(t + 0.5 * dt, tau + 0.5 * dt, z + 0.5 * dt * k1);
      const Vector k3 = f(t + 0.5 * dt, tau + 0.5 * dt, z + 0.5 * dt * k2);
      const Vector k4 = f(t + dt, tau + dt, z + dt * k3);
      z += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      const double tn = i + 1 == steps ? e : s + (i + 1) * dt;
      guard(z, tn);
      if (i + 1 == steps && k < K) {
        rec(tn, Side::Left, z);
        z = jump(k + 1, tn, z);
        guard(z, tn);
        rec(tn, Side::Right, z);
      } else {
        rec(tn, Side::Continuous, z);
      }
    }
  }
}

Vector input_or_zero(const InputFn& w, double t, int dim) {
  if (dim == 0) return Vector(0);
  if (!w) throw std::invalid_argument("missing continuous disturbance");
  Vector v = w(t);
  if (v.size() != dim) throw std::invalid_argument("continuous disturbance has the wrong dimension");
  return v;
}

Vector input_or_zero(const DiscreteInputFn& w, int k, int dim) {
  if (dim == 0) return Vector(0);
  if (!w) throw std::invalid_argument("missing discrete disturbance");
  Vector v = w(k);
  if (v.size() != dim) throw std::invalid_argument("discrete disturbance has the wrong dimension");
  return v;
}

int select_map(const ImpulsiveSystem& sys, const JumpSelector& select, int k) {
  const int j = select ? select(k) : 0;
  if (j < 0 || j >= static_cast<int>(sys.J.size())) throw std::out_of_range("jump selector returned an invalid map");
  return j;
}

// A(tau) and Ec(tau), computed once when time-invariant.
struct FlowData {
  const ImpulsiveSystem& sys;
  bool constant;
  Matrix A0, E0;
  explicit FlowData(const ImpulsiveSystem& s)
      : sys(s), constant(s.A.is_constant() && s.Ec.is_constant()), A0(s.A_at(0.0)), E0(s.Ec_at(0.0)) {}
  Matrix A(double tau) const { return constant ? A0 : sys.A_at(tau); }
  Matrix Ec(double tau) const { return constant ? E0 : sys.Ec_at(tau); }
};

void check_state(const ImpulsiveSystem& sys, const Vector& v, const char* what) {
  if (v.size() != sys.n()) throw std::invalid_argument(std::string(what) + " has the wrong dimension");
}

void check_gains(const ImpulsiveSystem& sys, const GainSchedule& g) {
  if (!g.Lc) throw std::invalid_argument("gain schedule has no continuous gain");
  if (g.Ld.size() != sys.J.size()) throw std::invalid_argument("gain schedule needs one L_d per jump map");
  for (const auto& L : g.Ld)
    if (L.rows() != sys.n() || L.cols() != sys.qd()) throw std::invalid_argument("L_d has the wrong dimensions");
}

}  // namespace

HybridTrajectory simulate_plant(const ImpulsiveSystem& sys, const DwellSequence& dwell, const PlantRun& run,
                                double h) {
  sys.validate();
  check_state(sys, run.x0, "x0");
  const FlowData fd(sys);
  HybridTrajectory traj;
  auto f = [&](double t, double tau, const Vector& x) -> Vector {
    return fd.A(tau) * x + fd.Ec(tau) * input_or_zero(run.wc, t, sys.pc());
  };
  auto jump = [&](int k, double, const Vector& x) -> Vector {
    const int j = select_map(sys, run.select, k);
    traj.jump_map.push_back(j);
    const Vector wd = input_or_zero(run.wd, k, sys.pd());
    return sys.J[j] * x + sys.Ed * wd;
  };
  auto rec = [&](double t, Side side, const Vector& x) {
    traj.t.push_back(t);
    traj.side.push_back(side);
    traj.x.push_back(x);
  };
  integrate(dwell, h, run.x0, f, jump, rec);
  return traj;
}

HybridTrajectory simulate_observer(const ImpulsiveSystem& sys, const GainSchedule& gains,
                                   const DwellSequence& dwell, const Vector& x0_lo, const Vector& x0_hi,
                                   const DisturbanceBounds& bounds, const PlantRun& run, double h) {
  sys.validate();
  check_state(sys, run.x0, "x0");
  check_state(sys, x0_lo, "x0_lo");
  check_state(sys, x0_hi, "x0_hi");
  check_gains(sys, gains);
  const int n = sys.n();
  const int pc = sys.pc();
  const int pd = sys.pd();
  const FlowData fd(sys);
  HybridTrajectory traj;

  auto f = [&](double t, double tau, const Vector& z) -> Vector {
    const Matrix A = fd.A(tau);
    const Matrix Ec = fd.Ec(tau);
    const Matrix Lc = gains.Lc(tau);
    const Vector wc = input_or_zero(run.wc, t, pc);
    const Vector wl = input_or_zero(bounds.wc_lo, t, pc);
    const Vector wh = input_or_zero(bounds.wc_hi, t, pc);
    const Vector x = z.segment(0, n);
    const Vector xl = z.segment(n, n);
    const Vector xh = z.segment(2 * n, n);
    const Vector y = sys.Cc * x + sys.Fc * wc;
    Vector dz(3 * n);
    dz.segment(0, n) = A * x + Ec * wc;
    dz.segment(n, n) = A * xl + Ec * wl + Lc * (y - sys.Cc * xl - sys.Fc * wl);
    dz.segment(2 * n, n) = A * xh + Ec * wh + Lc * (y - sys.Cc * xh - sys.Fc * wh);
    return dz;
  };
  auto jump = [&](int k, double, const Vector& z) -> Vector {
    const int j = select_map(sys, run.select, k);
    traj.jump_map.push_back(j);
    const Matrix& J = sys.J[j];
    const Matrix& Ld = gains.Ld[j];
    const Vector wd = input_or_zero(run.wd, k, pd);
    const Vector wl = input_or_zero(bounds.wd_lo, k, pd);
    const Vector wh = input_or_zero(bounds.wd_hi, k, pd);
    const Vector x = z.segment(0, n);
    const Vector xl = z.segment(n, n);
    const Vector xh = z.segment(2 * n, n);
    const Vector yd = sys.Cd * x + sys.Fd * wd;
    Vector out(3 * n);
    out.segment(0, n) = J * x + sys.Ed * wd;
    out.segment(n, n) = J * xl + sys.Ed * wl + Ld * (yd - sys.Cd * xl - sys.Fd * wl);
    out.segment(2 * n, n) = J * xh + sys.Ed * wh + Ld * (yd - sys.Cd * xh - sys.Fd * wh);
    return out;
  };
  auto rec = [&](double t, Side side, const Vector& z) {
    traj.t.push_back(t);
    traj.side.push_back(side);
    traj.x.push_back(z.segment(0, n));
    traj.x_lo.push_back(z.segment(n, n));
    traj.x_hi.push_back(z.segment(2 * n, n));
  };
  Vector z0(3 * n);
  z0 << run.x0, x0_lo, x0_hi;
  integrate(dwell, h, z0, f, jump, rec);
  return traj;
}

HybridTrajectory simulate_error(const ImpulsiveSystem& sys, const GainSchedule& gains, const DwellSequence& dwell,
                                const Vector& e0, const InputFn& dc, const DiscreteInputFn& dd,
                                const JumpSelector& select, double h) {
  sys.validate();
  check_state(sys, e0, "e0");
  check_gains(sys, gains);
  const FlowData fd(sys);
  HybridTrajectory traj;
  auto f = [&](double t, double tau, const Vector& e) -> Vector {
    const Matrix Lc = gains.Lc(tau);
    return (fd.A(tau) - Lc * sys.Cc) * e + (fd.Ec(tau) - Lc * sys.Fc) * input_or_zero(dc, t, sys.pc());
  };
  auto jump = [&](int k, double, const Vector& e) -> Vector {
    const int j = select_map(sys, select, k);
    traj.jump_map.push_back(j);
    const Matrix& Ld = gains.Ld[j];
    return (sys.J[j] - Ld * sys.Cd) * e + (sys.Ed - Ld * sys.Fd) * input_or_zero(dd, k, sys.pd());
  };
  auto rec = [&](double t, Side side, const Vector& e) {
    traj.t.push_back(t);
    traj.side.push_back(side);
    traj.x.push_back(e);
  };
  integrate(dwell, h, e0, f, jump, rec);
  return traj;
}

FramingReport check_framing(const HybridTrajectory& traj) {
  if (traj.empty()) throw std::invalid_argument("check_framing: empty trajectory");
  if (!traj.has_observer()) throw std::invalid_argument("check_framing: trajectory has no observer samples");
  FramingReport r;
  r.lower_margin = r.upper_margin = kInf;
  double worst = kInf;
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const double lo = traj.e_lo(i).size() ? traj.e_lo(i).minCoeff() : kInf;
    const double hi = traj.e_hi(i).size() ? traj.e_hi(i).minCoeff() : kInf;
    r.lower_margin = std::min(r.lower_margin, lo);
    r.upper_margin = std::min(r.upper_margin, hi);
    if (std::min(lo, hi) < worst) {
      worst = std::min(lo, hi);
      r.worst_time = traj.t[i];
    }
  }
  r.samples = traj.size();
  r.passed = r.margin() >= -kFramingTol;
  return r;
}

void write_csv(std::ostream& os, const HybridTrajectory& traj) {
  const std::size_t n = traj.empty() ? 0 : static_cast<std::size_t>(traj.x.front().size());
  os << "t,side";
  for (std::size_t i = 1; i <= n; ++i) os << ",x" << i;
  if (traj.has_observer()) {
    for (std::size_t i = 1; i <= n; ++i) os << ",xm" << i;
    for (std::size_t i = 1; i <= n; ++i) os << ",xp" << i;
  }
  os << '\n';
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    os << ',' << buf;
  };
  for (std::size_t k = 0; k < traj.size(); ++k) {
    std::snprintf(buf, sizeof buf, "%.17g", traj.t[k]);
    os << buf << ',' << static_cast<char>(traj.side[k]);
    for (Eigen::Index i = 0; i < traj.x[k].size(); ++i) put(traj.x[k](i));
    if (traj.has_observer()) {
      for (Eigen::Index i = 0; i < traj.x_lo[k].size(); ++i) put(traj.x_lo[k](i));
      for (Eigen::Index i = 0; i < traj.x_hi[k].size(); ++i) put(traj.x_hi[k](i));
    }
    os << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const HybridTrajectory& traj) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_csv(os, traj);
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace ivobs

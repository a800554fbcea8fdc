#include "ivobs/cli.hpp"

#include "ivobs/report.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <iostream>
#include <random>
#include <sstream>

namespace ivobs {

namespace {

// A failure attributable to the inputs: exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Json base_report(const RunConfig& cfg) {
  Json j;
  j["tool"] = "ivobs";
  j["version"] = kVersion;
  j["config"] = config_to_json(cfg);
  return j;
}

Json dims_json(const ImpulsiveSystem& sys) {
  return {{"n", sys.n()}, {"pc", sys.pc()}, {"pd", sys.pd()}, {"qc", sys.qc()}, {"qd", sys.qd()},
          {"jump_maps", sys.J.size()}};
}

DwellSpec effective_dwell(const RunConfig& cfg, const ImpulsiveSystem& sys,
                          const std::optional<DwellSpec>& fallback = std::nullopt) {
  if (cfg.dwell) return parse_dwell(*cfg.dwell);
  if (sys.dwell) return *sys.dwell;
  if (fallback) return *fallback;
  throw UsageError("no dwell-time constraint: pass --dwell or add \"dwell\" to the system file");
}

Backend parse_backend(const std::string& s) {
  if (s == "handelman") return Backend::Handelman;
  if (s == "grid") return Backend::Grid;
  throw UsageError("unknown backend \"" + s + "\" (expected handelman or grid)");
}

void check_degrees(const RunConfig& cfg) {
  if (cfg.degree < 1 || cfg.max_degree < cfg.degree) throw UsageError("need 1 <= degree <= max-degree");
  if (cfg.grid_points < 2) throw UsageError("grid-points must be at least 2");
  if (!(cfg.eps > 0.0)) throw UsageError("eps must be positive");
}

std::filesystem::path prepare_out(const RunConfig& cfg) {
  std::filesystem::create_directories(cfg.out);
  return cfg.out;
}

Matrix optional_entry(const Json& j, const char* key, int rows, int cols) {
  if (!j.contains(key)) return Matrix::Zero(rows, cols);
  Matrix m = matrix_from_json(j.at(key), key);
  if (m.size() == 0) return Matrix::Zero(rows, cols);
  return m;
}

Matrix required_entry(const Json& j, const char* key) {
  if (!j.contains(key)) throw FormatError(std::string("field \"") + key + "\": missing");
  return matrix_from_json(j.at(key), key);
}

ImpulsiveSystem lift_from_json(const Json& j) {
  if (!j.is_object()) throw FormatError("lift input: top-level value must be an object");
  const std::string kind = j.value("kind", "");
  ImpulsiveSystem sys;
  if (kind == "switched") {
    if (!j.contains("modes") || !j.at("modes").is_array()) throw FormatError("field \"modes\": expected an array");
    std::vector<SwitchedMode> modes;
    for (const Json& m : j.at("modes")) {
      if (!m.is_object()) throw FormatError("field \"modes\": entries must be objects");
      SwitchedMode mode;
      mode.A = required_entry(m, "A");
      const int n = static_cast<int>(mode.A.rows());
      mode.E = optional_entry(m, "E", n, 0);
      mode.C = optional_entry(m, "C", 0, n);
      mode.F = optional_entry(m, "F", static_cast<int>(mode.C.rows()), static_cast<int>(mode.E.cols()));
      modes.push_back(std::move(mode));
    }
    sys = lift_switched(modes);
  } else if (kind == "sampled") {
    const Matrix A = required_entry(j, "A");
    const Matrix B = required_entry(j, "B");
    const Matrix Cy = required_entry(j, "Cy");
    const int n = static_cast<int>(A.rows());
    const Matrix E = optional_entry(j, "E", n, 0);
    const Matrix Fy = optional_entry(j, "Fy", static_cast<int>(Cy.rows()), static_cast<int>(E.cols()));
    sys = lift_sampled_data(A, B, E, Cy, Fy, required_entry(j, "K1"), required_entry(j, "K2"));
  } else {
    throw FormatError("field \"kind\": expected \"switched\" or \"sampled\"");
  }
  if (j.contains("dwell")) sys.dwell = dwell_from_json(j.at("dwell"));
  return sys;
}

double error_norm_at(const HybridTrajectory& traj, std::size_t i) {
  return std::max(traj.e_lo(i).lpNorm<Eigen::Infinity>(), traj.e_hi(i).lpNorm<Eigen::Infinity>());
}

}  // namespace

Json config_to_json(const RunConfig& cfg) {
  Json j;
  j["command"] = cfg.command;
  j["system"] = cfg.system.generic_string();
  j["dwell"] = cfg.dwell ? Json(*cfg.dwell) : Json(nullptr);
  j["backend"] = cfg.backend;
  j["degree"] = cfg.degree;
  j["max_degree"] = cfg.max_degree;
  j["grid_points"] = cfg.grid_points;
  j["eps"] = cfg.eps;
  j["seed"] = cfg.seed;
  j["horizon"] = cfg.horizon;
  j["step"] = cfg.step;
  j["out"] = cfg.out.generic_string();
  j["gains"] = cfg.gains ? Json(cfg.gains->generic_string()) : Json(nullptr);
  j["collapse_bounds"] = cfg.collapse_bounds;
  return j;
}

DwellSpec parse_dwell(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
  auto num = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw std::invalid_argument("dwell: \"" + s + "\" is not a number");
    return v;
  };
  if (parts.size() == 3 && parts[0] == "range") return DwellSpec::range(num(parts[1]), num(parts[2]));
  if (parts.size() == 2 && (parts[0] == "min" || parts[0] == "minimum")) return DwellSpec::minimum(num(parts[1]));
  throw std::invalid_argument("dwell: expected range:TMIN:TMAX or min:TBAR, got \"" + text + "\"");
}

int cmd_certify(const RunConfig& cfg) {
  check_degrees(cfg);
  const Backend backend = parse_backend(cfg.backend);
  const ImpulsiveSystem sys = load_system(cfg.system);
  const DwellSpec spec = effective_dwell(cfg, sys);
  const auto out = prepare_out(cfg);

  Json rep = base_report(cfg);
  rep["system"] = dims_json(sys);
  rep["dwell"] = dwell_to_json(spec);

  const PositivityReport pos = check_positivity(sys, linspace(0.0, spec.horizon(), 101));
  rep["positivity"] = positivity_to_json(pos);
  bool certified = pos.positive;

  if (pos.positive) {
    CertOptions copts;
    copts.eps = cfg.eps;
    const SpectralResult spectral = spec.is_range() ? certify_range_spectral(sys, spec.tmin(), spec.tmax(), copts)
                                                    : certify_min_spectral(sys, spec.tbar(), copts);
    rep["spectral"] = spectral_to_json(spectral);
    rep["box_bound"] = copts.bound;

    ClockResult clock;
    int tried = cfg.degree;
    for (int degree = cfg.degree; degree <= cfg.max_degree; degree += 2) {
      tried = degree;
      const Relaxation relax =
          backend == Backend::Grid ? Relaxation::grid(degree, cfg.grid_points) : Relaxation::handelman(degree);
      clock = spec.is_range() ? certify_range_clock(sys, spec.tmin(), spec.tmax(), relax, copts)
                              : certify_min_clock(sys, spec.tbar(), relax, copts);
      if (clock.certified()) break;
    }
    Json cj = clock_to_json(clock);
    cj["degree"] = tried;
    if (clock.certificate) cj["fine_grid_slack"] = number_or_null(clock_certificate_slack(sys, *clock.certificate));
    rep["clock"] = cj;
    certified = spectral.certified() && clock.certified();
  } else {
    rep["spectral"] = nullptr;
    rep["clock"] = nullptr;
    rep["message"] = "system is not positive; certificates not attempted";
  }
  rep["certified"] = certified;
  save_report(out / "certify_report.json", rep);
  std::cerr << "certify: " << (certified ? "certified" : "not certified") << " (" << spec.describe() << ")\n";
  return certified ? kExitOk : kExitNegative;
}

int cmd_synthesize(const RunConfig& cfg) {
  check_degrees(cfg);
  SynthOptions opts;
  opts.backend = parse_backend(cfg.backend);
  opts.degree = cfg.degree;
  opts.max_degree = cfg.max_degree;
  opts.grid_points = cfg.grid_points;
  opts.eps = cfg.eps;
  const ImpulsiveSystem sys = load_system(cfg.system);
  const DwellSpec spec = effective_dwell(cfg, sys);
  if (!sys.has_outputs()) throw UsageError("synthesis requires measured outputs (qc or qd >= 1)");
  const auto out = prepare_out(cfg);

  const DesignReport design = synthesize(sys, spec, opts);
  Json rep = base_report(cfg);
  rep["system"] = dims_json(sys);
  rep["dwell"] = dwell_to_json(spec);
  rep["design"] = design_report_to_json(design);
  rep["box_bound"] = opts.bound;
  save_report(out / "design_report.json", rep);
  if (design.ok()) save_report(out / "gains.json", gains_to_json(*design.gains));
  std::cerr << "synthesize: " << (design.ok() ? "feasible, verified" : design.message) << " [" << design.backend
            << "]\n";
  return design.ok() ? kExitOk : kExitNegative;
}

int cmd_simulate(const RunConfig& cfg) {
  const ImpulsiveSystem sys = load_system(cfg.system);
  const auto gains_path = cfg.gains.value_or(cfg.out / "gains.json");
  ObserverGains gains;
  try {
    gains = gains_from_json(read_json_file(gains_path));
  } catch (const FormatError& e) {
    throw FormatError(gains_path.string() + ": " + e.what());
  }
  const int n = sys.n();
  if (gains.X.rows() != n || gains.Uc.cols() != sys.qc() || gains.Ld.size() != sys.J.size() ||
      gains.Ld.front().cols() != sys.qd())
    throw UsageError("gains file does not match the system dimensions");
  if (!(cfg.horizon > 0.0)) throw UsageError("horizon must be positive");
  if (cfg.step < 0.0) throw UsageError("step must be nonnegative");
  const DwellSpec spec = effective_dwell(cfg, sys, gains.spec);
  const auto out = prepare_out(cfg);

  // Every random draw comes from this generator: dwell gaps first, then w_d.
  std::mt19937_64 rng(cfg.seed);
  DwellSequence dwell = gen_dwell(spec, cfg.horizon, rng);
  dwell.seed = cfg.seed;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<Vector> wd(dwell.impulses() + 1, Vector::Zero(sys.pd()));
  for (int k = 1; k <= dwell.impulses(); ++k)
    for (int i = 0; i < sys.pd(); ++i) wd[k](i) = unit(rng) - 0.5;

  PlantRun run;
  run.x0 = Vector::Ones(n);
  const int pc = sys.pc();
  run.wc = [pc](double t) { return Vector::Constant(pc, std::sin(t)); };
  run.wd = [wd](int k) { return wd.at(k); };

  DisturbanceBounds bounds = DisturbanceBounds::symmetric(pc, 1.0, sys.pd(), 0.5);
  Vector x0_lo = Vector::Zero(n);
  Vector x0_hi = Vector::Constant(n, 2.0);
  if (cfg.collapse_bounds) {
    bounds.wc_lo = bounds.wc_hi = run.wc;
    bounds.wd_lo = bounds.wd_hi = run.wd;
    x0_lo = x0_hi = run.x0;
  }

  const double h = cfg.step > 0.0 ? cfg.step : default_step(dwell);
  const HybridTrajectory traj = simulate_observer(sys, GainSchedule::from(gains), dwell, x0_lo, x0_hi, bounds, run, h);
  const FramingReport framing = check_framing(traj);
  write_csv(out / "trajectory.csv", traj);

  Json rep = base_report(cfg);
  rep["system"] = dims_json(sys);
  rep["dwell"] = dwell_to_json(spec);
  rep["step"] = h;
  rep["impulse_times"] = std::vector<double>(dwell.times.begin() + 1, dwell.times.end());
  rep["framing"] = framing_to_json(framing);
  rep["error_norm_t1"] = error_norm_at(traj, traj.index_at(std::min(1.0, cfg.horizon)));
  rep["error_norm_final"] = error_norm_at(traj, traj.size() - 1);
  save_report(out / "framing_report.json", rep);
  std::cerr << "simulate: framing " << (framing.passed ? "holds" : "violated") << ", margin " << framing.margin()
            << "\n";
  return framing.passed ? kExitOk : kExitNegative;
}

int cmd_lift(const RunConfig& cfg) {
  const ImpulsiveSystem sys = lift_from_json(read_json_file(cfg.system));
  const auto out = prepare_out(cfg);
  save_system(out / "lifted_system.json", sys);
  std::cerr << "lift: " << sys.n() << " states, " << sys.J.size() << " jump map(s)\n";
  return kExitOk;
}

int run_command(const RunConfig& cfg) {
  try {
    if (cfg.command == "certify") return cmd_certify(cfg);
    if (cfg.command == "synthesize") return cmd_synthesize(cfg);
    if (cfg.command == "simulate") return cmd_simulate(cfg);
    if (cfg.command == "lift") return cmd_lift(cfg);
    std::cerr << "error: unknown command \"" << cfg.command << "\"\n";
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const Json::exception& e) {
    std::cerr << "error: malformed JSON: " << e.what() << "\n";
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
  } catch (const std::exception& e) {
    // Numerical failures are a negative result, not a usage error.
    std::cerr << "failed: " << e.what() << "\n";
    return kExitNegative;
  }
  return kExitUsage;
}

int cli_main(int argc, const char* const* argv) {
  CLI::App app{"Dwell-time certificates and interval observers for positive impulsive systems", "ivobs"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  RunConfig cfg;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--system", cfg.system, "System (or lift description) JSON file")->required();
    sub->add_option("--dwell", cfg.dwell, "range:TMIN:TMAX or min:TBAR (default: from the system file)");
    sub->add_option("--out", cfg.out, "Output directory")->capture_default_str();
  };
  auto add_relax = [&](CLI::App* sub) {
    sub->add_option("--backend", cfg.backend, "handelman or grid")
        ->check(CLI::IsMember({"handelman", "grid"}))
        ->capture_default_str();
    sub->add_option("--degree", cfg.degree, "First polynomial degree tried")->capture_default_str();
    sub->add_option("--max-degree", cfg.max_degree, "Largest degree tried")->capture_default_str();
    sub->add_option("--grid-points", cfg.grid_points, "Sample points of the grid backend")->capture_default_str();
    sub->add_option("--eps", cfg.eps, "Decrease margin of the clock conditions")->capture_default_str();
  };

  auto* certify = app.add_subcommand("certify", "Dwell-time stability certificates for a system");
  add_common(certify);
  add_relax(certify);
  auto* synth = app.add_subcommand("synthesize", "Interval observer gain synthesis");
  add_common(synth);
  add_relax(synth);
  auto* sim = app.add_subcommand("simulate", "Simulate plant and observer with synthesized gains");
  add_common(sim);
  sim->add_option("--gains", cfg.gains, "Gains file (default: <out>/gains.json)");
  sim->add_option("--seed", cfg.seed, "Seed of the random generator")->capture_default_str();
  sim->add_option("--horizon", cfg.horizon, "Simulated time")->capture_default_str();
  sim->add_option("--step", cfg.step, "Integration step (0: automatic)")->capture_default_str();
  sim->add_flag("--collapse-bounds", cfg.collapse_bounds, "Use the true inputs and state as bounds");
  auto* lift = app.add_subcommand("lift", "Lift a switched or sampled-data description");
  add_common(lift);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }
  cfg.command = app.get_subcommands().front()->get_name();
  return run_command(cfg);
}

}  // namespace ivobs

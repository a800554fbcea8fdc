#include "ivobs/cli.hpp"
#include "ivobs/report.hpp"
#include "ivobs/sim.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <random>

namespace py = pybind11;
using namespace ivobs;

namespace {

// JSON crosses the boundary as text through Python's json module.
py::object to_python(const Json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

Json from_python(const py::object& o) {
  return Json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

Backend backend_of(const std::string& s) {
  if (s == "handelman") return Backend::Handelman;
  if (s == "grid") return Backend::Grid;
  throw std::invalid_argument("backend must be \"handelman\" or \"grid\"");
}

Relaxation relaxation_of(const std::string& backend, int degree, int grid_points) {
  return backend_of(backend) == Backend::Grid ? Relaxation::grid(degree, grid_points) : Relaxation::handelman(degree);
}

ImpulsiveSystem make_system(const Matrix& A, const std::vector<Matrix>& J, const std::optional<Matrix>& Ec,
                            const std::optional<Matrix>& Ed, const std::optional<Matrix>& Cc,
                            const std::optional<Matrix>& Fc, const std::optional<Matrix>& Cd,
                            const std::optional<Matrix>& Fd) {
  const long n = A.rows();
  const Matrix ec = Ec.value_or(Matrix::Zero(n, 0));
  const Matrix ed = Ed.value_or(Matrix::Zero(n, 0));
  const Matrix cc = Cc.value_or(Matrix::Zero(0, n));
  const Matrix cd = Cd.value_or(Matrix::Zero(0, n));
  return ImpulsiveSystem::make(A, ec, J, ed, cc, Fc.value_or(Matrix::Zero(cc.rows(), ec.cols())), cd,
                               Fd.value_or(Matrix::Zero(cd.rows(), ed.cols())));
}

py::dict spectral_dict(const SpectralResult& r) {
  py::dict d;
  d["status"] = to_string(r.status);
  d["certified"] = r.certified();
  if (r.certificate) {
    d["lambda"] = r.certificate->lambda;
    d["margin"] = r.certificate->margin;
  }
  return d;
}

py::dict clock_dict(const ImpulsiveSystem& sys, const ClockResult& r) {
  py::dict d = to_python(clock_to_json(r));
  if (r.certificate) d["fine_grid_slack"] = clock_certificate_slack(sys, *r.certificate);
  return d;
}

py::dict trajectory_dict(const HybridTrajectory& tr) {
  auto stack = [](const std::vector<Vector>& v) {
    Matrix m(v.size(), v.empty() ? 0 : v.front().size());
    for (std::size_t i = 0; i < v.size(); ++i) m.row(i) = v[i].transpose();
    return m;
  };
  std::string side;
  for (Side s : tr.side) side.push_back(static_cast<char>(s));
  py::dict d;
  d["t"] = Vector(Eigen::Map<const Vector>(tr.t.data(), tr.t.size()));
  d["side"] = side;
  d["x"] = stack(tr.x);
  if (tr.has_observer()) {
    d["x_lo"] = stack(tr.x_lo);
    d["x_hi"] = stack(tr.x_hi);
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Interval observers for linear impulsive systems under dwell-time constraints.";
  m.attr("__version__") = kVersion;

  py::register_exception<FormatError>(m, "FormatError", PyExc_ValueError);
  py::register_exception<LpNumericalError>(m, "LpNumericalError", PyExc_RuntimeError);
  py::register_exception<SimulationDiverged>(m, "SimulationDiverged", PyExc_RuntimeError);
  py::register_exception<GainRecoveryFailure>(m, "GainRecoveryFailure", PyExc_RuntimeError);

  py::class_<DwellSpec>(m, "DwellSpec")
      .def_static("range", &DwellSpec::range, py::arg("tmin"), py::arg("tmax"))
      .def_static("minimum", &DwellSpec::minimum, py::arg("tbar"))
      .def_property_readonly("is_range", &DwellSpec::is_range)
      .def_property_readonly("horizon", &DwellSpec::horizon)
      .def("admits", [](const DwellSpec& s, double gap) { return s.admits(gap); }, py::arg("gap"))
      .def("to_dict", [](const DwellSpec& s) { return to_python(dwell_to_json(s)); })
      .def("__eq__", [](const DwellSpec& a, const DwellSpec& b) { return a == b; })
      .def("__repr__", [](const DwellSpec& s) { return "DwellSpec(" + s.describe() + ")"; });

  py::class_<ImpulsiveSystem>(m, "System")
      .def(py::init(&make_system), py::arg("A"), py::arg("J"), py::arg("Ec") = py::none(),
           py::arg("Ed") = py::none(), py::arg("Cc") = py::none(), py::arg("Fc") = py::none(),
           py::arg("Cd") = py::none(), py::arg("Fd") = py::none(),
           "Constant flow matrix A, list of jump maps J, optional disturbance and output matrices.")
      .def_static("from_dict", [](const py::object& o) { return system_from_json(from_python(o)); })
      .def_static("load", [](const std::filesystem::path& p) { return load_system(p); }, py::arg("path"))
      .def("to_dict", [](const ImpulsiveSystem& s) { return to_python(system_to_json(s)); })
      .def("save", [](const ImpulsiveSystem& s, const std::filesystem::path& p) { save_system(p, s); })
      .def("A_at", &ImpulsiveSystem::A_at, py::arg("tau") = 0.0)
      .def_property_readonly("J", [](const ImpulsiveSystem& s) { return s.J; })
      .def_property_readonly("Ed", [](const ImpulsiveSystem& s) { return s.Ed; })
      .def_property_readonly("Cc", [](const ImpulsiveSystem& s) { return s.Cc; })
      .def_property_readonly("Cd", [](const ImpulsiveSystem& s) { return s.Cd; })
      .def_property_readonly("n", &ImpulsiveSystem::n)
      .def_property_readonly("pc", &ImpulsiveSystem::pc)
      .def_property_readonly("pd", &ImpulsiveSystem::pd)
      .def_property_readonly("qc", &ImpulsiveSystem::qc)
      .def_property_readonly("qd", &ImpulsiveSystem::qd)
      .def_property_readonly("dwell", [](const ImpulsiveSystem& s) { return s.dwell; });

  m.def(
      "check_positivity",
      [](const ImpulsiveSystem& sys, const std::vector<double>& grid) {
        return to_python(positivity_to_json(check_positivity(sys, grid)));
      },
      py::arg("system"), py::arg("tau_grid"));

  m.def(
      "transition_matrix", [](const Matrix& A, double T, int steps) { return transition_matrix(A, T, steps).value; },
      py::arg("A"), py::arg("T"), py::arg("steps") = 200, "RK4 transition matrix of x' = A x over [0, T].");

  m.def(
      "certify_spectral",
      [](const ImpulsiveSystem& sys, const DwellSpec& spec) {
        return spectral_dict(spec.is_range() ? certify_range_spectral(sys, spec.tmin(), spec.tmax())
                                             : certify_min_spectral(sys, spec.tbar()));
      },
      py::arg("system"), py::arg("dwell"));

  m.def(
      "certify_clock",
      [](const ImpulsiveSystem& sys, const DwellSpec& spec, const std::string& backend, int degree,
         int grid_points, double eps) {
        CertOptions opts;
        opts.eps = eps;
        const Relaxation relax = relaxation_of(backend, degree, grid_points);
        const ClockResult r = spec.is_range() ? certify_range_clock(sys, spec.tmin(), spec.tmax(), relax, opts)
                                              : certify_min_clock(sys, spec.tbar(), relax, opts);
        return clock_dict(sys, r);
      },
      py::arg("system"), py::arg("dwell"), py::arg("backend") = "handelman", py::arg("degree") = 4,
      py::arg("grid_points") = 20, py::arg("eps") = 1e-3);

  m.def(
      "iss_bound",
      [](const ImpulsiveSystem& sys, const DwellSpec& spec, double wc_sup, double wd_sup) {
        const double tmin = spec.is_range() ? spec.tmin() : spec.tbar();
        const double tmax = spec.is_range() ? spec.tmax() : spec.tbar();
        const SpectralResult cert = certify_range_spectral(sys, tmin, tmax);
        if (!cert.certified()) throw std::domain_error("iss_bound: no spectral certificate for this dwell range");
        const IssBound b = iss_bound(sys, *cert.certificate, wc_sup, wd_sup, tmin, tmax);
        py::dict d;
        d["epsilon"] = b.epsilon;
        d["mu"] = b.mu;
        d["ultimate"] = b.ultimate;
        d["lambda"] = cert.certificate->lambda;
        return d;
      },
      py::arg("system"), py::arg("dwell"), py::arg("wc_sup"), py::arg("wd_sup") = 0.0,
      "Ultimate bound on lambda'x at impulse instants; dwell must be a range (a minimum T is read as T fixed).");

  m.def(
      "synthesize",
      [](const ImpulsiveSystem& sys, const DwellSpec& spec, const std::string& backend, int degree, int max_degree,
         int grid_points, double eps) {
        SynthOptions opts;
        opts.backend = backend_of(backend);
        opts.degree = degree;
        opts.max_degree = max_degree;
        opts.grid_points = grid_points;
        opts.eps = eps;
        return to_python(design_report_to_json(synthesize(sys, spec, opts)));
      },
      py::arg("system"), py::arg("dwell"), py::arg("backend") = "handelman", py::arg("degree") = 4,
      py::arg("max_degree") = 10, py::arg("grid_points") = 20, py::arg("eps") = 1e-3,
      "Design report as a dict; report['gains'] holds the gains when report['ok'].");

  m.def(
      "observer_gain",
      [](const py::object& gains, double tau) { return gains_from_json(from_python(gains)).Lc(tau); },
      py::arg("gains"), py::arg("tau"), "Continuous gain L_c(tau) from a gains dict.");

  m.def(
      "gen_dwell",
      [](const DwellSpec& spec, double horizon, std::uint64_t seed) { return gen_dwell(spec, horizon, seed).times; },
      py::arg("dwell"), py::arg("horizon"), py::arg("seed"), "Impulse times, starting with t0 = 0.");

  m.def(
      "simulate_plant",
      [](const ImpulsiveSystem& sys, const std::vector<double>& times, double horizon, const Vector& x0,
         std::function<Vector(double)> wc, std::function<Vector(int)> wd, double step) {
        const DwellSequence seq = fixed_dwell(times, horizon);
        PlantRun run;
        run.x0 = x0;
        run.wc = std::move(wc);
        run.wd = std::move(wd);
        const HybridTrajectory tr = simulate_plant(sys, seq, run, step > 0.0 ? step : default_step(seq));
        return trajectory_dict(tr);
      },
      py::arg("system"), py::arg("impulse_times"), py::arg("horizon"), py::arg("x0"), py::arg("wc") = nullptr,
      py::arg("wd") = nullptr, py::arg("step") = 0.0);

  m.def(
      "simulate_observer",
      [](const ImpulsiveSystem& sys, const py::object& gains_dict, const std::vector<double>& times, double horizon,
         const Vector& x0, const Vector& x0_lo, const Vector& x0_hi, std::function<Vector(double)> wc,
         std::function<Vector(int)> wd, double wc_bound, double wd_bound, double step) {
        const ObserverGains gains = gains_from_json(from_python(gains_dict));
        const DwellSequence seq = fixed_dwell(times, horizon);
        PlantRun run;
        run.x0 = x0;
        run.wc = std::move(wc);
        run.wd = std::move(wd);
        const DisturbanceBounds bounds = DisturbanceBounds::symmetric(sys.pc(), wc_bound, sys.pd(), wd_bound);
        const HybridTrajectory tr = simulate_observer(sys, GainSchedule::from(gains), seq, x0_lo, x0_hi, bounds, run,
                                                      step > 0.0 ? step : default_step(seq));
        const FramingReport framing = check_framing(tr);
        py::dict d = trajectory_dict(tr);
        d["framing"] = to_python(framing_to_json(framing));
        return d;
      },
      py::arg("system"), py::arg("gains"), py::arg("impulse_times"), py::arg("horizon"), py::arg("x0"),
      py::arg("x0_lo"), py::arg("x0_hi"), py::arg("wc") = nullptr, py::arg("wd") = nullptr,
      py::arg("wc_bound") = 1.0, py::arg("wd_bound") = 0.5, py::arg("step") = 0.0,
      "Plant and interval observer under symmetric disturbance bounds, with the framing check.");

  m.def("lift_sampled_data", &lift_sampled_data, py::arg("A"), py::arg("B"), py::arg("E"), py::arg("Cy"),
        py::arg("Fy"), py::arg("K1"), py::arg("K2"));

  m.def(
      "lift_switched",
      [](const std::vector<std::tuple<Matrix, Matrix, Matrix, Matrix>>& modes) {
        std::vector<SwitchedMode> ms;
        for (const auto& [A, E, C, F] : modes) ms.push_back({A, E, C, F});
        return lift_switched(ms);
      },
      py::arg("modes"), "Modes given as (A, E, C, F) tuples.");
  m.def("switched_jump_index", &switched_jump_index, py::arg("num_modes"), py::arg("i"), py::arg("j"));

  m.def(
      "main",
      [](std::vector<std::string> args) {
        args.insert(args.begin(), "ivobs");
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        return cli_main(static_cast<int>(argv.size()), argv.data());
      },
      py::arg("args"), "Runs the command-line tool in-process and returns its exit code.");
}

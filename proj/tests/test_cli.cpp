#include "ivobs/cli.hpp"
#include "ivobs/io.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace ivobs;

namespace fs = std::filesystem;

namespace {

const fs::path kData = IVOBS_DATA_DIR;

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ivobs_test_cli" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "ivobs");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli_main(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path write_file(const fs::path& dir, const std::string& name, const std::string& text) {
  const fs::path p = dir / name;
  std::ofstream(p) << text;
  return p;
}

}  // namespace

TEST_CASE("parse_dwell") {
  CHECK(parse_dwell("range:1:2") == DwellSpec::range(1.0, 2.0));
  CHECK(parse_dwell("min:0.7") == DwellSpec::minimum(0.7));
  CHECK(parse_dwell("minimum:0.7") == DwellSpec::minimum(0.7));
  CHECK_THROWS_AS(parse_dwell("range:2:1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_dwell("min:abc"), std::invalid_argument);
  CHECK_THROWS_AS(parse_dwell("min:0.7x"), std::invalid_argument);
  CHECK_THROWS_AS(parse_dwell("periodic:1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_dwell(""), std::invalid_argument);
}

TEST_CASE("certify exit codes") {
  const fs::path out = fresh_dir("certify");
  CHECK(run({"certify", "--system", (kData / "two_state_min.json").string(), "--out", out.string()}) == kExitNegative);
  const Json rep = read_json_file(out / "certify_report.json");
  CHECK(rep["certified"] == false);
  CHECK(rep["positivity"]["positive"] == true);
  CHECK(rep["box_bound"] == 1e6);
  CHECK(rep["tool"] == "ivobs");
  CHECK(rep["version"] == kVersion);
  CHECK(rep["config"]["command"] == "certify");

  const fs::path sys = write_file(out, "diag.json", R"({
    "n": 2, "A": [[-1, 0], [0, -1]], "J": [[[0.5, 0], [0, 0.5]]],
    "dwell": {"kind": "range", "tmin": 1, "tmax": 2}})");
  CHECK(run({"certify", "--system", sys.string(), "--out", out.string()}) == kExitOk);
  CHECK(read_json_file(out / "certify_report.json")["certified"] == true);
  CHECK(run({"certify", "--system", (kData / "scalar_range.json").string(), "--out", out.string()}) == kExitOk);
  CHECK(run({"certify", "--system", (kData / "scalar_range.json").string(), "--backend", "grid", "--out",
             out.string()}) == kExitOk);

  CHECK(run({"certify", "--system", (out / "missing.json").string(), "--out", out.string()}) == kExitUsage);
  const fs::path broken = write_file(out, "broken.json", "{\"n\": 2,");
  CHECK(run({"certify", "--system", broken.string(), "--out", out.string()}) == kExitUsage);
}

TEST_CASE("synthesize exit codes") {
  const fs::path out = fresh_dir("synthesize");
  CHECK(run({"synthesize", "--system", (kData / "two_state_min.json").string(), "--backend", "grid", "--out",
             out.string()}) == kExitOk);
  CHECK(fs::exists(out / "gains.json"));
  const Json rep = read_json_file(out / "design_report.json");
  CHECK(rep["design"]["ok"] == true);
  CHECK(rep["design"]["degree"].get<int>() <= 10);
  CHECK(rep["box_bound"] == 1e6);
  CHECK(rep["config"]["backend"] == "grid");

  CHECK(run({"synthesize", "--system", (kData / "scalar_range.json").string(), "--out", out.string()}) ==
        kExitUsage);

  const fs::path blind = write_file(out, "blind.json", R"({
    "n": 2, "qc": 1, "qd": 1,
    "A": [[1, 0], [0, 1]], "J": [[[2, 0], [0, 2]]],
    "Cc": [[0, 0]], "Cd": [[0, 0]],
    "dwell": {"kind": "range", "tmin": 0.5, "tmax": 1}})");
  const fs::path bout = fresh_dir("synthesize_blind");
  CHECK(run({"synthesize", "--system", blind.string(), "--out", bout.string()}) == kExitNegative);
  CHECK_FALSE(fs::exists(bout / "gains.json"));
  CHECK(read_json_file(bout / "design_report.json")["design"]["feasible"] == false);

  CHECK(run({"synthesize", "--system", (kData / "two_state_min.json").string(), "--backend", "simplex", "--out",
             out.string()}) == kExitUsage);
  CHECK(run({"synthesize", "--system", (kData / "two_state_min.json").string(), "--degree", "6", "--max-degree",
             "4", "--out", out.string()}) == kExitUsage);
}

TEST_CASE("simulate exit codes") {
  const fs::path out = fresh_dir("simulate");
  const std::string sys = (kData / "two_state_min.json").string();
  REQUIRE(run({"synthesize", "--system", sys, "--out", out.string()}) == kExitOk);
  CHECK(run({"simulate", "--system", sys, "--out", out.string(), "--seed", "1"}) == kExitOk);
  CHECK(fs::exists(out / "trajectory.csv"));
  const Json rep = read_json_file(out / "framing_report.json");
  CHECK(rep["framing"]["passed"] == true);
  CHECK(rep["framing"]["margin"].get<double>() >= -1e-9);
  CHECK(rep["config"]["seed"] == 1);
  CHECK(rep["error_norm_final"].get<double>() < rep["error_norm_t1"].get<double>());
  CHECK(slurp(out / "trajectory.csv").rfind("t,side,x1,x2,xm1,xm2,xp1,xp2\n", 0) == 0);

  CHECK(run({"simulate", "--system", sys, "--out", out.string(), "--collapse-bounds"}) == kExitOk);
  const double m = read_json_file(out / "framing_report.json")["framing"]["margin"].get<double>();
  CHECK(std::abs(m) <= 1e-9);

  const fs::path scalar_out = fresh_dir("simulate_scalar");
  const fs::path scalar_sys = write_file(scalar_out, "scalar.json", R"({
    "n": 1, "pc": 0, "pd": 0, "qc": 1, "qd": 1,
    "A": [[1]], "J": [[[2]]], "Cc": [[1]], "Cd": [[1]],
    "dwell": {"kind": "range", "tmin": 1, "tmax": 1}})");
  REQUIRE(run({"synthesize", "--system", scalar_sys.string(), "--out", scalar_out.string()}) == kExitOk);
  CHECK(run({"simulate", "--system", sys, "--gains", (scalar_out / "gains.json").string(), "--out", out.string()}) ==
        kExitUsage);
  CHECK(run({"simulate", "--system", sys, "--gains", (out / "nope.json").string(), "--out", out.string()}) ==
        kExitUsage);
}

TEST_CASE("identical configuration gives identical outputs") {
  const fs::path out = fresh_dir("determinism");
  const std::string sys = (kData / "two_state_min.json").string();
  auto once = [&] {
    REQUIRE(run({"synthesize", "--system", sys, "--out", out.string()}) == kExitOk);
    REQUIRE(run({"simulate", "--system", sys, "--out", out.string(), "--seed", "5", "--horizon", "8"}) == kExitOk);
    return std::vector<std::string>{slurp(out / "design_report.json"), slurp(out / "gains.json"),
                                    slurp(out / "trajectory.csv"), slurp(out / "framing_report.json")};
  };
  const auto first = once();
  const auto second = once();
  CHECK(first == second);

  REQUIRE(run({"simulate", "--system", sys, "--out", out.string(), "--seed", "6", "--horizon", "8"}) == kExitOk);
  CHECK(slurp(out / "trajectory.csv") != first[2]);
}

TEST_CASE("lift") {
  const fs::path out = fresh_dir("lift");
  CHECK(run({"lift", "--system", (kData / "switched_two_mode.json").string(), "--out", out.string()}) == kExitOk);
  const ImpulsiveSystem sw = load_system(out / "lifted_system.json");
  CHECK(sw.n() == 2);
  REQUIRE(sw.J.size() == 2);
  Matrix J12(2, 2), J21(2, 2);
  J12 << 0, 1, 0, 0;
  J21 << 0, 0, 1, 0;
  CHECK(sw.J[switched_jump_index(2, 0, 1)] == J12);
  CHECK(sw.J[switched_jump_index(2, 1, 0)] == J21);

  CHECK(run({"lift", "--system", (kData / "sampled_scalar.json").string(), "--out", out.string()}) == kExitOk);
  const ImpulsiveSystem sd = load_system(out / "lifted_system.json");
  Matrix flow(2, 2), jump(2, 2);
  flow << -1, 1, 0, 0;
  jump << 1, 0, -0.5, 0;
  CHECK(sd.A.eval(0.0) == flow);
  CHECK(sd.J[0] == jump);

  const fs::path single = write_file(out, "single.json", R"({
    "kind": "switched", "modes": [{"A": [[-1]], "E": [[1]], "C": [[1]], "F": [[0]]}]})");
  CHECK(run({"lift", "--system", single.string(), "--out", out.string()}) == kExitUsage);
  const fs::path unknown = write_file(out, "unknown.json", R"({"kind": "hybrid"})");
  CHECK(run({"lift", "--system", unknown.string(), "--out", out.string()}) == kExitUsage);
}

TEST_CASE("command line errors") {
  CHECK(run({}) == kExitUsage);
  CHECK(run({"frobnicate"}) == kExitUsage);
  CHECK(run({"certify"}) == kExitUsage);
  CHECK(run({"certify", "--system", (kData / "scalar_range.json").string(), "--degree", "x"}) == kExitUsage);
  CHECK(run({"certify", "--system", (kData / "scalar_range.json").string(), "--dwell", "range:2"}) == kExitUsage);
  CHECK(run({"--version"}) == kExitOk);
}

TEST_CASE("config echo") {
  RunConfig cfg;
  cfg.command = "simulate";
  cfg.system = "sys.json";
  cfg.dwell = "min:0.7";
  cfg.seed = 17;
  const Json j = config_to_json(cfg);
  CHECK(j["command"] == "simulate");
  CHECK(j["system"] == "sys.json");
  CHECK(j["dwell"] == "min:0.7");
  CHECK(j["seed"] == 17);
  CHECK(j["backend"] == "handelman");
  CHECK(j["degree"] == 4);
  CHECK(j["max_degree"] == 10);
  CHECK(j["eps"] == 1e-3);
  CHECK(j.contains("horizon"));
  CHECK(j.contains("step"));
  CHECK(j.contains("out"));
}

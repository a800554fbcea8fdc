#include "ivobs/io.hpp"
#include "ivobs/report.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace ivobs;

namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "ivobs_test_io";
  fs::create_directories(dir);
  return dir / name;
}

Json two_state_json() { return read_json_file(fs::path(IVOBS_DATA_DIR) / "two_state_min.json"); }

}  // namespace

TEST_CASE("system file round trip") {
  const ImpulsiveSystem sys = load_system(fs::path(IVOBS_DATA_DIR) / "two_state_min.json");
  CHECK(sys.n() == 2);
  CHECK(sys.J.size() == 1);
  REQUIRE(sys.dwell.has_value());
  CHECK(sys.dwell->is_minimum());
  CHECK(sys.dwell->tbar() == 0.7);
  CHECK(sys.A.eval(0.0)(1, 0) == 1.0);

  const fs::path p = scratch("roundtrip.json");
  save_system(p, sys);
  CHECK(load_system(p) == sys);

  ImpulsiveSystem tv = sys;
  tv.A(0, 0) = Poly({-1.0, 0.5, -0.25});
  save_system(p, tv);
  CHECK(load_system(p) == tv);
}

TEST_CASE("malformed system files name the problem") {
  Json j = two_state_json();
  j.erase("J");
  try {
    system_from_json(j);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("\"J\"") != std::string::npos);
  }

  Json ragged = two_state_json();
  ragged["A"] = Json::parse("[[-1, 0], [1]]");
  try {
    system_from_json(ragged);
    FAIL("expected FormatError");
  } catch (const FormatError& e) {
    CHECK(std::string(e.what()).find("non-rectangular") != std::string::npos);
  }

  Json shape = two_state_json();
  shape["Ec"] = Json::parse("[[0.1], [0.1], [0.1]]");
  CHECK_THROWS_AS(system_from_json(shape), FormatError);

  Json dims = two_state_json();
  dims["n"] = -2;
  CHECK_THROWS_AS(system_from_json(dims), FormatError);

  const fs::path bad = scratch("bad.json");
  std::ofstream(bad) << "{ \"n\": 2, ";
  CHECK_THROWS_AS(load_system(bad), FormatError);
  CHECK_THROWS_AS(load_system(scratch("does_not_exist.json")), FormatError);
}

TEST_CASE("analysis-only systems may omit output matrices") {
  const ImpulsiveSystem sys = load_system(fs::path(IVOBS_DATA_DIR) / "scalar_range.json");
  CHECK(sys.n() == 1);
  CHECK(sys.qc() == 0);
  CHECK(sys.qd() == 0);
  CHECK_FALSE(sys.has_outputs());
  CHECK(sys.dwell->is_range());
}

TEST_CASE("dwell json") {
  CHECK(dwell_from_json(dwell_to_json(DwellSpec::range(0.5, 1.5))) == DwellSpec::range(0.5, 1.5));
  CHECK(dwell_from_json(dwell_to_json(DwellSpec::minimum(0.7))) == DwellSpec::minimum(0.7));
  CHECK_THROWS_AS(dwell_from_json(Json::parse(R"({"kind": "range", "tmin": 2, "tmax": 1})")), FormatError);
  CHECK_THROWS_AS(dwell_from_json(Json::parse(R"({"kind": "periodic"})")), FormatError);
}

TEST_CASE("gains json round trip") {
  ObserverGains g;
  g.X = PolyMatrix::diagonal({Poly({1.0, 0.5}), Poly({2.0, -0.1, 0.01})});
  g.Uc = PolyMatrix(2, 1);
  g.Uc(0, 0) = Poly({0.3, 0.2});
  g.Uc(1, 0) = Poly({1.0});
  g.Ud = {Matrix::Constant(2, 1, 0.4)};
  g.Ld = {Matrix::Constant(2, 1, 0.2)};
  g.spec = DwellSpec::minimum(0.7);
  g.alpha = 3.0;
  g.eps = 1e-3;
  const ObserverGains back = gains_from_json(Json::parse(gains_to_json(g).dump()));
  CHECK(back.X == g.X);
  CHECK(back.Uc == g.Uc);
  CHECK(back.Ud == g.Ud);
  CHECK(back.Ld == g.Ld);
  CHECK(back.spec == g.spec);
  CHECK(back.alpha == g.alpha);

  Json broken = gains_to_json(g);
  broken["Ld"] = Json::array();
  CHECK_THROWS_AS(gains_from_json(broken), FormatError);
  broken = gains_to_json(g);
  broken["n"] = 3;
  CHECK_THROWS_AS(gains_from_json(broken), FormatError);
}

TEST_CASE("non-finite report values become null") {
  CHECK(number_or_null(std::numeric_limits<double>::infinity()).is_null());
  CHECK(number_or_null(1.5) == Json(1.5));
  DesignReport rep;
  rep.margins.ec = std::numeric_limits<double>::infinity();
  const Json j = design_report_to_json(rep);
  CHECK(j["margins"]["ec"].is_null());
  CHECK(j["gains"].is_null());
  CHECK(j["ok"] == false);
}

TEST_CASE("save_report writes pretty JSON") {
  const fs::path p = scratch("report.json");
  save_report(p, Json{{"a", 1}});
  CHECK(read_json_file(p) == Json{{"a", 1}});
  CHECK_THROWS(save_report(fs::path("/nonexistent_dir_xyz/report.json"), Json{}));
}

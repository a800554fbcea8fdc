#include "ivobs/io.hpp"

#include <fstream>
#include <sstream>

namespace ivobs {

namespace {

[[noreturn]] void fail(const std::string& field, const std::string& what) {
  throw FormatError("field \"" + field + "\": " + what);
}

int dim_field(const Json& j, const char* key, bool required) {
  if (!j.contains(key)) {
    if (required) fail(key, "missing");
    return -1;
  }
  const Json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) fail(key, "expected a nonnegative integer");
  return v.get<int>();
}

void expect_shape(const std::string& field, Eigen::Index rows, Eigen::Index cols, int want_rows,
                  int want_cols) {
  if (rows != want_rows || cols != want_cols) {
    std::ostringstream os;
    os << "shape " << rows << "x" << cols << ", expected " << want_rows << "x" << want_cols;
    fail(field, os.str());
  }
}

Matrix optional_matrix(const Json& j, const char* key, int rows, int cols) {
  if (!j.contains(key)) {
    if (rows == 0 || cols == 0) return Matrix::Zero(rows, cols);
    fail(key, "missing");
  }
  Matrix m = matrix_from_json(j.at(key), key);
  if (m.size() == 0 && (rows == 0 || cols == 0)) return Matrix::Zero(rows, cols);
  expect_shape(key, m.rows(), m.cols(), rows, cols);
  return m;
}

PolyMatrix optional_polymat(const Json& j, const char* key, int rows, int cols) {
  if (!j.contains(key)) {
    if (rows == 0 || cols == 0) return PolyMatrix(rows, cols);
    fail(key, "missing");
  }
  PolyMatrix m = polymat_from_json(j.at(key), key);
  if ((m.rows() == 0 || m.cols() == 0) && (rows == 0 || cols == 0)) return PolyMatrix(rows, cols);
  expect_shape(key, m.rows(), m.cols(), rows, cols);
  return m;
}

}  // namespace

Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    out.push_back(std::move(row));
  }
  return out;
}

Matrix matrix_from_json(const Json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "expected an array of rows");
  if (j.empty()) return Matrix(0, 0);
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  Matrix m;
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[i];
    if (!row.is_array()) fail(field, "row " + std::to_string(i) + " is not an array");
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      m.resize(rows, cols);
    } else if (static_cast<Eigen::Index>(row.size()) != cols) {
      fail(field, "row " + std::to_string(i) + " has " + std::to_string(row.size()) +
                      " entries, expected " + std::to_string(cols) + " (non-rectangular matrix)");
    }
    for (Eigen::Index k = 0; k < cols; ++k) {
      if (!row[k].is_number())
        fail(field, "entry (" + std::to_string(i) + "," + std::to_string(k) + ") is not a number");
      m(i, k) = row[k].get<double>();
    }
  }
  return m;
}

Json poly_to_json(const Poly& p) { return Json(p.coeffs()); }

Json polymat_to_json(const PolyMatrix& m) {
  const bool constant = m.is_constant();
  Json out = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int k = 0; k < m.cols(); ++k) {
      if (constant)
        row.push_back(m(i, k).coeff(0));
      else
        row.push_back(poly_to_json(m(i, k)));
    }
    out.push_back(std::move(row));
  }
  return out;
}

PolyMatrix polymat_from_json(const Json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "expected an array of rows");
  if (j.empty()) return PolyMatrix(0, 0);
  const int rows = static_cast<int>(j.size());
  int cols = -1;
  PolyMatrix m;
  for (int i = 0; i < rows; ++i) {
    const Json& row = j[i];
    if (!row.is_array()) fail(field, "row " + std::to_string(i) + " is not an array");
    if (cols < 0) {
      cols = static_cast<int>(row.size());
      m = PolyMatrix(rows, cols);
    } else if (static_cast<int>(row.size()) != cols) {
      fail(field, "row " + std::to_string(i) + " has " + std::to_string(row.size()) +
                      " entries, expected " + std::to_string(cols) + " (non-rectangular matrix)");
    }
    for (int k = 0; k < cols; ++k) {
      const Json& e = row[k];
      const std::string where = "entry (" + std::to_string(i) + "," + std::to_string(k) + ")";
      if (e.is_number()) {
        m(i, k) = Poly::constant(e.get<double>());
      } else if (e.is_array() && !e.empty()) {
        std::vector<double> coeffs;
        for (const auto& c : e) {
          if (!c.is_number()) fail(field, where + " has a non-numeric coefficient");
          coeffs.push_back(c.get<double>());
        }
        m(i, k) = Poly(std::move(coeffs));
      } else {
        fail(field, where + " must be a number or a coefficient array");
      }
    }
  }
  return m;
}

Json dwell_to_json(const DwellSpec& spec) {
  if (spec.is_range()) return {{"kind", "range"}, {"tmin", spec.tmin()}, {"tmax", spec.tmax()}};
  return {{"kind", "minimum"}, {"tbar", spec.tbar()}};
}

DwellSpec dwell_from_json(const Json& j) {
  if (!j.is_object()) fail("dwell", "expected an object");
  const std::string kind = j.value("kind", "");
  auto num = [&](const char* key) {
    if (!j.contains(key) || !j.at(key).is_number()) fail(std::string("dwell.") + key, "missing or not a number");
    return j.at(key).get<double>();
  };
  try {
    if (kind == "range") return DwellSpec::range(num("tmin"), num("tmax"));
    if (kind == "minimum") return DwellSpec::minimum(num("tbar"));
  } catch (const std::invalid_argument& e) {
    fail("dwell", e.what());
  }
  fail("dwell.kind", "expected \"range\" or \"minimum\"");
}

ImpulsiveSystem system_from_json(const Json& j) {
  if (!j.is_object()) throw FormatError("system file: top-level value must be an object");
  const int n = dim_field(j, "n", true);
  if (n < 1) fail("n", "must be at least 1");

  auto infer = [&](const char* key, const char* mat, bool by_cols) {
    const int given = dim_field(j, key, false);
    if (given >= 0) return given;
    if (!j.contains(mat)) return 0;
    const Json& m = j.at(mat);
    if (!m.is_array() || m.empty()) return 0;
    if (!by_cols) return static_cast<int>(m.size());
    return m[0].is_array() ? static_cast<int>(m[0].size()) : 0;
  };
  const int pc = infer("pc", "Ec", true);
  const int pd = infer("pd", "Ed", true);
  const int qc = infer("qc", "Cc", false);
  const int qd = infer("qd", "Cd", false);

  ImpulsiveSystem sys;
  if (!j.contains("A")) fail("A", "missing");
  sys.A = polymat_from_json(j.at("A"), "A");
  expect_shape("A", sys.A.rows(), sys.A.cols(), n, n);
  sys.Ec = optional_polymat(j, "Ec", n, pc);

  if (!j.contains("J")) fail("J", "missing");
  const Json& jumps = j.at("J");
  if (!jumps.is_array() || jumps.empty()) fail("J", "expected a nonempty array of jump matrices");
  for (std::size_t k = 0; k < jumps.size(); ++k) {
    const std::string name = "J[" + std::to_string(k) + "]";
    Matrix Jk = matrix_from_json(jumps[k], name);
    expect_shape(name, Jk.rows(), Jk.cols(), n, n);
    sys.J.push_back(std::move(Jk));
  }
  sys.Ed = optional_matrix(j, "Ed", n, pd);
  sys.Cc = optional_matrix(j, "Cc", qc, n);
  sys.Fc = optional_matrix(j, "Fc", qc, pc);
  sys.Cd = optional_matrix(j, "Cd", qd, n);
  sys.Fd = optional_matrix(j, "Fd", qd, pd);
  if (j.contains("dwell") && !j.at("dwell").is_null()) sys.dwell = dwell_from_json(j.at("dwell"));

  try {
    sys.validate();
  } catch (const std::invalid_argument& e) {
    throw FormatError(e.what());
  }
  return sys;
}

Json system_to_json(const ImpulsiveSystem& sys) {
  Json j;
  j["n"] = sys.n();
  j["pc"] = sys.pc();
  j["pd"] = sys.pd();
  j["qc"] = sys.qc();
  j["qd"] = sys.qd();
  j["A"] = polymat_to_json(sys.A);
  if (sys.pc() > 0) j["Ec"] = polymat_to_json(sys.Ec);
  Json jumps = Json::array();
  for (const auto& J : sys.J) jumps.push_back(matrix_to_json(J));
  j["J"] = std::move(jumps);
  if (sys.pd() > 0) j["Ed"] = matrix_to_json(sys.Ed);
  if (sys.qc() > 0) j["Cc"] = matrix_to_json(sys.Cc);
  if (sys.qc() > 0 && sys.pc() > 0) j["Fc"] = matrix_to_json(sys.Fc);
  if (sys.qd() > 0) j["Cd"] = matrix_to_json(sys.Cd);
  if (sys.qd() > 0 && sys.pd() > 0) j["Fd"] = matrix_to_json(sys.Fd);
  if (sys.dwell) j["dwell"] = dwell_to_json(*sys.dwell);
  return j;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

ImpulsiveSystem load_system(const std::filesystem::path& path) {
  const Json j = read_json_file(path);
  try {
    return system_from_json(j);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void save_system(const std::filesystem::path& path, const ImpulsiveSystem& sys) {
  save_report(path, system_to_json(sys));
}

void save_report(const std::filesystem::path& path, const Json& report) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << report.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace ivobs

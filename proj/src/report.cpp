#include "ivobs/report.hpp"

#include <cmath>

namespace ivobs {

namespace {

const Json& field(const Json& j, const char* key) {
  if (!j.contains(key)) throw FormatError(std::string("gains: field \"") + key + "\" missing");
  return j.at(key);
}

double number(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number()) throw FormatError(std::string("gains: field \"") + key + "\" is not a number");
  return v.get<double>();
}

std::vector<Matrix> matrix_list(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_array()) throw FormatError(std::string("gains: field \"") + key + "\" must be a list of matrices");
  std::vector<Matrix> out;
  for (std::size_t k = 0; k < v.size(); ++k) out.push_back(matrix_from_json(v[k], key + ("[" + std::to_string(k) + "]")));
  return out;
}

}  // namespace

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json gains_to_json(const ObserverGains& g) {
  Json j;
  j["n"] = g.X.rows();
  j["qc"] = g.Uc.cols();
  j["qd"] = g.Ud.empty() ? 0 : static_cast<int>(g.Ud.front().cols());
  j["dwell"] = dwell_to_json(g.spec);
  j["alpha"] = g.alpha;
  j["eps"] = g.eps;
  j["delta_x"] = g.delta_x;
  j["X"] = polymat_to_json(g.X);
  j["Uc"] = polymat_to_json(g.Uc);
  j["Ud"] = Json::array();
  for (const auto& m : g.Ud) j["Ud"].push_back(matrix_to_json(m));
  j["Ld"] = Json::array();
  for (const auto& m : g.Ld) j["Ld"].push_back(matrix_to_json(m));
  return j;
}

ObserverGains gains_from_json(const Json& j) {
  if (!j.is_object()) throw FormatError("gains: top-level value must be an object");
  ObserverGains g;
  const int n = field(j, "n").get<int>();
  const int qc = field(j, "qc").get<int>();
  const int qd = field(j, "qd").get<int>();
  if (n < 1 || qc < 0 || qd < 0) throw FormatError("gains: bad dimensions");
  g.spec = dwell_from_json(field(j, "dwell"));
  g.alpha = number(j, "alpha");
  g.eps = number(j, "eps");
  g.delta_x = number(j, "delta_x");
  g.X = polymat_from_json(field(j, "X"), "X");
  g.Uc = qc == 0 ? PolyMatrix(n, 0) : polymat_from_json(field(j, "Uc"), "Uc");
  g.Ud = matrix_list(j, "Ud");
  g.Ld = matrix_list(j, "Ld");

  if (g.X.rows() != n || g.X.cols() != n) throw FormatError("gains: X must be n x n");
  if (g.Uc.rows() != n || g.Uc.cols() != qc) throw FormatError("gains: Uc must be n x qc");
  if (g.Ud.size() != g.Ld.size() || g.Ld.empty()) throw FormatError("gains: Ud and Ld need one entry per jump map");
  for (auto* list : {&g.Ud, &g.Ld})
    for (auto& m : *list) {
      if (qd == 0 && m.size() == 0) m = Matrix::Zero(n, 0);
      if (m.rows() != n || m.cols() != qd) throw FormatError("gains: Ud/Ld entries must be n x qd");
    }
  return g;
}

Json margins_to_json(const DesignMargins& m) {
  return {{"metzler", number_or_null(m.metzler)}, {"ec", number_or_null(m.ec)},
          {"jump", number_or_null(m.jump)},       {"ed", number_or_null(m.ed)},
          {"spectral", number_or_null(m.spectral)}, {"x_min", number_or_null(m.x_min)}};
}

Json design_report_to_json(const DesignReport& rep) {
  Json j;
  j["feasible"] = rep.feasible;
  j["verified"] = rep.verified;
  j["ok"] = rep.ok();
  j["backend"] = rep.backend;
  j["degree"] = rep.degree;
  j["lp_variables"] = rep.lp_variables;
  j["lp_constraints"] = rep.lp_constraints;
  j["certificate_slack"] = number_or_null(rep.certificate_slack);
  j["margins"] = margins_to_json(rep.margins);
  j["violations"] = rep.violations;
  j["message"] = rep.message;
  j["gains"] = rep.gains ? gains_to_json(*rep.gains) : Json(nullptr);
  return j;
}

Json spectral_to_json(const SpectralResult& res) {
  Json j;
  j["status"] = to_string(res.status);
  if (res.certificate) {
    j["lambda"] = std::vector<double>(res.certificate->lambda.begin(), res.certificate->lambda.end());
    j["margin"] = number_or_null(res.certificate->margin);
    j["theta_samples"] = res.certificate->theta_grid.size();
  }
  return j;
}

Json clock_to_json(const ClockResult& res) {
  Json j;
  j["status"] = to_string(res.status);
  j["lp_variables"] = res.lp_variables;
  j["lp_constraints"] = res.lp_constraints;
  if (res.certificate) {
    const ClockCertificate& c = *res.certificate;
    j["backend"] = c.relaxation.tag();
    j["eps"] = c.eps;
    j["zeta"] = polymat_to_json(c.zeta);
    j["worst_slack"] = number_or_null(c.worst_slack);
  }
  return j;
}

Json positivity_to_json(const PositivityReport& rep) {
  return {{"positive", rep.positive},
          {"metzler_margin", number_or_null(rep.metzler_margin)},
          {"ec_min", number_or_null(rep.ec_min)},
          {"jump_min", number_or_null(rep.jump_min)},
          {"ed_min", number_or_null(rep.ed_min)}};
}

Json framing_to_json(const FramingReport& rep) {
  return {{"passed", rep.passed},
          {"margin", number_or_null(rep.margin())},
          {"lower_margin", number_or_null(rep.lower_margin)},
          {"upper_margin", number_or_null(rep.upper_margin)},
          {"worst_time", rep.worst_time},
          {"samples", rep.samples},
          {"tolerance", kFramingTol}};
}

}  // namespace ivobs

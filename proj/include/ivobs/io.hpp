#pragma once

#include "ivobs/systems.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>

namespace ivobs {

/// Malformed input file; the message names the offending field or position.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Json = nlohmann::json;

/*
 * System file layout (UTF-8 JSON):
 *
 *   { "n": 2, "pc": 1, "pd": 1, "qc": 1, "qd": 1,
 *     "A": [[-1, 0], [1, -2]], "Ec": [[0.1], [0.1]],
 *     "J": [ [[2, 1], [1, 3]] ], "Ed": [[0.3], [0.3]],
 *     "Cc": [[0, 1]], "Fc": [[0.03]], "Cd": [[0, 1]], "Fd": [[0.03]],
 *     "dwell": {"kind": "minimum", "tbar": 0.7} }
 *
 * Entries of A and Ec may be coefficient arrays (ascending powers of tau)
 * instead of numbers. Matrices with a zero dimension may be omitted.
 */
ImpulsiveSystem system_from_json(const Json& j);
Json system_to_json(const ImpulsiveSystem& sys);

ImpulsiveSystem load_system(const std::filesystem::path& path);
void save_system(const std::filesystem::path& path, const ImpulsiveSystem& sys);

Json read_json_file(const std::filesystem::path& path);
/// Writes pretty-printed JSON followed by a newline.
void save_report(const std::filesystem::path& path, const Json& report);

Json matrix_to_json(const Matrix& m);
/// Parses a rectangular nested array; field names the key for diagnostics.
Matrix matrix_from_json(const Json& j, const std::string& field);

Json poly_to_json(const Poly& p);
Json polymat_to_json(const PolyMatrix& m);
PolyMatrix polymat_from_json(const Json& j, const std::string& field);

Json dwell_to_json(const DwellSpec& spec);
DwellSpec dwell_from_json(const Json& j);

}  // namespace ivobs

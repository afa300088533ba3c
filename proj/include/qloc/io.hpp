#pragma once

// JSON input for chains, states and elements, and the report envelope.
//
// Matrices are nested rows whose entries are [re, im] pairs or plain numbers.

#include <filesystem>
#include <string>

#include <json.hpp>

#include "qloc/algebra.hpp"
#include "qloc/states.hpp"

namespace qloc {

using Json = nlohmann::json;

inline constexpr int kReportSchemaVersion = 1;

/// Parses a file; syntax errors become InputError with file, line and column.
Json load_json_file(const std::filesystem::path& path);
Json parse_json_text(const std::string& text, const std::string& origin);

Json complex_to_json(cplx z);
cplx complex_from_json(const Json& j, const std::string& field);
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& j, const std::string& field);
Vector vector_from_json(const Json& j, const std::string& field);
Json vector_to_json(const Vector& v);

/// {"n_sites": n, "site_dim": d}
NetConfig net_from_json(const Json& j);
Json net_to_json(const NetConfig& c);

/// {"type": "product", "sites": [ρ_0, ...]}, {"type": "density", "matrix": F}
/// or {"type": "vector", "vector": ψ}.
Functional state_from_json(const Json& j, const NetConfig& config);

/// Pauli text ("0.5 X0 Z2 + Y1") or {"region": "0,1", "matrix": M}.
Element element_from_json(const Json& j, const NetConfig& config);
/// Text given on the command line: JSON if it starts with '{', Pauli text otherwise.
Element element_from_text(const std::string& text, const NetConfig& config);

/// Named pass/fail line with its evidence.
struct Verdict {
  std::string name;
  bool pass = false;
  double value = 0.0;
  std::string relation;  // "<=", ">=", "==", "in"
  Json tolerance;
};

Json verdict_to_json(const Verdict& v);

/// Report envelope; wall_time is the only field excluded from determinism checks.
struct Report {
  std::string analysis;
  Json inputs = Json::object();
  Json results = Json::object();
  Json series = Json::object();  // name -> {"columns": [...], "rows": [[...], ...]}
  std::vector<Verdict> verdicts;
  double wall_time = 0.0;

  bool pass() const;
  Json to_json() const;
  /// Every series as "series,<column>,..." blocks; verdicts as a trailing block.
  std::string to_csv() const;
};

}  // namespace qloc

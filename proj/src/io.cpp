#include "qloc/io.hpp"

#include <fstream>
#include <sstream>

#include "qloc/errors.hpp"

namespace qloc {

namespace {

std::string position_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
  throw InputError("field '" + field + "': " + why);
}

const Json& require(const Json& j, const char* key, const std::string& field) {
  if (!j.is_object()) bad_field(field, "expected an object");
  const auto it = j.find(key);
  if (it == j.end()) bad_field(field + "." + key, "missing");
  return *it;
}

}  // namespace

Json parse_json_text(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw InputError(origin + ": JSON syntax error at " + position_of(text, e.byte == 0 ? 0 : e.byte - 1));
  }
}

Json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError(path.string() + ": cannot open");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_json_text(buf.str(), path.string());
}

Json complex_to_json(cplx z) { return Json::array({z.real(), z.imag()}); }

cplx complex_from_json(const Json& j, const std::string& field) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  bad_field(field, "expected a number or [re, im]");
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) bad_field(field, "expected a nonempty list of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array()) bad_field(field, "expected a list of rows");
  const std::size_t cols = j[0].size();
  Matrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string rf = field + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != cols) bad_field(rf, "ragged row");
    for (std::size_t c = 0; c < cols; ++c) {
      m(r, c) = complex_from_json(j[r][c], rf + "[" + std::to_string(c) + "]");
    }
  }
  return m;
}

Vector vector_from_json(const Json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) bad_field(field, "expected a nonempty list");
  Vector v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    v(i) = complex_from_json(j[i], field + "[" + std::to_string(i) + "]");
  }
  return v;
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
  return out;
}

NetConfig net_from_json(const Json& j) {
  const Json& n = require(j, "n_sites", "net");
  if (!n.is_number_integer()) bad_field("net.n_sites", "expected an integer");
  int d = 2;
  if (j.contains("site_dim")) {
    if (!j["site_dim"].is_number_integer()) bad_field("net.site_dim", "expected an integer");
    d = j["site_dim"].get<int>();
  }
  try {
    return NetConfig(n.get<int>(), d);
  } catch (const InputError& e) {
    bad_field("net", e.what());
  }
}

Json net_to_json(const NetConfig& c) { return {{"n_sites", c.n_sites()}, {"site_dim", c.site_dim()}}; }

Functional state_from_json(const Json& j, const NetConfig& config) {
  const Json& type = require(j, "type", "state");
  if (!type.is_string()) bad_field("state.type", "expected a string");
  const std::string t = type.get<std::string>();
  try {
    if (t == "product") {
      const Json& sites = require(j, "sites", "state");
      if (!sites.is_array()) bad_field("state.sites", "expected a list of density matrices");
      std::vector<Matrix> rhos;
      for (std::size_t s = 0; s < sites.size(); ++s) {
        rhos.push_back(matrix_from_json(sites[s], "state.sites[" + std::to_string(s) + "]"));
      }
      return product_state(config, rhos);
    }
    if (t == "density") return density_state(config, matrix_from_json(require(j, "matrix", "state"), "state.matrix"));
    if (t == "vector") return vector_state(config, vector_from_json(require(j, "vector", "state"), "state.vector"));
  } catch (const DimensionMismatch& e) {
    bad_field("state", e.what());
  }
  bad_field("state.type", "unknown state type \"" + t + "\" (product, density, vector)");
}

Element element_from_json(const Json& j, const NetConfig& config) {
  if (j.is_string()) {
    const std::vector<PauliTerm> terms = parse_pauli_sum(j.get<std::string>());
    return pauli_sum(terms, config);
  }
  const Json& region = require(j, "region", "element");
  if (!region.is_string()) bad_field("element.region", "expected a region literal such as \"0,2\"");
  const Region r = Region::parse(region.get<std::string>());
  try {
    return embed(matrix_from_json(require(j, "matrix", "element"), "element.matrix"), r, config);
  } catch (const DimensionMismatch& e) {
    bad_field("element.matrix", e.what());
  }
}

Element element_from_text(const std::string& text, const NetConfig& config) {
  const auto first = text.find_first_not_of(" \t\n");
  if (first != std::string::npos && text[first] == '{') {
    return element_from_json(parse_json_text(text, "--element"), config);
  }
  return element_from_json(Json(text), config);
}

Json verdict_to_json(const Verdict& v) {
  return {{"name", v.name},
          {"pass", v.pass},
          {"value", v.value},
          {"relation", v.relation},
          {"tolerance", v.tolerance}};
}

bool Report::pass() const {
  for (const Verdict& v : verdicts) {
    if (!v.pass) return false;
  }
  return true;
}

Json Report::to_json() const {
  Json vs = Json::array();
  for (const Verdict& v : verdicts) vs.push_back(verdict_to_json(v));
  return {{"schema_version", kReportSchemaVersion},
          {"analysis", analysis},
          {"inputs", inputs},
          {"results", results},
          {"series", series},
          {"verdicts", vs},
          {"pass", pass()},
          {"wall_time", wall_time}};
}

namespace {

std::string csv_cell(const Json& v) {
  if (v.is_null()) return "";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) {
    std::ostringstream s;
    s.precision(17);
    s << v.get<double>();
    return s.str();
  }
  return v.dump();
}

}  // namespace

std::string Report::to_csv() const {
  std::ostringstream out;
  for (const auto& [name, table] : series.items()) {
    out << "# " << name << "\n";
    const Json& cols = table["columns"];
    for (std::size_t c = 0; c < cols.size(); ++c) out << (c ? "," : "") << csv_cell(cols[c]);
    out << "\n";
    for (const Json& row : table["rows"]) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << csv_cell(row[c]);
      out << "\n";
    }
  }
  out << "# verdicts\nname,pass,value,relation,tolerance\n";
  for (const Verdict& v : verdicts) {
    out << v.name << "," << (v.pass ? "true" : "false") << "," << csv_cell(Json(v.value)) << ","
        << v.relation << "," << csv_cell(v.tolerance) << "\n";
  }
  return out.str();
}

}  // namespace qloc

#pragma once

#include "subhmm/core.hpp"
#include "subhmm/estimator.hpp"
#include "subhmm/hmm.hpp"

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace subhmm::io {

using Json = nlohmann::json;

inline Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

inline Matrix matrix_from_json(const Json& j, Eigen::Index rows, Eigen::Index cols, const char* name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows)
    throw Error(ErrorCode::Io, std::string(name) + " must have " + std::to_string(rows) + " rows");
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const Json& row = j[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
      throw Error(ErrorCode::Io, std::string(name) + " row " + std::to_string(i) + " must have " +
                                     std::to_string(cols) + " entries");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

inline Vector vector_from_json(const Json& j, Eigen::Index size, const char* name) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != size)
    throw Error(ErrorCode::Io, std::string(name) + " must have " + std::to_string(size) + " entries");
  Vector v(size);
  for (Eigen::Index i = 0; i < size; ++i) v(i) = j[static_cast<std::size_t>(i)].get<double>();
  return v;
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

inline Json parse_json(const std::string& text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Io, origin + ": " + e.what());
  }
}

inline int alphabet_field(const Json& j) {
  if (j.contains("ell")) return j.at("ell").get<int>();
  if (j.contains("l")) return j.at("l").get<int>();
  throw Error(ErrorCode::Io, "missing alphabet size field 'ell'");
}

// Model files: {"n": 2, "ell": 2, "A": [[...], ...], "C": [[...], ...]},
// matrices row-major in the column-stochastic convention.

inline Json model_to_json(const HmmModel& model) {
  return Json{{"n", model.n()}, {"ell", model.ell()}, {"A", matrix_to_json(model.A())},
              {"C", matrix_to_json(model.C())}};
}

inline HmmModel model_from_json(const Json& j) {
  try {
    const int n = j.at("n").get<int>();
    const int l = alphabet_field(j);
    return validate_model(matrix_from_json(j.at("A"), n, n, "A"), matrix_from_json(j.at("C"), l, n, "C"));
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Io, std::string("malformed model: ") + e.what());
  }
}

inline HmmModel read_model(const std::filesystem::path& path) {
  return model_from_json(parse_json(read_text(path), path.string()));
}

inline Json system_to_json(const EstimatedSystem& est) {
  const auto& d = est.diagnostics;
  return Json{{"kind", "estimated"},
              {"n", est.n},
              {"ell", est.ell},
              {"k", est.k},
              {"A", matrix_to_json(est.Ahat)},
              {"C", matrix_to_json(est.Chat)},
              {"K", matrix_to_json(est.Khat)},
              {"meanY", vector_to_json(est.meanY)},
              {"diagnostics",
               {{"sigmaDropped", d.sigmaDropped},
                {"singularValues", vector_to_json(d.singularValues)},
                {"tieAtCut", d.tieAtCut},
                {"condStateGram", d.condStateGram},
                {"condResidualCore", d.condResidualCore}}}};
}

/// Reads the predictor part (A, C, K, meanY) of an estimated-system file.
inline LinearSystem system_from_json(const Json& j) {
  try {
    const int n = j.at("n").get<int>();
    const int l = alphabet_field(j);
    return LinearSystem(matrix_from_json(j.at("A"), n, n, "A"), matrix_from_json(j.at("C"), l, n, "C"),
                        matrix_from_json(j.at("K"), n, l, "K"), vector_from_json(j.at("meanY"), l, "meanY"),
                        j.value("kind", std::string("estimated")) == "estimated");
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Io, std::string("malformed system: ") + e.what());
  }
}

// Symbol files: header line "# alphabet=<ell>", then one zero-based symbol
// index per line.

struct SymbolFile {
  int ell = 0;
  std::vector<Symbol> symbols;
};

inline std::string format_symbols(const SymbolFile& f) {
  std::string out = "# alphabet=" + std::to_string(f.ell) + "\n";
  out.reserve(out.size() + 3 * f.symbols.size());
  for (Symbol s : f.symbols) {
    out += std::to_string(s);
    out += '\n';
  }
  return out;
}

inline SymbolFile parse_symbols(const std::string& text, const std::string& origin = "symbols") {
  std::istringstream in(text);
  std::string line;
  SymbolFile f;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("alphabet=");
      if (pos != std::string::npos) f.ell = std::stoi(line.substr(pos + 9));
      continue;
    }
    try {
      f.symbols.push_back(static_cast<Symbol>(std::stoi(line)));
    } catch (const std::exception&) {
      throw Error(ErrorCode::Io, origin + ":" + std::to_string(lineno) + ": not a symbol index");
    }
  }
  if (f.ell < 1) throw Error(ErrorCode::Io, origin + ": missing '# alphabet=' header");
  for (Symbol s : f.symbols)
    if (s < 0 || s >= f.ell) throw Error(ErrorCode::Io, origin + ": symbol " + std::to_string(s) + " outside alphabet");
  return f;
}

inline SymbolFile read_symbols(const std::filesystem::path& path) {
  return parse_symbols(read_text(path), path.string());
}

}  // namespace subhmm::io

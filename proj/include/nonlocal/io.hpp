#pragma once

// Flat-file formats: nonlocal specs, verdicts and reports as JSON, matrices
// and trajectories as CSV.

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "nonlocal/characteristic.hpp"
#include "nonlocal/model.hpp"
#include "nonlocal/rootlocus.hpp"
#include "nonlocal/solver.hpp"
#include "nonlocal/wellposedness.hpp"

namespace nonlocal {

using Json = nlohmann::ordered_json;

/// A config file that cannot be parsed or does not match the expected shape.
class ConfigError : public InvalidInput {
 public:
  using InvalidInput::InvalidInput;
};

/// 17 significant digits; enough to round-trip any double.
inline std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline Json parse_json_text(const std::string& text, const std::string& origin = "input") {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(origin + ": malformed JSON: " + e.what());
  }
}

inline Json read_json_file(const std::string& path) { return parse_json_text(read_text_file(path), path); }

namespace detail {

inline const Json& require(const Json& j, const char* key, const char* ctx) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(std::string(ctx) + ": missing field '" + key + "'");
  return j.at(key);
}

inline double number(const Json& j, const char* ctx) {
  if (!j.is_number()) throw ConfigError(std::string(ctx) + ": expected a number");
  return j.get<double>();
}

inline std::int64_t integer(const Json& j, const char* ctx) {
  if (!j.is_number_integer()) throw ConfigError(std::string(ctx) + ": expected an integer");
  return j.get<std::int64_t>();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Scalars and vectors
// ---------------------------------------------------------------------------

inline Json to_json(Complex z) { return Json{{"re", z.real()}, {"im", z.imag()}}; }

/// {"re": x, "im": y}, or a bare number for a real value.
inline Complex complex_from_json(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_object()) throw ConfigError("complex value: expected {\"re\", \"im\"} or a number");
  const double re = j.contains("re") ? detail::number(j.at("re"), "complex re") : 0.0;
  const double im = j.contains("im") ? detail::number(j.at("im"), "complex im") : 0.0;
  return {re, im};
}

inline Json to_json(const State& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(to_json(v(i)));
  return arr;
}

inline State state_from_json(const Json& j) {
  const Json& arr = j.is_object() ? detail::require(j, "state", "state") : j;
  if (!arr.is_array() || arr.empty()) throw ConfigError("state: expected a nonempty array");
  State v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v(static_cast<Eigen::Index>(i)) = complex_from_json(arr[i]);
  return v;
}

// ---------------------------------------------------------------------------
// Nonlocal specs
// ---------------------------------------------------------------------------

inline Json to_json(const RationalTime& t) { return Json{{"num", t.num}, {"den", t.den}}; }

inline Json to_json(const TimePoint& t) {
  if (t.is_exact()) return to_json(t.rational());
  return t.value();
}

/// {"times": [{"num", "den"} | number], "alphas": [...], "d": x,
///  "max_den"?: n, "depth"?: n}. A max_den override (from the command line)
/// takes precedence over the file.
inline NonlocalSpec spec_from_json(const Json& j, std::optional<std::int64_t> max_den_override = std::nullopt) {
  const Json& times = detail::require(j, "times", "spec");
  const Json& alphas = detail::require(j, "alphas", "spec");
  if (!times.is_array() || !alphas.is_array()) throw ConfigError("spec: 'times' and 'alphas' must be arrays");
  RationalizationPolicy policy;
  if (j.contains("max_den")) policy.max_den = detail::integer(j.at("max_den"), "spec max_den");
  if (j.contains("depth")) {
    const auto depth = detail::integer(j.at("depth"), "spec depth");
    if (depth < 1) throw ConfigError("spec: depth must be >= 1");
    policy.depth = static_cast<std::size_t>(depth);
  }
  if (max_den_override) policy.max_den = *max_den_override;

  std::vector<TimePoint> tp;
  for (const auto& t : times) {
    if (t.is_object())
      tp.push_back(TimePoint::exact(detail::integer(detail::require(t, "num", "time"), "time num"),
                                    detail::integer(detail::require(t, "den", "time"), "time den")));
    else
      tp.push_back(TimePoint::from_real(detail::number(t, "time"), policy));
  }
  std::vector<Complex> al;
  for (const auto& a : alphas) al.push_back(complex_from_json(a));
  return NonlocalSpec(std::move(tp), std::move(al), detail::number(detail::require(j, "d", "spec"), "spec d"));
}

inline Json to_json(const NonlocalSpec& spec) {
  Json times = Json::array(), alphas = Json::array();
  for (const auto& t : spec.times()) times.push_back(to_json(t));
  for (const auto& a : spec.alphas()) alphas.push_back(to_json(a));
  return Json{{"times", times}, {"alphas", alphas}, {"d", spec.strip_d()}};
}

// ---------------------------------------------------------------------------
// Verdicts and reports
// ---------------------------------------------------------------------------

inline Json to_json(const Witness& w) {
  Json j = Json::object();
  for (const auto& [k, v] : w.values) j[k] = v;
  if (w.root) j["root"] = to_json(*w.root);
  return j;
}

inline Json to_json(const WellPosednessVerdict& v) {
  Json j{{"decision", std::string(to_string(v.decision))}, {"decided_by", std::string(to_string(v.decided_by))}};
  j["witness"] = v.witness ? to_json(*v.witness) : Json(nullptr);
  if (v.convergent_trace) {
    Json trace = Json::array();
    for (const auto& step : *v.convergent_trace) {
      Json times = Json::array();
      for (const auto& t : step.times) times.push_back(to_json(t));
      trace.push_back(Json{{"times", times},
                           {"decision", std::string(to_string(step.decision))},
                           {"decided_by", std::string(to_string(step.decided_by))}});
    }
    j["convergent_trace"] = std::move(trace);
  }
  return j;
}

inline Json to_json(const ComplexPolynomial& p) {
  Json arr = Json::array();
  for (const auto& c : p.coeffs()) arr.push_back(to_json(c));
  return arr;
}

inline Json to_json(const ReducedPolynomial& r) {
  Json exps = Json::array();
  for (auto c : r.exponents) exps.push_back(c);
  return Json{{"q", r.q()},
              {"q_exact", r.q_scale.str()},
              {"exponents", exps},
              {"coefficients", to_json(r.poly)}};
}

inline Json to_json(const BoundOutcome& o) {
  Json j{{"method", std::string(to_string(o.bounds.method))}, {"applicable", o.applicable}};
  if (o.applicable) {
    j["lower"] = o.bounds.lower;
    j["upper"] = o.bounds.upper;
    j["proves_well_posed"] = o.proves_well_posed;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Matrices, sources, trajectories
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

inline double parse_cell(const std::string& cell) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(cell, &used);
  } catch (const std::exception&) {
    throw ConfigError("CSV: not a number: '" + cell + "'");
  }
  while (used < cell.size() && std::isspace(static_cast<unsigned char>(cell[used]))) ++used;
  if (used != cell.size()) throw ConfigError("CSV: not a number: '" + cell + "'");
  return x;
}

// Rows of "re,im,re,im,..." with blank lines and '#' comments skipped.
inline std::vector<std::vector<Complex>> parse_complex_csv(const std::string& text) {
  std::vector<std::vector<Complex>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto cells = split(line, ',');
    if (cells.size() % 2 != 0) throw ConfigError("CSV: each row must hold re,im pairs");
    std::vector<Complex> row;
    for (std::size_t k = 0; k < cells.size(); k += 2) row.emplace_back(parse_cell(cells[k]), parse_cell(cells[k + 1]));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline bool looks_like_json(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  return first != std::string::npos && (text[first] == '{' || text[first] == '[');
}

}  // namespace detail

inline Matrix matrix_from_json(const Json& j) {
  const Json& rows = detail::require(j, "matrix", "hamiltonian");
  if (!rows.is_array() || rows.empty()) throw ConfigError("hamiltonian: 'matrix' must be a nonempty array");
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    if (!row.is_array()) throw ConfigError("hamiltonian: every row must be an array");
    if (static_cast<Eigen::Index>(row.size()) != n) throw DimensionMismatch("hamiltonian: matrix is not square");
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = complex_from_json(row[static_cast<std::size_t>(c)]);
  }
  return m;
}

inline Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(to_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return Json{{"matrix", rows}};
}

/// A square matrix from JSON ({"matrix": [[...]]}) or CSV (re,im pairs per row).
inline Matrix load_matrix(const std::string& path) {
  const std::string text = read_text_file(path);
  if (detail::looks_like_json(text)) return matrix_from_json(parse_json_text(text, path));
  const auto rows = detail::parse_complex_csv(text);
  if (rows.empty()) throw ConfigError(path + ": empty matrix");
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix m(n, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r)];
    if (static_cast<Eigen::Index>(row.size()) != n) throw DimensionMismatch(path + ": matrix is not square");
    for (Eigen::Index c = 0; c < n; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
  }
  return m;
}

/// A state vector from JSON (array or {"state": [...]}) or CSV (one re,im per line).
inline State load_state(const std::string& path) {
  const std::string text = read_text_file(path);
  if (detail::looks_like_json(text)) return state_from_json(parse_json_text(text, path));
  const auto rows = detail::parse_complex_csv(text);
  if (rows.empty()) throw ConfigError(path + ": empty state");
  State v(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != 1) throw ConfigError(path + ": expected one re,im pair per line");
    v(static_cast<Eigen::Index>(i)) = rows[i][0];
  }
  return v;
}

/// {"kind": "zero"} | {"kind": "exponential", "gamma": z, "w": [...]}
/// | {"kind": "sampled", "times": [...], "values": [[...], ...], "order": k}.
inline SourceTerm source_from_json(const Json& j) {
  const auto& kind_j = detail::require(j, "kind", "source");
  if (!kind_j.is_string()) throw ConfigError("source: 'kind' must be a string");
  const auto kind = kind_j.get<std::string>();
  if (kind == "zero") return ZeroSource{};
  if (kind == "exponential")
    return ExponentialSource{complex_from_json(detail::require(j, "gamma", "source")),
                             state_from_json(detail::require(j, "w", "source"))};
  if (kind == "sampled") {
    SampledSource s;
    const auto& times = detail::require(j, "times", "source");
    const auto& values = detail::require(j, "values", "source");
    if (!times.is_array() || !values.is_array()) throw ConfigError("source: 'times' and 'values' must be arrays");
    for (const auto& t : times) s.times.push_back(detail::number(t, "source time"));
    for (const auto& v : values) s.values.push_back(state_from_json(v));
    if (j.contains("order")) s.order = static_cast<int>(detail::integer(j.at("order"), "source order"));
    return s;
  }
  throw ConfigError("source: unknown kind '" + kind + "'");
}

/// t, Re psi_1, Im psi_1, ... on a uniform grid of `samples` points over [0, T].
inline void write_trajectory_csv(std::ostream& out, const NonlocalSolution& sol, std::size_t samples) {
  if (samples < 2) throw InvalidInput("trajectory: need at least 2 samples");
  const auto n = sol.hamiltonian().dim();
  out << "t";
  for (Eigen::Index i = 1; i <= n; ++i) out << ",re_psi" << i << ",im_psi" << i;
  out << '\n';
  for (std::size_t k = 0; k < samples; ++k) {
    const double t = k + 1 == samples ? sol.horizon()
                                      : sol.horizon() * static_cast<double>(k) / static_cast<double>(samples - 1);
    const State psi = sol.evaluate(t);
    out << format_double(t);
    for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_double(psi(i).real()) << ',' << format_double(psi(i).imag());
    out << '\n';
  }
}

}  // namespace nonlocal

#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>

#include <json.hpp>

#include "mcdm/ahp.hpp"
#include "mcdm/errors.hpp"

// Matrix file: {"criteria": [...], "matrix": [[...], ...]}. Entries are JSON
// numbers or strings such as "1/3" / "7", read as exact rationals.

namespace mcdm::ahp {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline bool parse_integer(std::string_view s, long long& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

inline bool parse_decimal(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace detail

/// Parses "p/q" as the rational p/q (one rounding step) or a plain decimal.
inline double parse_judgment(std::string_view text) {
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    long long num = 0;
    long long den = 0;
    if (!detail::parse_integer(text.substr(0, slash), num) || !detail::parse_integer(text.substr(slash + 1), den))
      throw Error(ErrorCode::parse, "malformed rational '" + std::string(text) + "'");
    if (den == 0) throw Error(ErrorCode::parse, "zero denominator in '" + std::string(text) + "'");
    return static_cast<double>(num) / static_cast<double>(den);
  }
  double value = 0.0;
  if (!detail::parse_decimal(text, value)) throw Error(ErrorCode::parse, "malformed judgment '" + std::string(text) + "'");
  return value;
}

inline PairwiseMatrix matrix_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::parse, "matrix document must be a JSON object");
  if (!doc.contains("criteria") || !doc["criteria"].is_array())
    throw Error(ErrorCode::parse, "missing array field 'criteria'", {"criteria"});
  if (!doc.contains("matrix") || !doc["matrix"].is_array())
    throw Error(ErrorCode::parse, "missing array field 'matrix'", {"matrix"});

  PairwiseMatrix m;
  for (std::size_t i = 0; i < doc["criteria"].size(); ++i) {
    const auto& label = doc["criteria"][i];
    if (!label.is_string())
      throw Error(ErrorCode::parse, "criteria[" + std::to_string(i) + "] must be a string",
                  {"criteria[" + std::to_string(i) + "]"});
    m.labels.push_back(label.get<std::string>());
  }
  for (std::size_t i = 0; i < doc["matrix"].size(); ++i) {
    const auto& row = doc["matrix"][i];
    const std::string where = "matrix[" + std::to_string(i) + "]";
    if (!row.is_array()) throw Error(ErrorCode::parse, where + " must be an array", {where});
    std::vector<double> values;
    for (std::size_t j = 0; j < row.size(); ++j) {
      const auto& cell = row[j];
      const std::string at = where + "[" + std::to_string(j) + "]";
      try {
        if (cell.is_number())
          values.push_back(cell.get<double>());
        else if (cell.is_string())
          values.push_back(parse_judgment(cell.get<std::string>()));
        else
          throw Error(ErrorCode::parse, "must be a number or a rational string");
      } catch (const Error& e) {
        throw Error(ErrorCode::parse, at + ": " + e.what(), {at});
      }
    }
    m.rows.push_back(std::move(values));
  }
  return m;
}

inline PairwiseMatrix load_matrix_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse, "cannot open matrix file " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::parse, path.string() + ": " + e.what());
  }
  return matrix_from_json(doc);
}

inline nlohmann::json to_json(const PairwiseMatrix& m) {
  return {{"criteria", m.labels}, {"matrix", m.rows}};
}

inline nlohmann::json to_json(const WeightVector& w) {
  nlohmann::json out = nlohmann::json::object();
  for (std::size_t i = 0; i < w.size(); ++i) out[w.labels[i]] = w.weights[i];
  return out;
}

inline nlohmann::json to_json(const ConsistencyReport& r) {
  return {{"lambda_max", r.lambda_max}, {"ci", r.ci}, {"ri", r.ri}, {"cr", r.cr}, {"acceptable", r.acceptable}};
}

/// Weights report: {weights: {label: w}, lambda_max, ci, cr, acceptable}.
inline nlohmann::json to_json(const Priorities& p) {
  return {{"weights", to_json(p.weights)},
          {"lambda_max", p.consistency.lambda_max},
          {"ci", p.consistency.ci},
          {"cr", p.consistency.cr},
          {"acceptable", p.consistency.acceptable}};
}

inline nlohmann::json to_json(const Violation& v) {
  return {{"kind", to_string(v.kind)}, {"row", v.row}, {"col", v.col}, {"message", v.message}};
}

}  // namespace mcdm::ahp

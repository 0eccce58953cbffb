#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "lmpc_hr/model.hpp"

namespace lmpc_hr::io {

using json = nlohmann::json;

namespace detail {

inline Matrix parse_matrix(const json& j, const char* key, Index cols_if_empty) {
  if (!j.contains(key)) throw Error(ErrorCode::InvalidProblem, std::string("missing field \"") + key + "\"");
  const json& rows = j.at(key);
  if (!rows.is_array()) throw Error(ErrorCode::InvalidProblem, std::string("field \"") + key + "\" must be a nested array");
  if (rows.empty()) return Matrix(0, cols_if_empty);
  const auto cols = rows.front().is_array() ? rows.front().size() : 0;
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (!rows[r].is_array() || rows[r].size() != cols) {
      throw Error(ErrorCode::InvalidProblem, std::string("field \"") + key + "\" is ragged or not row-major");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      if (!rows[r][c].is_number()) throw Error(ErrorCode::InvalidProblem, std::string("non-numeric entry in \"") + key + "\"");
      m(static_cast<Index>(r), static_cast<Index>(c)) = rows[r][c].get<double>();
    }
  }
  return m;
}

inline Vector parse_vector(const json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::InvalidProblem, std::string("missing field \"") + key + "\"");
  const json& v = j.at(key);
  if (!v.is_array()) throw Error(ErrorCode::InvalidProblem, std::string("field \"") + key + "\" must be an array");
  Vector out(static_cast<Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw Error(ErrorCode::InvalidProblem, std::string("non-numeric entry in \"") + key + "\"");
    out(static_cast<Index>(i)) = v[i].get<double>();
  }
  return out;
}

inline json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

}  // namespace detail

/// Parses the problem schema {A, B, N, Q, R, P, Hx, hx, Hu, hu, Hf, hf}
/// (row-major nested arrays). Shape checks are left to validate_problem.
inline ProblemData problem_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::InvalidProblem, "problem document must be a JSON object");
  ProblemData d;
  d.A = detail::parse_matrix(j, "A", 0);
  d.B = detail::parse_matrix(j, "B", 0);
  const Index nx = d.A.rows();
  const Index nu = d.B.cols();
  if (!j.contains("N") || !j.at("N").is_number_integer()) throw Error(ErrorCode::InvalidProblem, "field \"N\" must be an integer");
  d.horizon = j.at("N").get<int>();
  d.Q = detail::parse_matrix(j, "Q", nx);
  d.R = detail::parse_matrix(j, "R", nu);
  d.P = detail::parse_matrix(j, "P", nx);
  d.Hx = detail::parse_matrix(j, "Hx", nx);
  d.hx = detail::parse_vector(j, "hx");
  d.Hu = detail::parse_matrix(j, "Hu", nu);
  d.hu = detail::parse_vector(j, "hu");
  d.Hf = detail::parse_matrix(j, "Hf", nx);
  d.hf = detail::parse_vector(j, "hf");
  return d;
}

inline json problem_to_json(const ProblemData& d) {
  json j;
  j["A"] = detail::matrix_to_json(d.A);
  j["B"] = detail::matrix_to_json(d.B);
  j["N"] = d.horizon;
  j["Q"] = detail::matrix_to_json(d.Q);
  j["R"] = detail::matrix_to_json(d.R);
  j["P"] = detail::matrix_to_json(d.P);
  j["Hx"] = detail::matrix_to_json(d.Hx);
  j["hx"] = detail::vector_to_json(d.hx);
  j["Hu"] = detail::matrix_to_json(d.Hu);
  j["hu"] = detail::vector_to_json(d.hu);
  j["Hf"] = detail::matrix_to_json(d.Hf);
  j["hf"] = detail::vector_to_json(d.hf);
  return j;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidProblem, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// FNV-1a 64-bit digest as 16 hex digits.
inline std::string content_hash(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct LoadedProblem {
  MpcProblem problem;
  std::string hash;
};

/// Reads, parses and validates a problem file. Every failure is an
/// InvalidProblem error.
inline LoadedProblem load_problem(const std::string& path) {
  const std::string text = read_file(path);
  ProblemData data;
  try {
    data = problem_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidProblem, path + ": " + e.what());
  }
  return LoadedProblem{MpcProblem(std::move(data)), content_hash(text)};
}

}  // namespace lmpc_hr::io

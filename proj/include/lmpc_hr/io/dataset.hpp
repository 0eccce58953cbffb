#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "lmpc_hr/io/problem_json.hpp"
#include "lmpc_hr/samplers/chain.hpp"

namespace lmpc_hr::io {

inline constexpr const char* kToolVersion = "0.1.0";

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// `x0,...,u0,...,value,chain_index`, 17 significant digits.
inline void write_samples_csv(std::ostream& out, const std::vector<SampleRecord>& samples, Index nx, Index nu) {
  for (Index i = 0; i < nx; ++i) out << 'x' << i << ',';
  for (Index i = 0; i < nu; ++i) out << 'u' << i << ',';
  out << "value,chain_index\n";
  for (const SampleRecord& s : samples) {
    for (Index i = 0; i < nx; ++i) out << format_double(s.x(i)) << ',';
    for (Index i = 0; i < nu; ++i) out << format_double(s.u0(i)) << ',';
    out << format_double(s.value) << ',' << s.chain_index << '\n';
  }
}

inline void write_states_csv(std::ostream& out, const std::vector<Vector>& states, Index nx) {
  for (Index i = 0; i < nx; ++i) out << (i ? "," : "") << 'x' << i;
  out << '\n';
  for (const Vector& x : states) {
    for (Index i = 0; i < nx; ++i) out << (i ? "," : "") << format_double(x(i));
    out << '\n';
  }
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  Index column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<Index>(i);
    }
    return -1;
  }
};

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::InvalidProblem, "cannot open " + path);
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorCode::InvalidProblem, path + ": empty CSV");
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) t.header.push_back(cell);
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != t.header.size()) throw Error(ErrorCode::InvalidProblem, path + ": ragged CSV row");
    t.rows.push_back(std::move(row));
  }
  return t;
}

/// States stored in the leading x0..x{nx-1} columns of a dataset CSV.
inline std::vector<Vector> read_states(const CsvTable& t) {
  std::vector<Index> cols;
  for (Index i = 0;; ++i) {
    const Index c = t.column("x" + std::to_string(i));
    if (c < 0) break;
    cols.push_back(c);
  }
  std::vector<Vector> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    Vector x(static_cast<Index>(cols.size()));
    for (std::size_t i = 0; i < cols.size(); ++i) x(static_cast<Index>(i)) = row[static_cast<std::size_t>(cols[i])];
    out.push_back(std::move(x));
  }
  return out;
}

struct ManifestInputs {
  std::string problem_file;
  std::string problem_hash;
  MethodTag method = MethodTag::LmpcHr;
  ChainConfig config;
  double epsilon = 0.0;
};

/// Everything needed to rerun a sampling job bit-for-bit, plus its counters.
inline nlohmann::json make_manifest(const ManifestInputs& in, const RunReport& report) {
  nlohmann::json m;
  m["tool_version"] = kToolVersion;
  m["problem_file"] = in.problem_file;
  m["problem_hash"] = in.problem_hash;
  m["method"] = std::string(cli_name(in.method));
  m["seed"] = in.config.seed;
  m["n_samples"] = in.config.n_samples;
  m["burn_in"] = in.config.burn_in;
  m["thinning"] = in.config.thinning;
  m["boundary_margin"] = in.config.boundary_margin;
  if (in.config.x_init) m["x_init"] = detail::vector_to_json(*in.config.x_init);
  if (in.method == MethodTag::BsHr) m["epsilon"] = in.epsilon;
  m["tolerances"] = {{"feas", in.config.tol.feas}, {"kkt", in.config.tol.kkt}};
  m["wall_time"] = report.wall_time;
  m["queries"] = {{"sampling", report.sampling_queries},
                  {"boundary", report.counters.boundary},
                  {"feasibility", report.counters.feasibility},
                  {"labeling", report.labeling_queries}};
  m["rejections"] = report.rejections;
  m["cost_per_sample"] = report.cost_per_sample();
  m["samples_written"] = report.samples.size();
  return m;
}

}  // namespace lmpc_hr::io

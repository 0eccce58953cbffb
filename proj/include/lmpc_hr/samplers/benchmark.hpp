#pragma once

#include <cstdio>
#include <future>
#include <string>
#include <vector>

#include "lmpc_hr/samplers/samplers.hpp"

namespace lmpc_hr {

/// Runs all four methods on the same config. Each method draws from its own
/// stream derived from cfg.seed. Output order is UVRS, DRS-HR, BS-HR, LMPC-HR
/// regardless of `parallel`.
inline std::vector<RunReport> run_benchmark(const MpcProblem& p, const ChainConfig& cfg,
                                            double epsilon = kDefaultBisectionEpsilon, bool parallel = false) {
  std::vector<RunReport> out;
  if (!parallel) {
    for (MethodTag tag : kAllMethods) out.push_back(run_method(p, cfg, tag, epsilon));
    return out;
  }
  std::vector<std::future<RunReport>> jobs;
  for (MethodTag tag : kAllMethods) {
    jobs.push_back(std::async(std::launch::async, [&p, &cfg, tag, epsilon] { return run_method(p, cfg, tag, epsilon); }));
  }
  for (auto& j : jobs) out.push_back(j.get());
  return out;
}

/// Aligned text table: Method | Time (s) | Solver Queries | Cost/Sample.
inline std::string render_table(const std::vector<RunReport>& reports) {
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-10s %10s %16s %12s %12s\n", "Method", "Time (s)", "Solver Queries", "Cost/Sample",
                "Rejections");
  out += line;
  out += std::string(64, '-') + "\n";
  for (const RunReport& r : reports) {
    std::snprintf(line, sizeof line, "%-10s %10.3f %16zu %12.2f %12zu\n", std::string(to_string(r.method_tag)).c_str(),
                  r.wall_time, r.sampling_queries, r.cost_per_sample(), r.rejections);
    out += line;
  }
  return out;
}

}  // namespace lmpc_hr

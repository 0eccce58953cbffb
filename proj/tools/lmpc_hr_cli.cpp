// Command-line front end: dataset generation, benchmarking and validation.
//
// Exit codes: 0 success, 2 input error, 3 runtime or solver error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "lmpc_hr/io/dataset.hpp"
#include "lmpc_hr/lmpc_hr.hpp"

namespace fs = std::filesystem;
using namespace lmpc_hr;
using nlohmann::json;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitRuntime = 3;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunFlags {
  std::string problem;
  std::uint64_t seed = 0;
  std::size_t n = 1000;
  std::size_t burn_in = 100;
  std::size_t thinning = 1;
  double epsilon = kDefaultBisectionEpsilon;
  double margin = 1e-9;
  std::string out = ".";
  bool log_rejections = false;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--problem", f.problem, "problem JSON file")->required();
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--n", f.n, "number of samples to emit");
  cmd->add_option("--burn-in", f.burn_in, "chain steps discarded before recording");
  cmd->add_option("--thinning", f.thinning, "keep every k-th chain state");
  cmd->add_option("--epsilon", f.epsilon, "BS-HR bracket width");
  cmd->add_option("--boundary-margin", f.margin, "relative chord shrink for LMPC-HR");
  cmd->add_option("--out", f.out, "output directory");
}

ChainConfig make_config(const RunFlags& f) {
  ChainConfig c;
  c.seed = f.seed;
  c.n_samples = f.n;
  c.burn_in = f.burn_in;
  c.thinning = f.thinning;
  c.boundary_margin = f.margin;
  c.log_rejections = f.log_rejections;
  return c;
}

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw InputError("cannot create output directory " + dir + ": " + ec.message());
  return fs::path(dir);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

MethodTag method_from(const std::string& name) {
  const auto m = parse_method(name);
  if (!m) throw InputError("unknown method \"" + name + "\" (expected lmpc-hr, uvrs, drs-hr or bs-hr)");
  return *m;
}

void write_json(const fs::path& path, const json& j) { open_out(path) << j.dump(2) << '\n'; }

void write_dataset(const fs::path& dir, const std::string& stem, const io::LoadedProblem& lp, const RunFlags& f,
                   const ChainConfig& cfg, const RunReport& r) {
  const MpcProblem& p = lp.problem;
  {
    std::ofstream out = open_out(dir / (stem + ".csv"));
    io::write_samples_csv(out, r.samples, p.nx(), p.nu());
  }
  io::ManifestInputs in{f.problem, lp.hash, r.method_tag, cfg, f.epsilon};
  write_json(dir / (stem == "samples" ? "manifest.json" : stem + ".manifest.json"), io::make_manifest(in, r));
  if (cfg.log_rejections && (r.method_tag == MethodTag::Uvrs || r.method_tag == MethodTag::DrsHr)) {
    std::ofstream out = open_out(dir / (stem == "samples" ? "rejections.csv" : stem + ".rejections.csv"));
    io::write_states_csv(out, r.rejected_draws, p.nx());
  }
}

int cmd_sample(const RunFlags& f, const std::string& method_name) {
  const MethodTag method = method_from(method_name);
  const io::LoadedProblem lp = io::load_problem(f.problem);
  const ChainConfig cfg = make_config(f);
  const fs::path dir = prepare_out(f.out);
  const RunReport r = run_method(lp.problem, cfg, method, f.epsilon);
  write_dataset(dir, "samples", lp, f, cfg, r);
  std::cout << to_string(method) << ": " << r.samples.size() << " samples, " << r.sampling_queries
            << " sampling queries, " << r.rejections << " rejections, " << r.wall_time << " s\n";
  return 0;
}

int cmd_benchmark(const RunFlags& f, bool parallel) {
  const io::LoadedProblem lp = io::load_problem(f.problem);
  const ChainConfig cfg = make_config(f);
  const fs::path dir = prepare_out(f.out);
  const std::vector<RunReport> reports = run_benchmark(lp.problem, cfg, f.epsilon, parallel);
  json rows = json::array();
  for (const RunReport& r : reports) {
    const std::string stem = std::string(cli_name(r.method_tag));
    write_dataset(dir, stem, lp, f, cfg, r);
    rows.push_back({{"method", std::string(to_string(r.method_tag))},
                    {"time_s", r.wall_time},
                    {"solver_queries", r.sampling_queries},
                    {"cost_per_sample", r.cost_per_sample()},
                    {"rejections", r.rejections},
                    {"labeling_queries", r.labeling_queries},
                    {"n_samples", r.samples.size()}});
  }
  json doc{{"tool_version", io::kToolVersion}, {"problem_file", f.problem}, {"problem_hash", lp.hash},
           {"seed", f.seed},                  {"n_samples", f.n},          {"burn_in", f.burn_in},
           {"thinning", f.thinning},          {"epsilon", f.epsilon},      {"methods", rows}};
  write_json(dir / "benchmark.json", doc);
  std::cout << render_table(reports);
  return 0;
}

int cmd_validate(const std::string& problem, const std::string& samples, int resolution, int cells,
                 const std::string& out) {
  const io::LoadedProblem lp = io::load_problem(problem);
  const io::CsvTable table = io::read_csv(samples);
  const std::vector<Vector> states = io::read_states(table);
  for (const Vector& x : states) {
    if (x.size() != lp.problem.nx()) throw InputError("dataset state dimension does not match the problem");
  }
  if (resolution < 16) throw InputError("--resolution must be >= 16");
  if (cells < 10) throw InputError("--cells must be >= 10");
  const GridOracle oracle = build_grid_oracle(lp.problem, resolution);
  const UniformityReport rep = uniformity_test(states, oracle, static_cast<std::size_t>(cells));

  json jcells = json::array();
  for (const UniformityCell& c : rep.cells) {
    jcells.push_back({{"id", c.id}, {"expected_probability", c.expected_probability}, {"observed", c.observed}});
  }
  const json doc{{"samples_file", samples},
                 {"resolution", resolution},
                 {"area_estimate", oracle.area_estimate()},
                 {"area_ratio", oracle.area_estimate() / oracle.box_area()},
                 {"chi2_statistic", rep.chi2_statistic},
                 {"dof", rep.dof},
                 {"p_value", rep.p_value},
                 {"n_effective", rep.n_effective},
                 {"cells", jcells}};
  if (out.empty()) {
    std::cout << doc.dump(2) << '\n';
  } else {
    write_json(out, doc);
  }
  std::cerr << "uniformity: chi2 = " << rep.chi2_statistic << " on " << rep.dof << " dof, p = " << rep.p_value
            << (rep.p_value > 0.01 ? " (not rejected at 0.01)" : " (rejected at 0.01)") << '\n';
  return 0;
}

int cmd_plot_data(const std::string& problem, const std::vector<std::string>& datasets, const std::string& out_path) {
  const io::LoadedProblem lp = io::load_problem(problem);
  if (lp.problem.nx() != 2) throw InputError("plot-data needs a two-dimensional state");
  std::ofstream file;
  if (!out_path.empty()) file = open_out(out_path);
  std::ostream& out = out_path.empty() ? std::cout : file;

  out << "x0,x1,feasible,method\n";
  const auto [lo, hi] = bounding_box(lp.problem.state_set());
  const double corners[4][2] = {{lo(0), lo(1)}, {hi(0), lo(1)}, {hi(0), hi(1)}, {lo(0), hi(1)}};
  for (const auto& c : corners) out << io::format_double(c[0]) << ',' << io::format_double(c[1]) << ",,box\n";

  for (const std::string& spec : datasets) {
    // Each entry is METHOD=path/to/samples.csv; rejections live next to it.
    const auto eq = spec.find('=');
    if (eq == std::string::npos) throw InputError("dataset entries must be METHOD=FILE, got " + spec);
    const std::string label = spec.substr(0, eq);
    const fs::path path = spec.substr(eq + 1);
    for (const Vector& x : io::read_states(io::read_csv(path.string()))) {
      if (x.size() != 2) throw InputError(path.string() + ": expected two state columns");
      out << io::format_double(x(0)) << ',' << io::format_double(x(1)) << ",1," << label << '\n';
    }
    fs::path rejected = path;
    rejected.replace_filename(path.stem().string() == "samples" ? "rejections.csv"
                                                                  : path.stem().string() + ".rejections.csv");
    if (fs::exists(rejected)) {
      for (const Vector& x : io::read_states(io::read_csv(rejected.string()))) {
        out << io::format_double(x(0)) << ',' << io::format_double(x(1)) << ",0," << label << '\n';
      }
    }
  }
  return 0;
}

int cmd_condense_dump(const std::string& problem, const std::string& out_path) {
  const io::LoadedProblem lp = io::load_problem(problem);
  const CondensedProblem cp = condense(lp.problem);
  std::ofstream file;
  if (!out_path.empty()) file = open_out(out_path);
  std::ostream& out = out_path.empty() ? std::cout : file;
  out << "row,label";
  for (Index j = 0; j < cp.n_z(); ++j) out << ",G" << j;
  for (Index j = 0; j < cp.nx; ++j) out << ",F" << j;
  out << ",w\n";
  for (Index r = 0; r < cp.n_c(); ++r) {
    out << r << ',' << to_string(cp.row_labels[static_cast<std::size_t>(r)]);
    for (Index j = 0; j < cp.n_z(); ++j) out << ',' << io::format_double(cp.G(r, j));
    for (Index j = 0; j < cp.nx; ++j) out << ',' << io::format_double(cp.F(r, j));
    out << ',' << io::format_double(cp.w(r)) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Uniform sampling of MPC feasible sets and dataset generation"};
  app.require_subcommand(1);

  RunFlags sample_flags;
  std::string method = "lmpc-hr";
  auto* sample = app.add_subcommand("sample", "draw a labeled dataset with one method");
  add_run_flags(sample, sample_flags);
  sample->add_option("--method", method, "lmpc-hr, uvrs, drs-hr or bs-hr");
  sample->add_flag("--log-rejections", sample_flags.log_rejections, "write rejected draws to rejections.csv");

  RunFlags bench_flags;
  bool parallel = false;
  auto* bench = app.add_subcommand("benchmark", "run all four methods and print the comparison table");
  add_run_flags(bench, bench_flags);
  bench->add_flag("--parallel", parallel, "run the methods concurrently");
  bench->add_flag("--log-rejections", bench_flags.log_rejections, "write rejected draws per method");

  std::string v_problem, v_samples, v_out;
  int v_resolution = 128, v_cells = 16;
  auto* validate = app.add_subcommand("validate", "chi-square uniformity test of a dataset");
  validate->add_option("--problem", v_problem, "problem JSON file")->required();
  validate->add_option("--samples", v_samples, "samples.csv to test")->required();
  validate->add_option("--resolution", v_resolution, "grid oracle cells per axis");
  validate->add_option("--cells", v_cells, "number of equal-probability groups");
  validate->add_option("--out", v_out, "write the report JSON here instead of stdout");

  std::string pd_problem, pd_out;
  std::vector<std::string> pd_datasets;
  auto* plot = app.add_subcommand("plot-data", "scatter CSV of datasets and rejected draws");
  plot->add_option("--problem", pd_problem, "problem JSON file")->required();
  plot->add_option("--dataset", pd_datasets, "METHOD=samples.csv, repeatable")->required();
  plot->add_option("--out", pd_out, "output CSV (stdout if omitted)");

  std::string cd_problem, cd_out;
  auto* dump = app.add_subcommand("condense-dump", "write G, F, w of the condensed constraints");
  dump->add_option("--problem", cd_problem, "problem JSON file")->required();
  dump->add_option("--out", cd_out, "output CSV (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitInput;
  }

  try {
    if (*sample) return cmd_sample(sample_flags, method);
    if (*bench) return cmd_benchmark(bench_flags, parallel);
    if (*validate) return cmd_validate(v_problem, v_samples, v_resolution, v_cells, v_out);
    if (*plot) return cmd_plot_data(pd_problem, pd_datasets, pd_out);
    if (*dump) return cmd_condense_dump(cd_problem, cd_out);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const Error& e) {
    std::cerr << to_string(e.code()) << ": " << e.what() << '\n';
    return e.code() == ErrorCode::InvalidProblem ? kExitInput : kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "lmpc_hr/io/dataset.hpp"

namespace fs = std::filesystem;
using namespace lmpc_hr;

namespace {

struct CliResult {
  int code = -1;
  std::string stderr_text;
};

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("lmpc_hr_test_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CliResult cli(const std::string& args, const fs::path& dir) {
  const fs::path err = dir / "stderr.txt";
  const std::string cmd = std::string("\"") + LMPC_HR_CLI_PATH + "\" " + args + " > \"" + (dir / "stdout.txt").string() +
                          "\" 2> \"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.stderr_text = slurp(err);
  return r;
}

std::string pendulum() { return std::string("--problem \"") + LMPC_HR_PENDULUM_JSON + "\""; }

}  // namespace

TEST(Cli, SampleWritesDatasetAndManifest) {
  const fs::path dir = scratch("sample");
  const CliResult r = cli("sample " + pendulum() + " --method lmpc-hr --n 1000 --seed 7 --burn-in 0 --out " + dir.string(), dir);
  ASSERT_EQ(r.code, 0) << r.stderr_text;
  const io::CsvTable t = io::read_csv((dir / "samples.csv").string());
  EXPECT_EQ(t.header, (std::vector<std::string>{"x0", "x1", "u0", "value", "chain_index"}));
  EXPECT_EQ(t.rows.size(), 1000u);
  const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(m.at("queries").at("sampling"), 2000u);
  EXPECT_EQ(m.at("method"), "lmpc-hr");
  EXPECT_EQ(m.at("seed"), 7u);
  EXPECT_EQ(m.at("problem_hash"), io::content_hash(io::read_file(LMPC_HR_PENDULUM_JSON)));
  EXPECT_FALSE(m.contains("epsilon"));
}

TEST(Cli, SampleIsByteIdenticalAcrossRuns) {
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  const std::string args = "sample " + pendulum() + " --method drs-hr --n 300 --seed 11 --out ";
  ASSERT_EQ(cli(args + a.string(), a).code, 0);
  ASSERT_EQ(cli(args + b.string(), b).code, 0);
  EXPECT_EQ(slurp(a / "samples.csv"), slurp(b / "samples.csv"));
  EXPECT_FALSE(slurp(a / "samples.csv").empty());
}

TEST(Cli, BisectionEpsilonIsRecorded) {
  const fs::path dir = scratch("eps");
  const CliResult r = cli("sample " + pendulum() + " --method bs-hr --epsilon 0.001 --n 20 --out " + dir.string(), dir);
  ASSERT_EQ(r.code, 0) << r.stderr_text;
  const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  EXPECT_EQ(m.at("epsilon"), 0.001);
}

TEST(Cli, RejectionLog) {
  const fs::path dir = scratch("rej");
  const CliResult r = cli("sample " + pendulum() + " --method uvrs --n 100 --seed 2 --log-rejections --out " + dir.string(), dir);
  ASSERT_EQ(r.code, 0) << r.stderr_text;
  const auto m = nlohmann::json::parse(slurp(dir / "manifest.json"));
  const io::CsvTable rej = io::read_csv((dir / "rejections.csv").string());
  EXPECT_EQ(rej.rows.size(), m.at("rejections").get<std::size_t>());
}

TEST(Cli, InvalidProblemExitsWithInputError) {
  const fs::path dir = scratch("bad");
  std::ofstream(dir / "bad.json") << R"({"A": [[1, 0], [0, 1]], "N": 3})";
  const CliResult r = cli("sample --problem " + (dir / "bad.json").string() + " --out " + dir.string(), dir);
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.stderr_text.find("INVALID_PROBLEM"), std::string::npos);
  EXPECT_EQ(cli("sample " + pendulum() + " --method grid --out " + dir.string(), dir).code, 2);
  EXPECT_EQ(cli("sample --bogus-flag", dir).code, 2);
}

TEST(Cli, SolverErrorExitsWithRuntimeCode) {
  // Unbounded state set: the boundary LP is unbounded along every direction.
  const fs::path dir = scratch("unbounded");
  std::ofstream(dir / "free.json") << R"({"A": [[1]], "B": [[1]], "N": 2, "Q": [[1]], "R": [[1]], "P": [[0]],
    "Hx": [[0]], "hx": [0], "Hu": [[0]], "hu": [0], "Hf": [[0]], "hf": [0]})";
  const CliResult r = cli("sample --problem " + (dir / "free.json").string() + " --n 5 --out " + dir.string(), dir);
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.stderr_text.find("UNBOUNDED_SET"), std::string::npos);
}

TEST(Cli, BenchmarkSmallestRun) {
  const fs::path dir = scratch("bench");
  const CliResult r = cli("benchmark " + pendulum() + " --n 1 --seed 7 --burn-in 0 --out " + dir.string(), dir);
  ASSERT_EQ(r.code, 0) << r.stderr_text;
  const auto doc = nlohmann::json::parse(slurp(dir / "benchmark.json"));
  ASSERT_EQ(doc.at("methods").size(), 4u);
  for (const auto& row : doc.at("methods")) {
    EXPECT_EQ(row.at("n_samples"), 1u);
    EXPECT_NEAR(row.at("cost_per_sample").get<double>(), row.at("solver_queries").get<double>(), 1e-12);
  }
  EXPECT_EQ(doc.at("methods").back().at("method"), "LMPC-HR");
  EXPECT_EQ(doc.at("methods").back().at("solver_queries"), 2u);
  for (const char* m : {"uvrs", "drs-hr", "bs-hr", "lmpc-hr"}) {
    EXPECT_TRUE(fs::exists(dir / (std::string(m) + ".csv"))) << m;
  }
  const std::string table = slurp(dir / "stdout.txt");
  EXPECT_NE(table.find("Solver Queries"), std::string::npos);
  EXPECT_NE(table.find("LMPC-HR"), std::string::npos);
}

TEST(Cli, PlotDataRowsAndCorners) {
  const fs::path dir = scratch("plot");
  ASSERT_EQ(cli("sample " + pendulum() + " --method uvrs --n 50 --seed 3 --log-rejections --out " + (dir / "u").string(), dir).code, 0);
  ASSERT_EQ(cli("sample " + pendulum() + " --method lmpc-hr --n 50 --seed 3 --out " + (dir / "l").string(), dir).code, 0);
  const CliResult r = cli("plot-data " + pendulum() + " --dataset uvrs=" + (dir / "u" / "samples.csv").string() +
                        " --dataset lmpc-hr=" + (dir / "l" / "samples.csv").string() + " --out " +
                        (dir / "plot.csv").string(),
                    dir);
  ASSERT_EQ(r.code, 0) << r.stderr_text;
  std::ifstream in(dir / "plot.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "x0,x1,feasible,method");
  std::vector<std::string> corners;
  std::size_t lmpc_rows = 0, uvrs_feasible = 0, uvrs_rejected = 0;
  while (std::getline(in, line)) {
    if (line.ends_with(",box")) corners.push_back(line);
    else if (line.ends_with(",1,lmpc-hr")) ++lmpc_rows;
    else if (line.ends_with(",0,lmpc-hr")) ADD_FAILURE() << "LMPC-HR rows are always feasible";
    else if (line.ends_with(",1,uvrs")) ++uvrs_feasible;
    else if (line.ends_with(",0,uvrs")) ++uvrs_rejected;
  }
  EXPECT_EQ(corners, (std::vector<std::string>{"-2.5,-3.5,,box", "2.5,-3.5,,box", "2.5,3.5,,box", "-2.5,3.5,,box"}));
  EXPECT_EQ(lmpc_rows, 50u);
  EXPECT_EQ(uvrs_feasible, 50u);
  EXPECT_GT(uvrs_rejected, 200u);
}

TEST(Cli, PlotDataNeedsTwoStates) {
  const fs::path dir = scratch("plot1d");
  std::ofstream(dir / "scalar.json") << R"({"A": [[1]], "B": [[1]], "N": 2, "Q": [[1]], "R": [[1]], "P": [[0]],
    "Hx": [[1], [-1]], "hx": [10, 10], "Hu": [[1], [-1]], "hu": [1, 1], "Hf": [[1], [-1]], "hf": [10, 10]})";
  std::ofstream(dir / "s.csv") << "x0,u0,value,chain_index\n0,0,0,0\n";
  const CliResult r = cli("plot-data --problem " + (dir / "scalar.json").string() + " --dataset a=" + (dir / "s.csv").string(), dir);
  EXPECT_EQ(r.code, 2);
}

TEST(Cli, ValidateReportsUniformity) {
  const fs::path dir = scratch("validate");
  ASSERT_EQ(cli("sample " + pendulum() + " --method uvrs --n 2000 --seed 4 --out " + dir.string(), dir).code, 0);
  const CliResult r = cli("validate " + pendulum() + " --samples " + (dir / "samples.csv").string() + " --out " +
                        (dir / "report.json").string(),
                    dir);
  ASSERT_EQ(r.code, 0) << r.stderr_text;
  const auto rep = nlohmann::json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(rep.at("cells").size(), 16u);
  EXPECT_EQ(rep.at("dof"), 15);
  EXPECT_EQ(rep.at("n_effective"), 2000u);
  EXPECT_GT(rep.at("p_value").get<double>(), 1e-4);
  EXPECT_NE(r.stderr_text.find("chi2"), std::string::npos);
}

TEST(Cli, CondenseDump) {
  const fs::path dir = scratch("dump");
  const CliResult r = cli("condense-dump " + pendulum() + " --out " + (dir / "c.csv").string(), dir);
  ASSERT_EQ(r.code, 0) << r.stderr_text;
  const std::string text = slurp(dir / "c.csv");
  std::size_t lines = 0;
  for (char c : text) lines += c == '\n' ? 1 : 0;
  EXPECT_EQ(lines, 95u);
  EXPECT_NE(text.find("2,STATE(0)"), std::string::npos);
  EXPECT_NE(text.find("TERMINAL"), std::string::npos);
}

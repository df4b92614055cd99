#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Result {
  int code;
  std::string out;
};

Result run(const std::string& args) {
  const std::string cmd = std::string(GOODWIN_CLI) + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) throw std::runtime_error("popen failed");
  std::string out;
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  const int status = pclose(pipe);
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("goodwin_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::vector<std::string>> csv_rows(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

const std::string kConfigs = GOODWIN_CONFIG_DIR;

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
  EXPECT_EQ(run("equilibrium --no-such-flag").code, 2);
  EXPECT_EQ(run("equilibrium --preset nonsense").code, 2);
  EXPECT_EQ(run("equilibrium --preset extended --config " + kConfigs + "/extended.json").code, 2);
  EXPECT_EQ(run("--help").code, 0);
}

TEST(Cli, MalformedConfigExitsWithTwo) {
  const auto dir = scratch("malformed");
  std::ofstream(dir / "bad.json") << "{\"b1\": 0.1, \"b2\": ";
  EXPECT_EQ(run("equilibrium --config " + (dir / "bad.json").string()).code, 2);
  std::ofstream(dir / "neg.json") << R"({"b1":-1,"b2":1,"b3":1,"g1":1,"g2":1,"f1":{"kind":"hill","K":1,"beta":1,"n":2}})";
  EXPECT_EQ(run("stability --config " + (dir / "neg.json").string()).code, 2);
  EXPECT_EQ(run("equilibrium --config " + (dir / "missing.json").string()).code, 2);
  EXPECT_EQ(run("simulate --preset extended --x0 -1,2,3 --out " + (dir / "x.csv").string()).code, 2);
}

TEST(Cli, NumericalFailureExitsWithThree) {
  const auto dir = scratch("numerical");
  EXPECT_EQ(run("simulate --preset extended --rtol 1e-300 --atol 0 --out " + (dir / "t.csv").string()).code, 3);
  // M(T0) <= 8: no Hopf family
  EXPECT_EQ(run("hopf-sweep --config " + kConfigs + "/stable_n4.json --t0 1 --no-simulate").code, 3);
}

TEST(Cli, EquilibriumEmbedsConfigAndIsDeterministic) {
  const auto a = run("equilibrium --config " + kConfigs + "/extended.json");
  const auto b = run("equilibrium --config " + kConfigs + "/extended.json");
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  const auto j = json::parse(a.out);
  EXPECT_EQ(j["config"]["f2"]["beta"], 10.0);
  EXPECT_NEAR(j["equilibrium"]["T0"].get<double>(), 1.4169, 1e-4);
}

TEST(Cli, StabilityOfExtendedModel) {
  const auto r = run("stability --preset extended");
  ASSERT_EQ(r.code, 0);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["stability"]["verdict"], "unstable");
  EXPECT_GT(j["stability"]["theta0"].get<double>(), 0.0);
  EXPECT_EQ(j["theorem1"]["class"], "instability-possible");
}

TEST(Cli, SimulateWritesFullPrecisionCsvAndSidecar) {
  const auto dir = scratch("simulate");
  const auto csv = dir / "run.csv";
  ASSERT_EQ(run("simulate --preset extended --t-end 120 --points 121 --out " + csv.string()).code, 0);
  const auto first = slurp(csv);
  ASSERT_EQ(run("simulate --preset extended --t-end 120 --points 121 --out " + csv.string()).code, 0);
  EXPECT_EQ(first, slurp(csv));
  const auto rows = csv_rows(first);
  ASSERT_GE(rows.size(), 122u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"t", "R", "L", "T"}));
  EXPECT_EQ(rows[1], (std::vector<std::string>{"0", "1", "6", "2"}));
  const auto meta = json::parse(slurp(dir / "run.json"));
  EXPECT_EQ(meta["config"]["b1"], 0.1);
  EXPECT_EQ(meta["t_end"], 120.0);
  EXPECT_EQ(meta["integration"]["rtol"], 1e-9);
}

TEST(Cli, SimulatePicogramReading) {
  const auto dir = scratch("pg");
  ASSERT_EQ(run("simulate --preset extended --t-end 10 --points 11 --r-unit pg --out " + (dir / "t.csv").string()).code,
            0);
  const auto rows = csv_rows(slurp(dir / "t.csv"));
  EXPECT_EQ(rows[1][1], "0.001");
}

TEST(Cli, HopfSweepFlipsAtZero) {
  const auto r = run("hopf-sweep --preset extended --b 1 --mu-min -1e-3 --mu-max 1e-3 --points 5 --no-simulate");
  ASSERT_EQ(r.code, 0);
  EXPECT_EQ(r.out.rfind("# {", 0), 0u);  // config line
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"mu", "g1", "g2", "theta0", "max_re_eigenvalue", "stability",
                                                "oscillation"}));
  EXPECT_EQ(rows[1][5], "stable");
  EXPECT_EQ(rows[2][5], "stable");
  EXPECT_EQ(rows[3][5], "critical");
  EXPECT_EQ(rows[4][5], "unstable");
  EXPECT_EQ(rows[5][5], "unstable");
  EXPECT_LT(std::stod(rows[1][4]), 0.0);
  EXPECT_GT(std::stod(rows[5][4]), 0.0);
}

TEST(Cli, HopfSweepSimulatesMembers) {
  const auto r = run("hopf-sweep --preset extended --mu-min -0.5 --mu-max 0.5 --points 2 --jobs 2");
  ASSERT_EQ(r.code, 0);
  const auto rows = csv_rows(r.out);
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[1][6], "equilibrium");
  EXPECT_EQ(rows[2][6], "periodic");
}

TEST(Cli, OscillateSamplingIsDeterministicAcrossJobs) {
  const std::string base = "oscillate --preset extended --samples 6 --seed 3";
  const auto a = run(base + " --jobs 1");
  const auto b = run(base + " --jobs 3");
  ASSERT_EQ(a.code, 0);
  ASSERT_EQ(b.code, 0);
  auto ja = json::parse(a.out);
  auto jb = json::parse(b.out);
  EXPECT_EQ(ja["sampling"], jb["sampling"]);
  EXPECT_EQ(ja["report"], jb["report"]);
  EXPECT_EQ(ja["report"]["omega_class"], "periodic");
  EXPECT_EQ(ja["sampling"]["seed"], 3);
}

TEST(Cli, MpCheck) {
  const auto gs = json::parse(run("mp-check --preset goodwin-smith").out);
  EXPECT_TRUE(gs["check"]["satisfied"].get<bool>());
  const auto ext = json::parse(run("mp-check --preset extended").out);
  EXPECT_FALSE(ext["check"]["satisfied"].get<bool>());
  EXPECT_FALSE(ext["check"].contains("shift_a"));
}

TEST(Cli, ReproducePaperExitCodeFollowsComparison) {
  const auto dir = scratch("reproduce");
  const auto r = run("reproduce-paper --skip-limit-cycle --out-dir " + dir.string());
  const auto report = json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(r.code, report["all_pass"].get<bool>() ? 0 : 1);
  EXPECT_TRUE(fs::exists(dir / "comparison.csv"));
  EXPECT_TRUE(fs::exists(dir / "trajectory_extended_ng.csv"));
  EXPECT_TRUE(fs::exists(dir / "trajectory_goodwin_smith_pg.csv"));
  EXPECT_EQ(report["chosen_r_unit"], "ng");
}

TEST(Cli, ReproduceWithZeroGainMatchesClassical) {
  const auto dir = scratch("gain0");
  run("reproduce-paper --skip-limit-cycle --f2-gain 0 --out-dir " + dir.string());
  const auto report = json::parse(slurp(dir / "report.json"));
  EXPECT_EQ(report["equilibria"]["extended"], report["equilibria"]["goodwin_smith"]);
  EXPECT_EQ(report["stability"]["extended"]["theta0"], report["stability"]["goodwin_smith"]["theta0"]);
  EXPECT_EQ(slurp(dir / "trajectory_extended_ng.csv"), slurp(dir / "trajectory_goodwin_smith_ng.csv"));
}

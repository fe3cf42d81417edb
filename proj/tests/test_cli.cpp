#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "netbf/experiment.hpp"

namespace fs = std::filesystem;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("netbf_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Result run(const std::string& args) {
    const fs::path o = dir_ / "stdout.txt", e = dir_ / "stderr.txt";
    const std::string cmd = std::string("\"") + NETBF_CLI_PATH + "\" " + args + " >\"" + o.string() + "\" 2>\"" +
                            e.string() + "\"";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(o), slurp(e)};
  }

  fs::path write_config(const std::string& name, const std::string& body) {
    const fs::path p = dir_ / name;
    std::ofstream(p, std::ios::binary) << body;
    return p;
  }

  fs::path dir_;
};

const std::string kSmoke = std::string(NETBF_SCENARIO_DIR) + "/smoke.ini";

std::size_t line_count(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_F(Cli, MinimalRunWritesThreeRowsPerScheme) {
  const auto r = run("run \"" + kSmoke + "\" --out \"" + (dir_ / "a").string() + "\"");
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* s : {"BeamformNoDl", "BestRelay", "AfNoPowerControl"}) {
    const std::string csv = slurp(dir_ / "a" / (std::string(s) + "_UnitVariance.csv"));
    EXPECT_EQ(line_count(csv), 4U) << s;
    EXPECT_EQ(csv.rfind(netbf::kCsvHeader, 0), 0U);
  }
  const std::string summary = slurp(dir_ / "a" / "summary.txt");
  EXPECT_FALSE(summary.empty());
  EXPECT_EQ(r.out, summary);
}

TEST_F(Cli, RerunIsByteIdenticalUnderAnyWorkerCount) {
  ASSERT_EQ(run("run \"" + kSmoke + "\" --out \"" + (dir_ / "a").string() + "\" --workers 1").code, 0);
  ASSERT_EQ(run("run \"" + kSmoke + "\" --out \"" + (dir_ / "b").string() + "\" --workers 1").code, 0);
  ASSERT_EQ(run("run \"" + kSmoke + "\" --out \"" + (dir_ / "c").string() + "\" --workers 6").code, 0);
  for (const auto& entry : fs::directory_iterator(dir_ / "a")) {
    const auto name = entry.path().filename();
    EXPECT_EQ(slurp(entry.path()), slurp(dir_ / "b" / name)) << name;
    EXPECT_EQ(slurp(entry.path()), slurp(dir_ / "c" / name)) << name;
  }
}

TEST_F(Cli, FlagsOverrideConfig) {
  ASSERT_EQ(run("run \"" + kSmoke + "\" --out \"" + (dir_ / "a").string() + "\" --trials 500 --seed 99").code, 0);
  const std::string csv = slurp(dir_ / "a" / "BestRelay_UnitVariance.csv");
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    EXPECT_NE(line.find(",500,"), std::string::npos) << line;
    EXPECT_EQ(line.substr(line.rfind(',') + 1), "99");
  }
  EXPECT_EQ(rows, 3);

  ASSERT_EQ(run("run \"" + kSmoke + "\" --out \"" + (dir_ / "b").string() + "\" --trials 500 --seed 100").code, 0);
  EXPECT_NE(slurp(dir_ / "a" / "BeamformNoDl_UnitVariance.csv"), slurp(dir_ / "b" / "BeamformNoDl_UnitVariance.csv"));
}

TEST_F(Cli, ConfigParseErrorExitsTwoWithPosition) {
  const auto cfg = write_config("bad.ini", "[experiment]\nschemes = BestRelay\n[power]\nstep_db = zero\n");
  const auto r = run("run \"" + cfg.string() + "\" --out \"" + (dir_ / "o").string() + "\"");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find(cfg.string() + ":4:11:"), std::string::npos) << r.err;
  EXPECT_FALSE(fs::exists(dir_ / "o"));
}

TEST_F(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run("").code, 2);
  EXPECT_EQ(run("run").code, 2);
  EXPECT_EQ(run("run \"" + kSmoke + "\" --bogus").code, 2);
  EXPECT_EQ(run("run \"" + kSmoke + "\" --trials 0").code, 2);
  EXPECT_EQ(run("--help").code, 0);
}

TEST_F(Cli, RuntimeFailuresExitOne) {
  const auto missing = run("run \"" + (dir_ / "nope.ini").string() + "\"");
  EXPECT_EQ(missing.code, 1);
  EXPECT_NE(missing.err.find("nope.ini"), std::string::npos);

  // Output path is an existing regular file.
  const auto blocker = write_config("blocker", "x");
  const auto r = run("run \"" + kSmoke + "\" --out \"" + blocker.string() + "\"");
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("error"), std::string::npos);
}

TEST(Scenarios, EveryShippedConfigLoads) {
  int n = 0;
  for (const auto& entry : fs::directory_iterator(NETBF_SCENARIO_DIR)) {
    if (entry.path().extension() != ".ini") continue;
    ++n;
    netbf::ExperimentConfig cfg;
    ASSERT_NO_THROW(cfg = netbf::load_config(entry.path())) << entry.path();
    EXPECT_NO_THROW(cfg.validate()) << entry.path();
  }
  EXPECT_GE(n, 6);
}

TEST(Scenarios, UnequalPowerHalvesSecondRelay) {
  const auto cfg = netbf::load_config(std::string(NETBF_SCENARIO_DIR) + "/unequal_power.ini");
  EXPECT_EQ(cfg.relay_power_scale, (std::vector<double>{1.0, 0.5}));
}

// Copyright 2026 The iongate Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "test_util.hpp"

namespace iongate {
namespace {

namespace fs = std::filesystem;
using testing::source_path;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("iongate_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  /// Runs the CLI with `args`; stdout goes to out.txt and stderr to err.txt.
  int run(const std::string& args) {
    const std::string cmd = std::string(IONGATE_CLI) + " " + args + " >" + path("out.txt") + " 2>" + path("err.txt");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static std::string read(const std::string& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
  }

  std::string write_config(const std::string& name, const std::string& text) const {
    std::ofstream(path(name)) << text;
    return path(name);
  }

  static double value_of(const std::string& csv, const std::string& key) {
    const auto at = csv.find("\n" + key + ",");
    if (at == std::string::npos) return -1.0;
    return std::stod(csv.substr(at + key.size() + 2));
  }

  fs::path dir_;
};

TEST_F(CliTest, NoSubcommandIsUsageError) {
  EXPECT_EQ(run(""), 1);
  EXPECT_NE(read(path("err.txt")).find("Usage"), std::string::npos);
  EXPECT_EQ(run("frobnicate -c " + source_path("configs/paper_100us")), 1);
  EXPECT_EQ(run("simulate"), 1);
  EXPECT_EQ(run("simulate -c " + source_path("configs/paper_100us") + " --shots 0"), 1);
}

TEST_F(CliTest, HelpExitsCleanly) {
  EXPECT_EQ(run("--help"), 0);
  EXPECT_NE(read(path("out.txt")).find("scan-tg"), std::string::npos);
}

TEST_F(CliTest, ConfigProblemsExitTwo) {
  EXPECT_EQ(run("simulate -c " + path("missing.cfg")), 2);
  const std::string bad = write_config("bad.cfg", "[gate]\nt_g_us = 100\n[noise]\nheating_rat = 4\n");
  EXPECT_EQ(run("simulate -c " + bad), 2);
  const std::string err = read(path("err.txt"));
  EXPECT_NE(err.find("line 4"), std::string::npos);
  EXPECT_NE(err.find("heating_rat"), std::string::npos);
}

TEST_F(CliTest, UnattainableGateExitsThree) {
  const std::string cfg = write_config("fast.cfg", "[gate]\nt_g_us = 0.001\n");
  EXPECT_EQ(run("simulate -c " + cfg), 3);
  EXPECT_NE(read(path("err.txt")).find("attainable range"), std::string::npos);
}

TEST_F(CliTest, SimulateShippedConfig) {
  ASSERT_EQ(run("simulate -c " + source_path("configs/paper_100us") + " -o " + path("sim.csv")), 0);
  const std::string csv = read(path("sim.csv"));
  EXPECT_EQ(csv.rfind("quantity,value\n", 0), 0u);
  EXPECT_NEAR(value_of(csv, "fidelity"), 0.9975, 0.0007);
  EXPECT_TRUE(read(path("out.txt")).empty());
}

TEST_F(CliTest, ScanNListsOddGateCounts) {
  ASSERT_EQ(run("scan-n -c " + source_path("configs/paper_30us") + " --fock-dim 8"), 0);
  const std::string csv = read(path("out.txt"));
  EXPECT_EQ(csv.rfind("n_gates,bell_error,stat_sigma\n", 0), 0u);
  for (const char* n : {"\n1,", "\n3,", "\n5,", "\n7,", "\n9,"}) EXPECT_NE(csv.find(n), std::string::npos) << n;
  EXPECT_NE(csv.find("# fit_a="), std::string::npos);
}

TEST_F(CliTest, BudgetWritesSixRowsAndTotal) {
  const std::string cfg = write_config("b.cfg", "[gate]\nt_g_us = 100\n[noise]\nheating_rate_per_s = 4\n[run]\nfock_dim = 8\n");
  ASSERT_EQ(run("budget -c " + cfg), 0);
  const std::string csv = read(path("out.txt"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 8);
  EXPECT_NE(csv.find("\nheating,"), std::string::npos);
}

TEST_F(CliTest, SampledOutputIndependentOfThreads) {
  const std::string cfg = write_config(
      "s.cfg", "[gate]\nt_g_us = 100\n[noise]\nheating_rate_per_s = 40\nfield_50hz_amp_rad_per_s = 51000\n"
               "[spam]\nreadout_error = 0.0017\n[run]\nmode = sampled\nshots = 2000\nseed = 5\nfock_dim = 8\n");
  ASSERT_EQ(run("parity-scan -c " + cfg + " --threads 1 -o " + path("a.csv")), 0);
  ASSERT_EQ(run("parity-scan -c " + cfg + " --threads 3 -o " + path("b.csv")), 0);
  EXPECT_EQ(read(path("a.csv")), read(path("b.csv")));
  ASSERT_EQ(run("parity-scan -c " + cfg + " --seed 6 -o " + path("c.csv")), 0);
  EXPECT_NE(read(path("a.csv")), read(path("c.csv")));
}

TEST_F(CliTest, CalibrateReproducesShippedConstants) {
  const std::string cfg = write_config("c.cfg", "[gate]\nt_g_us = 100\n");
  ASSERT_EQ(run("calibrate -c " + cfg), 0);
  const std::string out = read(path("out.txt"));
  EXPECT_NE(out.find("[atom]\nlightshift_constant = 2261807156310.2"), std::string::npos) << out;
  EXPECT_NE(out.find("scattering_constant = 291408"), std::string::npos) << out;
}

}  // namespace
}  // namespace iongate

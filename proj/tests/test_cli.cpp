// Copyright The hallhom Authors.
// SPDX-License-Identifier: Apache-2.0

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "hallhom/cli.hpp"

using namespace hallhom;
namespace fs = std::filesystem;

namespace
{

struct CliRun
{
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args)
{
  args.insert(args.begin(), "hallhom");
  std::vector<const char *> argv;
  for (const auto &a : args)
    argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path &p)
{
  std::ifstream is(p, std::ios::binary);
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

class CliTest : public ::testing::Test
{
protected:
  void SetUp() override
  {
    dir_ = fs::temp_directory_path() /
           ("hallhom_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string out(const std::string &sub = "out") const { return (dir_ / sub).string(); }

  fs::path write(const std::string &name, const std::string &text) const
  {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  fs::path dir_;
};

} // namespace

TEST_F(CliTest, UsageErrors)
{
  EXPECT_EQ(run({}).code, kExitConfig);
  EXPECT_EQ(run({"bogus"}).code, kExitConfig);
  EXPECT_EQ(run({"--help"}).code, kExitOk);
  EXPECT_EQ(run({"cell-solve", "--help"}).code, kExitOk);
  EXPECT_EQ(run({"cell-solve", "--nope", "1"}).code, kExitConfig);
  const CliRun r = run({"cell-solve", "--alpha1", "-1", "--out", out()});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("alpha1 must be > 0"), std::string::npos);
}

TEST_F(CliTest, ConfigFileErrors)
{
  const auto unknown = write("u.cfg", "# comment\nalpha1 = 2\nbogus = 3\n");
  CliRun r = run({"cell-solve", "--config", unknown.string()});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("unknown key 'bogus'"), std::string::npos) << r.err;

  const auto dup = write("d.cfg", "alpha1 = 2\nalpha1 = 3\n");
  r = run({"cell-solve", "--config", dup.string()});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find(":2:"), std::string::npos) << r.err;

  // a key valid for another subcommand is still rejected here
  const auto other = write("o.cfg", "theta = 0.1\n");
  EXPECT_EQ(run({"sweep-cross", "--config", other.string()}).code, kExitConfig);

  EXPECT_EQ(run({"cell-solve", "--config", (dir_ / "missing.cfg").string()}).code, kExitIo);

  r = run({"sweep-fiber3d", "--h", "1", "--out", out()});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("3D run needs 3"), std::string::npos) << r.err;
  EXPECT_EQ(run({"sweep-cross", "--t", "0.1,0.2", "--out", out()}).code, kExitConfig);
}

TEST_F(CliTest, CellSolveConstant)
{
  const CliRun r = run({"cell-solve", "--geometry", "constant", "--res", "8", "--alpha1", "3", "--beta1", "1", "--h",
                     "2", "--out", out()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = Json::parse(slurp(dir_ / "out" / "effective_tensor.json"));
  EXPECT_EQ(j["dim"], 2);
  EXPECT_NEAR(j["sigma_star"][0].get<double>(), 3.0, 1e-12);
  EXPECT_NEAR(j["sigma_star"][1].get<double>(), -2.0, 1e-12);
  EXPECT_NEAR(j["sigma_star"][2].get<double>(), 2.0, 1e-12);
  for (const char *key : {"resolution", "h", "phases", "residuals", "iterations", "wall_time_s"})
    EXPECT_TRUE(j.contains(key)) << key;
}

TEST_F(CliTest, FlagsOverrideConfigFile)
{
  const auto cfg = write("c.cfg", "geometry = laminate\nfraction = 0.5\naxis = 0\nalpha2 = 4\nres = 8\n");
  const CliRun r = run({"cell-solve", "--config", cfg.string(), "--alpha2", "9", "--out", out()});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = Json::parse(slurp(dir_ / "out" / "effective_tensor.json"));
  // normal direction: harmonic mean of 1 and 9
  EXPECT_NEAR(j["sigma_star"][0].get<double>(), 1.8, 1e-8);
  EXPECT_NEAR(j["sigma_star"][3].get<double>(), 5.0, 1e-8);
}

TEST_F(CliTest, NonConvergenceExitCode)
{
  const CliRun r = run({"cell-solve", "--geometry", "cross", "--t", "0.25", "--res", "16", "--alpha2", "10", "--max-iter",
                     "1", "--out", out()});
  EXPECT_EQ(r.code, kExitNonConvergence);
  const Json j = Json::parse(slurp(dir_ / "out" / "effective_tensor.json"));
  EXPECT_EQ(j["status"], "nonconvergence");
  EXPECT_TRUE(j.contains("best_residual"));
}

TEST_F(CliTest, IoExitCode)
{
  write("file", "x");
  EXPECT_EQ(run({"mask", "--geometry", "checkerboard", "--res", "8", "--out", (dir_ / "file" / "sub").string()}).code,
            kExitIo);
  EXPECT_EQ(run({"mask", "--mask", (dir_ / "nope.txt").string()}).code, kExitIo);
}

TEST_F(CliTest, DegenerateTransformIsAConfigError)
{
  const CliRun r = run({"dykhne", "--h", "0", "--out", out()});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(CliTest, MaskRoundTripThroughCellSolve)
{
  ASSERT_EQ(run({"mask", "--geometry", "cross", "--t", "0.25", "--res", "16", "--out", out()}).code, kExitOk);
  const fs::path mask = dir_ / "out" / "mask.txt";
  const CliRun info = run({"mask", "--mask", mask.string()});
  ASSERT_EQ(info.code, kExitOk) << info.err;
  EXPECT_NE(info.out.find("theta=0.750000"), std::string::npos) << info.out;

  ASSERT_EQ(run({"cell-solve", "--geometry", "file", "--mask", mask.string(), "--alpha2", "4", "--out", out("a")}).code,
            kExitOk);
  ASSERT_EQ(run({"cell-solve", "--geometry", "cross", "--t", "0.25", "--res", "16", "--alpha2", "4", "--out", out("b")})
              .code,
            kExitOk);
  const Json a = Json::parse(slurp(dir_ / "a" / "effective_tensor.json"));
  const Json b = Json::parse(slurp(dir_ / "b" / "effective_tensor.json"));
  EXPECT_EQ(a["sigma_star"], b["sigma_star"]);
}

TEST_F(CliTest, ThreeDimensionalMaskFile)
{
  ASSERT_EQ(run({"mask", "--geometry", "fiber", "--r", "0.3", "--res", "8", "--out", out()}).code, kExitOk);
  const std::string mask = (dir_ / "out" / "mask.txt").string();
  const CliRun r = run({"cell-solve", "--geometry", "file", "--mask", mask, "--out", out("a")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const Json j = Json::parse(slurp(dir_ / "a" / "effective_tensor.json"));
  EXPECT_EQ(j["dim"], 3);
  EXPECT_EQ(run({"cell-solve", "--geometry", "file", "--mask", mask, "--dim", "2", "--out", out("b")}).code,
            kExitConfig);
  EXPECT_EQ(run({"duality-check", "--geometry", "file", "--mask", mask, "--out", out("c")}).code, kExitConfig);
}

TEST_F(CliTest, SweepAndDualityOutputs)
{
  ASSERT_EQ(run({"sweep-cross", "--t", "0.25,0.125", "--res", "16", "--out", out()}).code, kExitOk);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "sweep_cross.csv"));
  EXPECT_TRUE(fs::exists(dir_ / "out" / "sweep_cross.json"));
  ASSERT_EQ(run({"sweep-fiber3d", "--r", "0.3", "--res", "10", "--out", out()}).code, kExitOk);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "sweep_fiber3d.csv"));
  const CliRun d = run({"duality-check", "--t", "0.25", "--res", "16", "--out", out()});
  ASSERT_EQ(d.code, kExitOk) << d.err;
  const Json j = Json::parse(slurp(dir_ / "out" / "duality.json"));
  EXPECT_LT(j["keller"]["deviation"].get<double>(), 0.05);
  ASSERT_EQ(run({"dykhne", "--theta", "0.1,0.01", "--out", out()}).code, kExitOk);
  EXPECT_TRUE(fs::exists(dir_ / "out" / "dykhne.csv"));
}

TEST_F(CliTest, NoTimingGivesIdenticalBytes)
{
  const std::vector<std::string> base{"sweep-cross", "--t", "0.25,0.125", "--res", "16", "--no-timing", "--out"};
  auto a = base, b = base;
  a.push_back(out("a"));
  b.push_back(out("b"));
  b.push_back("--threads");
  b.push_back("2");
  ASSERT_EQ(run(a).code, kExitOk);
  ASSERT_EQ(run(b).code, kExitOk);
  const std::string ca = slurp(dir_ / "a" / "sweep_cross.csv");
  EXPECT_FALSE(ca.empty());
  EXPECT_EQ(ca, slurp(dir_ / "b" / "sweep_cross.csv"));
}

TEST_F(CliTest, BinaryExitCodes)
{
  const std::string exe = HALLHOM_CLI_PATH;
  auto status = [&](const std::string &args) {
    const int s = std::system((exe + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status("cell-solve --geometry constant --res 8 --out " + out()), 0);
  EXPECT_EQ(status("cell-solve --alpha1 0 --out " + out()), 2);
  EXPECT_EQ(status("cell-solve --geometry cross --t 0.25 --res 16 --alpha2 10 --max-iter 1 --out " + out()), 3);
  EXPECT_EQ(status("mask --mask " + (dir_ / "absent").string()), 4);
}

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "critcf/cli.hpp"
#include "critcf/rhs.hpp"
#include "critcf/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("critcf_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  int run(std::vector<std::string> args, const critcf::cli::Hooks& hooks = {}) {
    args.insert(args.begin(), "critcf");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return critcf::cli::run(static_cast<int>(argv.size()), argv.data(), hooks, out_, err_);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static std::string slurp(const std::string& file) {
    std::ifstream in(file);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  }

  static json read_json(const std::string& file) { return json::parse(slurp(file)); }

  fs::path dir_;
  std::ostringstream out_, err_;
};

}  // namespace

TEST_F(Cli, SimulateWritesSeriesAndMetadata) {
  ASSERT_EQ(run({"simulate", "--mass", "0.3", "--init", "monodisperse:1", "--n", "512", "--t-end", "20",
                 "--out-dir", path("a")}),
            0)
      << err_.str();
  EXPECT_TRUE(fs::exists(path("a/trajectory.csv")));
  EXPECT_TRUE(fs::exists(path("a/moments.csv")));
  const auto meta = read_json(path("a/metadata.json"));
  EXPECT_EQ(meta["version"], critcf::kVersion);
  EXPECT_EQ(meta["status"], "ok");
  EXPECT_EQ(meta["threads"], 1);
  EXPECT_EQ(meta["config"]["n"], 512);
  EXPECT_EQ(meta["config"]["mode"], "auto");
  EXPECT_DOUBLE_EQ(meta["config"]["rtol"].get<double>(), 1e-10);
  const auto summary = read_json(path("a/summary.json"));
  EXPECT_TRUE(summary["gelation_onset_1pct"].is_null());
  EXPECT_NEAR(summary["m0"].get<double>(), summary["m0_closed_form"].get<double>(), 1e-6);
}

TEST_F(Cli, RerunsAreByteIdentical) {
  const std::vector<std::string> base = {"simulate", "--mass", "0.3", "--n", "256", "--t-end", "5", "--mode", "fft"};
  auto a = base, b = base;
  a.insert(a.end(), {"--out-dir", path("a")});
  b.insert(b.end(), {"--out-dir", path("b")});
  ASSERT_EQ(run(a), 0);
  ASSERT_EQ(run(b), 0);
  EXPECT_EQ(slurp(path("a/trajectory.csv")), slurp(path("b/trajectory.csv")));
  EXPECT_EQ(slurp(path("a/moments.csv")), slurp(path("b/moments.csv")));
}

TEST_F(Cli, EquilibriumVerdictForMassTwo) {
  ASSERT_EQ(run({"equilibrium", "--mass", "2", "--length", "100", "--out-dir", path("e")}), 0);
  const auto v = read_json(path("e/verdict.json"));
  EXPECT_EQ(v["kind"], "nonexistent");
  EXPECT_EQ(v["witness"]["index"], 1);
  EXPECT_NEAR(v["witness"]["value"].get<double>(), -2.0 / 3.0, 1e-15);
  EXPECT_EQ(slurp(path("e/table.csv")).substr(0, 11), "l,rho_tilde");
}

TEST_F(Cli, EquilibriumValidationBlockBelowHalf) {
  ASSERT_EQ(run({"equilibrium", "--mass", "0.3", "--out-dir", path("e")}), 0);
  const auto v = read_json(path("e/verdict.json"));
  EXPECT_EQ(v["kind"], "exists_unique");
  EXPECT_LE(v["validation"]["rhs_residual"].get<double>(), 1e-8);
}

TEST_F(Cli, ValidationFailuresExitTwo) {
  EXPECT_EQ(run({"simulate", "--mass", "-1", "--out-dir", path("x")}), 2);
  EXPECT_EQ(run({"simulate", "--mass", "0.3", "--n", "abc", "--out-dir", path("x")}), 2);
  EXPECT_EQ(run({"simulate", "--mass", "0.3", "--mode", "gpu", "--out-dir", path("x")}), 2);
  EXPECT_EQ(run({"simulate", "--no-such-flag", "1"}), 2);
  EXPECT_EQ(run({"equilibrium", "--out-dir", path("x")}), 2);
  EXPECT_NE(err_.str().find("--mass"), std::string::npos);
  EXPECT_EQ(run({"hj", "--mass", "0.3", "--eps", "0.01", "--out-dir", path("x")}), 2);
  EXPECT_EQ(run({"verify", "--suite", "nonsense", "--out-dir", path("x")}), 2);
  EXPECT_EQ(run({"bench", "--reps", "3", "--out-dir", path("x")}), 2);
  EXPECT_EQ(run({}), 2);
}

TEST_F(Cli, ConfigFileAndFlagOverride) {
  {
    std::ofstream c(path("c.json"));
    c << R"({"command": "equilibrium", "mass": 0.3, "length": 64})";
  }
  ASSERT_EQ(run({"equilibrium", "--config", path("c.json"), "--length", "128", "--out-dir", path("e")}), 0);
  const auto meta = read_json(path("e/metadata.json"));
  EXPECT_DOUBLE_EQ(meta["config"]["mass"].get<double>(), 0.3);
  EXPECT_EQ(meta["config"]["length"], 128);
}

TEST_F(Cli, ConfigFileRejectsUnknownAndMistyped) {
  {
    std::ofstream c(path("unknown.json"));
    c << R"({"mass": 0.3, "colour": "red"})";
  }
  EXPECT_EQ(run({"simulate", "--config", path("unknown.json"), "--out-dir", path("x")}), 2);
  EXPECT_NE(err_.str().find("colour"), std::string::npos);
  {
    std::ofstream c(path("typed.json"));
    c << R"({"mass": "0.3"})";
  }
  EXPECT_EQ(run({"simulate", "--config", path("typed.json"), "--out-dir", path("x")}), 2);
  {
    std::ofstream c(path("other.json"));
    c << R"({"command": "bench"})";
  }
  EXPECT_EQ(run({"simulate", "--config", path("other.json"), "--out-dir", path("x")}), 2);
  // A field of another command is unknown here.
  {
    std::ofstream c(path("cross.json"));
    c << R"({"length": 10})";
  }
  EXPECT_EQ(run({"simulate", "--config", path("cross.json"), "--out-dir", path("x")}), 2);
}

TEST_F(Cli, BenchSingleSizeDirectOnly) {
  ASSERT_EQ(run({"bench", "--sizes", "256", "--modes", "direct", "--reps", "5", "--out-dir", path("b")}), 0);
  const auto b = read_json(path("b/bench.json"));
  ASSERT_EQ(b["rows"].size(), 1u);
  EXPECT_EQ(b["rows"][0]["mode"], "direct");
  EXPECT_GT(b["rows"][0]["median_seconds"].get<double>(), 0.0);
  EXPECT_LE(b["rows"][0]["min_seconds"].get<double>(), b["rows"][0]["max_seconds"].get<double>());
}

TEST_F(Cli, BenchRefusesTimingsWhenCrossCheckFails) {
  critcf::cli::Hooks hooks;
  hooks.fft_override = [](const critcf::SizeDistribution& rho) {
    auto d = critcf::rhs(rho, critcf::ConvolutionMode::fft);
    d.d_densities[1] += 1e-6;
    return d;
  };
  EXPECT_EQ(run({"bench", "--sizes", "128,256", "--reps", "5", "--out-dir", path("b")}, hooks), 3);
  EXPECT_FALSE(fs::exists(path("b/bench.csv")));
  EXPECT_EQ(read_json(path("b/metadata.json"))["status"], "numerical_error");
}

TEST_F(Cli, VerifyExitReflectsChecks) {
  EXPECT_EQ(run({"verify", "--suite", "criterion-2", "--out-dir", path("v")}), 0);
  EXPECT_NE(out_.str().find("PASS criterion-2"), std::string::npos);
  EXPECT_TRUE(read_json(path("v/verify.json"))["passed"].get<bool>());
  // The h+ bound fails on part of the parameter square.
  EXPECT_EQ(run({"verify", "--suite", "criterion-9", "--out-dir", path("w")}), 1);
  EXPECT_FALSE(read_json(path("w/verify.json"))["passed"].get<bool>());
}

TEST_F(Cli, HjSnapshotsAtEvenTimes) {
  ASSERT_EQ(run({"hj", "--mass", "0.3", "--grid-dz", "0.01", "--t-end", "1", "--snapshots", "4",
                 "--out-dir", path("h")}),
            0)
      << err_.str();
  std::ifstream in(path("h/snapshots.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "node,value,time");
  std::vector<std::string> times;
  while (std::getline(in, line)) {
    const auto t = line.substr(line.rfind(',') + 1);
    if (times.empty() || times.back() != t) times.push_back(t);
  }
  EXPECT_EQ(times, (std::vector<std::string>{"0", "0.25", "0.5", "0.75", "1"}));
  const auto s = read_json(path("h/summary.json"));
  EXPECT_FALSE(s["band_flagged"].get<bool>());
}

TEST_F(Cli, HjXFormReportsBlowupFunctional) {
  ASSERT_EQ(run({"hj", "--mass", "2", "--form", "x", "--grid-dz", "0.1", "--t-end", "0.5", "--snapshots", "2",
                 "--out-dir", path("h")}),
            0)
      << err_.str();
  const auto s = read_json(path("h/summary.json"));
  EXPECT_DOUBLE_EQ(s["blowup_sigma"].get<double>(), 0.5);
  EXPECT_EQ(s["blowup"].size(), 3u);
}

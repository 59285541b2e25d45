#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "betazero/cli/commands.hpp"
#include "betazero/cli/config.hpp"
#include "betazero/cli/settings.hpp"
#include "support/tiny_config.hpp"

using namespace betazero;
using namespace betazero::cli;
using betazero::oracle::overrideKey;
using betazero::oracle::tinyConfig;
namespace fs = std::filesystem;

namespace {

std::string readFile(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> readLines(const fs::path& path) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) lines.push_back(line);
  return lines;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("betazero_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  Options options(const std::string& command, const std::string& env, const std::string& sub) {
    const auto cfgPath = dir_ / (env + ".toml");
    if (!fs::exists(cfgPath)) std::ofstream(cfgPath) << tinyConfig(env);
    Options o;
    o.command = command;
    o.env = env;
    o.configPath = cfgPath.string();
    o.outDir = (dir_ / sub).string();
    return o;
  }

  fs::path dir_;
};

std::vector<std::string> withoutWallClock(const std::vector<std::string>& rows) {
  std::vector<std::string> out;
  for (const auto& r : rows) out.push_back(r.substr(0, r.rfind(',')));
  return out;
}

}  // namespace

TEST(Config, ParsesSectionsAndTypes) {
  const auto c = Config::parse(
      "# comment\n[a]\nx = 1.5\nn = 3\nflag = true\nname = \"adam\"\n"
      "[b]\nlist = [1, 2, 3]\nnames = [\"p\", \"q\"]\n");
  EXPECT_EQ(c.getDouble("a.x"), 1.5);
  EXPECT_EQ(c.getInt("a.n"), 3);
  EXPECT_TRUE(c.getBool("a.flag"));
  EXPECT_EQ(c.getString("a.name"), "adam");
  EXPECT_EQ(c.getIntList("b.list"), (std::vector<int>{1, 2, 3}));
  EXPECT_EQ(c.getStringList("b.names"), (std::vector<std::string>{"p", "q"}));
  EXPECT_NO_THROW(c.rejectUnused());
}

TEST(Config, MissingKeyIsAnError) {
  const auto c = Config::parse("[a]\nx = 1\n");
  EXPECT_THROW((void)c.getDouble("a.y"), ConfigError);
}

TEST(Config, UnknownKeyIsAnError) {
  const auto c = Config::parse("[a]\nx = 1\ntypo = 2\n");
  (void)c.getInt("a.x");
  try {
    c.rejectUnused();
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("a.typo"), std::string::npos);
  }
}

TEST(Config, MalformedValuesAreErrors) {
  EXPECT_THROW((void)Config::parse("[a]\nx = 1\n").getBool("a.x"), ConfigError);
  EXPECT_THROW((void)Config::parse("[a]\nx = abc\n").getDouble("a.x"), ConfigError);
  EXPECT_THROW(Config::parse("[a]\nno equals sign\n"), ConfigError);
  EXPECT_THROW(Config::parse("[a]\nx = 1\nx = 2\n"), ConfigError);
}

TEST(Config, EveryPresetLoads) {
  for (const std::string env : {"lightdark5", "lightdark10", "rocksample-15-15",
                                "rocksample-20-20"})
    for (const std::string preset : {"desk", "paper"}) {
      const auto c = Config::load(presetPath(env, preset));
      EXPECT_NO_THROW(readSettings(c, parseEnv(env))) << env << "-" << preset;
    }
}

TEST(Config, PresetValues) {
  const auto s = readSettings(Config::load(presetPath("lightdark10", "paper")),
                              parseEnv("lightdark10"));
  EXPECT_EQ(s.iteration.nIterations, 30);
  EXPECT_EQ(s.iteration.nData, 500);
  EXPECT_EQ(s.iteration.offline.nOnline, 100);
  EXPECT_EQ(s.lightDark.lightY, 10.0);
  EXPECT_EQ(s.iteration.train.optimizer, OptimizerKind::Adam);
  const auto r = readSettings(Config::load(presetPath("rocksample-20-20", "paper")),
                              parseEnv("rocksample-20-20"));
  EXPECT_EQ(r.rockSample.gridSize, 20);
  EXPECT_EQ(r.iteration.offline.depth, 4);
  EXPECT_EQ(r.iteration.train.optimizer, OptimizerKind::RMSProp);
}

TEST(Config, UnknownEnvironmentRejected) {
  EXPECT_THROW(parseEnv("gridworld"), ConfigError);
}

TEST_F(CliTest, TrainWritesMetricsAndCheckpoint) {
  const auto o = options("train", "lightdark10", "run");
  ASSERT_EQ(runCommand(o), kOk);
  const fs::path out(o.outDir);
  const auto rows = readLines(out / "metrics.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], "# betazero metrics v1");
  EXPECT_EQ(rows[1],
            "iteration,meanHoldoutReturn,stdErr,policyLoss,valueLoss,bufferSize,wallClockSeconds");
  EXPECT_EQ(rows[2].substr(0, 2), "1,");
  EXPECT_TRUE(fs::exists(out / "checkpoints" / "iteration_001.ckpt"));
  EXPECT_EQ(readFile(out / "config.toml"), readFile(o.configPath));
}

TEST_F(CliTest, TrainIsDeterministic) {
  const auto a = options("train", "lightdark10", "a");
  const auto b = options("train", "lightdark10", "b");
  ASSERT_EQ(runCommand(a), kOk);
  ASSERT_EQ(runCommand(b), kOk);
  EXPECT_EQ(withoutWallClock(readLines(fs::path(a.outDir) / "metrics.csv")),
            withoutWallClock(readLines(fs::path(b.outDir) / "metrics.csv")));
  EXPECT_EQ(readFile(fs::path(a.outDir) / "checkpoints" / "iteration_001.ckpt"),
            readFile(fs::path(b.outDir) / "checkpoints" / "iteration_001.ckpt"));
}

TEST_F(CliTest, EvaluateNeedsCheckpoint) {
  EXPECT_EQ(runCommand(options("evaluate", "lightdark10", "eval")), kConfigError);
}

TEST_F(CliTest, EvaluateEveryMethod) {
  auto train = options("train", "lightdark10", "run");
  ASSERT_EQ(runCommand(train), kOk);
  for (const std::string method : {"search", "raw_policy", "raw_value"}) {
    auto o = options("evaluate", "lightdark10", "eval_" + method);
    o.checkpoint = (fs::path(train.outDir) / "checkpoints" / "iteration_001.ckpt").string();
    o.method = method;
    ASSERT_EQ(runCommand(o), kOk);
    const auto rows = readLines(fs::path(o.outDir) / "eval.csv");
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_EQ(rows[1], "env,method,mean,stdErr,nSeeds,failed");
    EXPECT_EQ(rows[2].rfind("lightdark10," + method + ",", 0), 0u) << rows[2];
  }
}

TEST_F(CliTest, CheckpointMustMatchEnvironment) {
  auto train = options("train", "lightdark10", "run");
  ASSERT_EQ(runCommand(train), kOk);
  auto o = options("evaluate", "rocksample-15-15", "eval");
  o.checkpoint = (fs::path(train.outDir) / "checkpoints" / "iteration_001.ckpt").string();
  EXPECT_EQ(runCommand(o), kConfigError);
}

TEST_F(CliTest, LaviIsUnsupportedForRockSample) {
  auto o = options("baseline", "rocksample-15-15", "lavi");
  o.method = "lavi";
  EXPECT_EQ(runCommand(o), kConfigError);
  EXPECT_EQ(runCommand(options("lavi", "rocksample-15-15", "lavi2")), kConfigError);
}

TEST_F(CliTest, LaviWritesGridAndEvaluation) {
  const auto o = options("lavi", "lightdark10", "lavi");
  ASSERT_EQ(runCommand(o), kOk);
  EXPECT_EQ(readLines(fs::path(o.outDir) / "lavi_grid.csv").size(), 2u + 625u);
  const auto rows = readLines(fs::path(o.outDir) / "eval.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[2].rfind("lightdark10,lavi,", 0), 0u);
}

TEST_F(CliTest, RolloutBaseline) {
  const auto o = options("baseline", "rocksample-15-15", "base");
  ASSERT_EQ(runCommand(o), kOk);
  const auto rows = readLines(fs::path(o.outDir) / "baseline.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[2].rfind("rocksample-15-15,rollout,", 0), 0u);
}

TEST_F(CliTest, SweepWritesFullGrids) {
  auto train = options("train", "lightdark10", "run");
  ASSERT_EQ(runCommand(train), kOk);
  auto o = options("sweep", "lightdark10", "sweep");
  o.checkpoint = (fs::path(train.outDir) / "checkpoints" / "iteration_001.ckpt").string();
  ASSERT_EQ(runCommand(o), kOk);
  for (const char* name : {"sweep_state.csv", "sweep_action.csv"}) {
    const auto rows = readLines(fs::path(o.outDir) / name);
    ASSERT_EQ(rows.size(), 2u + 121u) << name;
    EXPECT_EQ(rows[1], "k,alpha,mean,stdErr,nSeeds");
  }
}

TEST_F(CliTest, ZGridAblation) {
  auto train = options("train", "lightdark10", "run");
  ASSERT_EQ(runCommand(train), kOk);
  auto o = options("ablate", "lightdark10", "ablate");
  std::ofstream(o.configPath) << overrideKey(tinyConfig("lightdark10"), "ablate", "arms",
                                             "[\"zgrid\"]");
  o.checkpoint = (fs::path(train.outDir) / "checkpoints" / "iteration_001.ckpt").string();
  ASSERT_EQ(runCommand(o), kOk);
  const auto rows = readLines(fs::path(o.outDir) / "ablate.csv");
  ASSERT_EQ(rows.size(), 2u + 121u);
  EXPECT_EQ(rows[1], "arm,variant,z_q,z_n,mean,stdErr,nSeeds");
}

TEST_F(CliTest, TrainedAblationArms) {
  auto o = options("ablate", "lightdark10", "ablate");
  std::ofstream(o.configPath) << overrideKey(tinyConfig("lightdark10"), "ablate", "arms",
                                             "[\"qweight\", \"representation\", \"widening\"]");
  ASSERT_EQ(runCommand(o), kOk);
  const auto rows = readLines(fs::path(o.outDir) / "ablate.csv");
  ASSERT_EQ(rows.size(), 2u + 6u);
  EXPECT_EQ(rows[2].rfind("qweight,counts,", 0), 0u);
  EXPECT_EQ(rows[5].rfind("representation,mean,", 0), 0u);
  EXPECT_EQ(rows[7].rfind("widening,uniform,", 0), 0u);
}

TEST_F(CliTest, BadConfigExitsWithConfigError) {
  auto o = options("train", "lightdark10", "bad");
  std::ofstream(o.configPath) << tinyConfig("lightdark10") << "\n[extra]\nunknown = 1\n";
  EXPECT_EQ(runCommand(o), kConfigError);
  o.configPath = (dir_ / "missing.toml").string();
  EXPECT_EQ(runCommand(o), kConfigError);
}

TEST_F(CliTest, ZeroWorkersRejected) {
  auto o = options("train", "lightdark10", "w");
  o.workers = 0;
  EXPECT_EQ(runCommand(o), kConfigError);
}

#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "uikf/checks.hpp"
#include "uikf/cli.hpp"
#include "uikf/config.hpp"
#include "uikf/errors.hpp"
#include "uikf/sim.hpp"

namespace uikf {
namespace {

namespace fs = std::filesystem;

const char* kMinimal = R"({
  "schema": 1,
  "name": "mini",
  "duration": 2.0,
  "model": {"A": [[0, 1], [0, 0]], "E": [[0], [1]],
            "C": [[1, 0], [0, 1]], "R": [[1e-6, 0], [0, 1e-6]]},
  "signals": [{"kind": "step", "t_on": 0.5, "t_off": 1.5, "amplitude": 1.0}],
  "x0_true": [0, 0], "x0_hat": [1, 1],
  "seeds": [1, 2]
})";

const char* kSquare = R"({
  "schema": 1,
  "name": "square",
  "duration": 3.0,
  "model": {"A": [[0, 1], [0, 0]], "E": [[1, 0], [0, 1]], "G": [[1, 0], [0, 1]],
            "C": [[1, 0], [0, 1]], "Q": [[1e-6, 0], [0, 1e-6]],
            "R": [[1e-6, 0], [0, 1e-6]]},
  "signals": [{"kind": "step", "t_on": 1, "t_off": 2, "amplitude": 0.3}, {"kind": "zero"}],
  "x0_true": [0, 0], "x0_hat": [100, 100],
  "estimators": ["r4skf", "onestep", "uio"],
  "rmse_start": 0.0
})";

const char* kTooManyInputs = R"({
  "schema": 1,
  "model": {"A": [[0, 1], [0, 0]], "E": [[1, 0], [0, 1]],
            "C": [[1, 0]], "R": [[1e-6]]},
  "x0_true": [0, 0], "x0_hat": [0, 0]
})";

struct CliFixture : ::testing::Test {
  fs::path dir;

  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir = fs::temp_directory_path() / (std::string("uikf_") + info->name());
    fs::remove_all(dir);
    fs::create_directories(dir);
  }
  void TearDown() override { fs::remove_all(dir); }

  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = dir / name;
    std::ofstream(p) << text;
    return p;
  }

  int run(std::vector<std::string> args) {
    out.str("");
    err.str("");
    return runCli(args, out, err);
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::ostringstream out;
  std::ostringstream err;
};

TEST(Config, ParsesMinimalDocumentWithDefaults) {
  const ScenarioConfig c = parseScenarioConfig(kMinimal);
  EXPECT_EQ(c.name, "mini");
  EXPECT_DOUBLE_EQ(c.model.dt(), 0.01);
  EXPECT_EQ(c.model.dims().nx, 2);
  EXPECT_EQ(c.model.dims().nu, 1);  // absent B defaults to one zero column
  EXPECT_EQ(c.seeds.size(), 2u);
  EXPECT_EQ(c.estimators.size(), 2u);
  EXPECT_EQ(c.a2kf.window, 10u);
  EXPECT_EQ(c.stepCount(), 200u);
}

TEST(Config, ReportsOffendingField) {
  try {
    parseScenarioConfig(R"({"schema": 1, "model": {"A": [[1]]}, "x0_true": [0], "x0_hat": [0]})");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(e.field().find("model"), std::string::npos) << e.field();
  }
  EXPECT_THROW(parseScenarioConfig("{not json"), ConfigError);
  EXPECT_THROW(parseScenarioConfig(R"({"schema": 2})"), ConfigError);
}

TEST(Config, RejectsMoreInputsThanOutputs) {
  try {
    parseScenarioConfig(kTooManyInputs);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "model.E");
    EXPECT_NE(std::string(e.what()).find("rank condition"), std::string::npos);
  }
}

TEST(Config, UnknownEstimatorNamesField) {
  std::string text = kMinimal;
  text.replace(text.find("\"seeds\""), 0, "\"estimators\": [\"bogus\"], ");
  try {
    parseScenarioConfig(text);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "estimators[0]");
  }
}

TEST_F(CliFixture, SimulateMinimalWritesOutputs) {
  const fs::path cfg = write("mini.json", kMinimal);
  ASSERT_EQ(run({"simulate", "--config", cfg.string(), "--out", (dir / "o").string()}), kExitOk)
      << err.str();
  EXPECT_TRUE(fs::exists(dir / "o" / "mini_r4skf.csv"));
  EXPECT_TRUE(fs::exists(dir / "o" / "mini_a2kf.csv"));
  EXPECT_TRUE(fs::exists(dir / "o" / "mini_summary.csv"));
  const std::string header = slurp(dir / "o" / "mini_a2kf.csv").substr(0, 200);
  EXPECT_NE(header.find("t,"), std::string::npos);
  EXPECT_NE(header.find("Qd_diag"), std::string::npos);
  EXPECT_NE(out.str().find("r4skf"), std::string::npos);
}

TEST_F(CliFixture, SimulateRankViolationExitsOne) {
  const fs::path cfg = write("bad.json", kTooManyInputs);
  EXPECT_EQ(run({"simulate", "--config", cfg.string(), "--out", dir.string()}), kExitConfig);
  EXPECT_NE(err.str().find("rank condition"), std::string::npos) << err.str();
}

TEST_F(CliFixture, MissingConfigFileExitsOne) {
  EXPECT_EQ(run({"simulate", "--config", (dir / "nope.json").string()}), kExitConfig);
}

TEST_F(CliFixture, UnwritableOutputExitsThree) {
  const fs::path cfg = write("mini.json", kMinimal);
  const fs::path blocker = write("blocker", "x");
  EXPECT_EQ(run({"simulate", "--config", cfg.string(), "--out", blocker.string()}), kExitIo)
      << err.str();
}

TEST_F(CliFixture, UsageErrorsExitOne) {
  EXPECT_EQ(run({}), kExitConfig);
  EXPECT_EQ(run({"reproduce"}), kExitConfig);
  EXPECT_EQ(run({"reproduce", "--case", "4", "--out", dir.string()}), kExitConfig);
  EXPECT_EQ(run({"reproduce", "--case", "1", "--seeds", "x", "--out", dir.string()}),
            kExitConfig);
  EXPECT_EQ(run({"check", "everything"}), kExitConfig);
}

TEST_F(CliFixture, SquareConfigOneStepMatchesFilter) {
  const ScenarioConfig config = parseScenarioConfig(kSquare);
  const ScenarioResult result = runScenario(config);
  const auto& est = result.runs[0].estimates;
  ASSERT_EQ(est.size(), 3u);
  for (std::size_t i = 0; i < est[0].x_hat.size(); ++i) {
    const double scale = std::max(1.0, est[1].x_hat[i].cwiseAbs().maxCoeff());
    ASSERT_LE((est[0].x_hat[i] - est[1].x_hat[i]).cwiseAbs().maxCoeff() / scale, 1e-9);
    ASSERT_LE((est[2].x_hat[i] - est[1].x_hat[i]).cwiseAbs().maxCoeff() / scale, 1e-12);
  }
  const fs::path cfg = write("square.json", kSquare);
  EXPECT_EQ(run({"simulate", "--config", cfg.string(), "--out", dir.string()}), kExitOk)
      << err.str();
  EXPECT_TRUE(fs::exists(dir / "square_onestep.csv"));
}

TEST_F(CliFixture, ReproduceIsByteIdentical) {
  ASSERT_EQ(run({"reproduce", "--case", "1", "--seeds", "7", "--out", (dir / "a").string()}),
            kExitOk)
      << err.str();
  const std::string table = out.str();
  ASSERT_EQ(run({"reproduce", "--case", "1", "--seeds", "7", "--out", (dir / "b").string()}),
            kExitOk);
  EXPECT_EQ(out.str(), table);
  EXPECT_NE(table.find("d RMSE ratio r4skf/a2kf"), std::string::npos);
  for (const char* name : {"case1_r4skf.csv", "case1_a2kf.csv", "case1_summary.csv"}) {
    ASSERT_TRUE(fs::exists(dir / "a" / name)) << name;
    EXPECT_EQ(slurp(dir / "a" / name), slurp(dir / "b" / name)) << name;
  }
}

TEST_F(CliFixture, OutputDirFromEnvironment) {
  ::setenv("UIKF_OUT", (dir / "env").string().c_str(), 1);
  const int code = run({"reproduce", "--case", "2", "--seeds", "1", "--duration", "2"});
  ::unsetenv("UIKF_OUT");
  ASSERT_EQ(code, kExitOk) << err.str();
  EXPECT_TRUE(fs::exists(dir / "env" / "case2_summary.csv"));
}

TEST_F(CliFixture, CheckProperties) {
  EXPECT_EQ(run({"check", "properties"}), kExitOk) << err.str();
  EXPECT_EQ(out.str().find("FAIL"), std::string::npos) << out.str();
}

TEST_F(CliFixture, CheckStability) {
  const fs::path cfg = write("square.json", kSquare);
  EXPECT_EQ(run({"check", "stability", "--config", cfg.string()}), kExitOk) << err.str();
  EXPECT_NE(out.str().find("square"), std::string::npos) << out.str();
}

TEST(Checks, PropertySuitePasses) {
  for (const CheckResult& r : runPropertyChecks()) {
    EXPECT_TRUE(r.passed) << r.name << ": " << r.value << " vs " << r.threshold;
  }
}

}  // namespace
}  // namespace uikf

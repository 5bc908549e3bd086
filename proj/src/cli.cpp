#include "uikf/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "CLI11.hpp"
#include "uikf/checks.hpp"
#include "uikf/config.hpp"
#include "uikf/errors.hpp"
#include "uikf/io.hpp"
#include "uikf/onestep.hpp"
#include "uikf/sim.hpp"

namespace uikf {

namespace {

struct Options {
  int case_id = 1;
  std::string config_path;
  std::string out_dir;
  std::string seeds;
  std::optional<double> dt;
  std::optional<double> duration;
  std::string suite;
  int verbosity = 0;
};

std::vector<std::uint64_t> parseSeeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) {
      continue;
    }
    std::size_t used = 0;
    unsigned long long value = 0;
    try {
      value = std::stoull(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != item.size() || item.front() == '-') {
      throw ConfigError("--seeds", fmt::format("'{}' is not a seed", item));
    }
    seeds.push_back(value);
  }
  if (seeds.empty()) {
    throw ConfigError("--seeds", "empty seed list");
  }
  return seeds;
}

std::filesystem::path outputDir(const Options& opt) {
  if (!opt.out_dir.empty()) {
    return opt.out_dir;
  }
  if (const char* env = std::getenv("UIKF_OUT"); env != nullptr && *env != '\0') {
    return env;
  }
  return "out";
}

void applyOverrides(ScenarioConfig& config, const Options& opt) {
  if (!opt.seeds.empty()) {
    config.seeds = parseSeeds(opt.seeds);
  }
  if (opt.dt) {
    if (!(*opt.dt > 0.0)) {
      throw ConfigError("--dt", "must be > 0");
    }
    config.model = config.model.withDt(*opt.dt);
  }
  if (opt.duration) {
    config.duration = *opt.duration;
  }
  config.validate();
}

int runAndWrite(const ScenarioConfig& config, const Options& opt,
                std::ostream& out) {
  const ScenarioResult result = runScenario(config);
  printSummaryTable(out, result);
  const auto written = writeScenarioOutputs(outputDir(opt), result);
  if (opt.verbosity > 0) {
    for (const auto& p : written) {
      fmt::print(out, "wrote {}\n", p.string());
    }
  }
  if (result.mean_rmse.size() >= 2 &&
      result.mean_rmse[0].estimator == Estimator::kR4skf &&
      result.mean_rmse[1].estimator == Estimator::kA2kf) {
    const Vector ratio =
        result.mean_rmse[0].d.cwiseQuotient(result.mean_rmse[1].d);
    std::string line = "d RMSE ratio r4skf/a2kf:";
    for (Eigen::Index i = 0; i < ratio.size(); ++i) {
      line += fmt::format(" d{}={}", i + 1, formatNumber(ratio(i)));
    }
    out << line << '\n';
  }
  return kExitOk;
}

int cmdReproduce(const Options& opt, std::ostream& out) {
  if (opt.case_id < 1 || opt.case_id > 3) {
    throw ConfigError("--case", "expected 1, 2 or 3");
  }
  ScenarioConfig config = benchmarkCase(opt.case_id);
  applyOverrides(config, opt);
  return runAndWrite(config, opt, out);
}

int cmdSimulate(const Options& opt, std::ostream& out) {
  ScenarioConfig config = loadScenarioConfig(opt.config_path);
  applyOverrides(config, opt);
  return runAndWrite(config, opt, out);
}

int cmdCheck(const Options& opt, std::ostream& out, std::ostream& err) {
  if (opt.suite == "properties") {
    std::vector<std::string> failed;
    for (const auto& r : runPropertyChecks()) {
      fmt::print(out, "[{}] {} (value {}, limit {})\n", r.passed ? "PASS" : "FAIL",
                 r.name, formatNumber(r.value), formatNumber(r.threshold));
      if (!r.passed) {
        failed.push_back(r.name);
      }
    }
    if (!failed.empty()) {
      fmt::print(err, "failed properties:\n");
      for (const auto& name : failed) {
        fmt::print(err, "  {}\n", name);
      }
      return kExitEstimator;
    }
    return kExitOk;
  }

  std::vector<StabilityReport> reports;
  reports.push_back(stabilityReport("benchmark", benchmarkModel()));
  reports.push_back(stabilityReport("square", squareTestModel()));
  if (!opt.config_path.empty()) {
    const ScenarioConfig config = loadScenarioConfig(opt.config_path);
    reports.push_back(stabilityReport(config.name, config.model));
  }
  bool ok = true;
  for (const auto& r : reports) {
    const bool stable = r.rho_a_tilde < 1.0;
    ok = ok && stable;
    fmt::print(out, "{:<12} rho(A_bar) = {:<12} rho(A_tilde) = {:<12} {}\n",
               r.model, formatNumber(r.rho_a_bar), formatNumber(r.rho_a_tilde),
               stable ? "stable" : "UNSTABLE");
  }
  if (!ok) {
    fmt::print(err, "failed properties:\n  rho(A_tilde) < 1\n");
    return kExitEstimator;
  }
  return kExitOk;
}

}  // namespace

int runCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Simultaneous state and unknown-input estimation", "uikf"};
  app.require_subcommand(1);
  Options opt;
  app.add_flag("-v,--verbose", opt.verbosity, "Print extra progress output");

  auto addRunOptions = [&](CLI::App* cmd) {
    cmd->add_option("--out", opt.out_dir, "Output directory (default $UIKF_OUT or ./out)");
    cmd->add_option("--seeds", opt.seeds, "Comma-separated RNG seeds");
    cmd->add_option("--dt", opt.dt, "Sample period override [s]");
    cmd->add_option("--duration", opt.duration, "Horizon override [s]");
  };

  CLI::App* reproduce = app.add_subcommand("reproduce", "Run a built-in benchmark case");
  reproduce->add_option("--case", opt.case_id, "Benchmark case (1, 2 or 3)")
      ->required();
  addRunOptions(reproduce);

  CLI::App* simulate = app.add_subcommand("simulate", "Run a scenario from a config file");
  simulate->add_option("--config", opt.config_path, "Scenario JSON (schema 1)")
      ->required();
  addRunOptions(simulate);

  CLI::App* check = app.add_subcommand("check", "Run property or stability suites");
  check->add_option("suite", opt.suite, "properties | stability")
      ->required()
      ->check(CLI::IsMember({"properties", "stability"}));
  check->add_option("--config", opt.config_path, "Additional model for stability");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    fmt::print(err, "error: {}\n", e.what());
    return kExitConfig;
  }

  try {
    if (*reproduce) {
      return cmdReproduce(opt, out);
    }
    if (*simulate) {
      return cmdSimulate(opt, out);
    }
    return cmdCheck(opt, out, err);
  } catch (const ConfigError& e) {
    fmt::print(err, "config error: {}\n", e.what());
    return kExitConfig;
  } catch (const EstimatorError& e) {
    fmt::print(err, "estimator failure: {}\n", e.what());
    return kExitEstimator;
  } catch (const IoError& e) {
    fmt::print(err, "I/O failure: {}\n", e.what());
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    fmt::print(err, "I/O failure: {}\n", e.what());
    return kExitIo;
  } catch (const std::exception& e) {
    fmt::print(err, "estimator failure: {}\n", e.what());
    return kExitEstimator;
  }
}

}  // namespace uikf

#include "uikf/io.hpp"

#include <fstream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "uikf/errors.hpp"

namespace uikf {

std::string formatNumber(double value) { return fmt::format("{:.6g}", value); }

namespace {

void appendColumns(std::string& line, std::string_view prefix, Eigen::Index n) {
  for (Eigen::Index i = 1; i <= n; ++i) {
    line += fmt::format(",{}{}", prefix, i);
  }
}

void appendValues(std::string& line, const Vector& v) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    line += ',';
    line += formatNumber(v(i));
  }
}

std::ofstream openForWrite(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError(fmt::format("cannot write {}", path.string()));
  }
  return out;
}

}  // namespace

void writeTimeSeriesCsv(std::ostream& out, const TruthTrajectory& truth,
                        const EstimateSeries& series) {
  if (truth.x.empty()) {
    return;
  }
  const auto nx = truth.x.front().size();
  const auto nd = truth.d.front().size();
  const bool withQd = !series.qd_diag.empty();

  std::string header = "t";
  appendColumns(header, "x_true", nx);
  appendColumns(header, "x_hat", nx);
  appendColumns(header, "d_true", nd);
  appendColumns(header, "d_hat", nd);
  if (withQd) {
    appendColumns(header, "Qd_diag", nd);
  }
  out << header << '\n';

  for (std::size_t i = 0; i < truth.x.size(); ++i) {
    std::string line = formatNumber(truth.t[i]);
    appendValues(line, truth.x[i]);
    appendValues(line, series.x_hat[i]);
    appendValues(line, truth.d[i]);
    appendValues(line, series.d_hat[i]);
    if (withQd) {
      appendValues(line, series.qd_diag[i]);
    }
    out << line << '\n';
  }
}

void writeSummaryCsv(std::ostream& out,
                     const std::vector<ScenarioResult>& results) {
  if (results.empty() || results.front().mean_rmse.empty()) {
    return;
  }
  const auto& first = results.front().mean_rmse.front();
  std::string header = "case,estimator";
  appendColumns(header, "x", first.x.size());
  appendColumns(header, "d", first.d.size());
  out << header << '\n';
  for (const auto& result : results) {
    for (const auto& row : result.mean_rmse) {
      std::string line = fmt::format("{},{}", result.name, estimatorName(row.estimator));
      appendValues(line, row.x);
      appendValues(line, row.d);
      out << line << '\n';
    }
  }
}

void printSummaryTable(std::ostream& out, const ScenarioResult& result) {
  if (result.mean_rmse.empty()) {
    return;
  }
  const auto& first = result.mean_rmse.front();
  fmt::print(out, "RMSE, {} (mean over {} seed(s))\n", result.name,
             result.runs.size());
  std::string header = fmt::format("{:<10}", "method");
  for (Eigen::Index i = 1; i <= first.x.size(); ++i) {
    header += fmt::format("{:>12}", fmt::format("x{}", i));
  }
  for (Eigen::Index i = 1; i <= first.d.size(); ++i) {
    header += fmt::format("{:>12}", fmt::format("d{}", i));
  }
  out << header << '\n';
  for (const auto& row : result.mean_rmse) {
    std::string line = fmt::format("{:<10}", estimatorName(row.estimator));
    for (Eigen::Index i = 0; i < row.x.size(); ++i) {
      line += fmt::format("{:>12}", formatNumber(row.x(i)));
    }
    for (Eigen::Index i = 0; i < row.d.size(); ++i) {
      line += fmt::format("{:>12}", formatNumber(row.d(i)));
    }
    out << line << '\n';
  }
}

std::vector<std::filesystem::path> writeScenarioOutputs(
    const std::filesystem::path& dir, const ScenarioResult& result) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) {
    throw IoError(
        fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  }
  std::vector<std::filesystem::path> written;
  if (!result.runs.empty()) {
    const SeedRun& run = result.runs.front();
    for (const auto& series : run.estimates) {
      const auto path =
          dir / fmt::format("{}_{}.csv", result.name, estimatorName(series.estimator));
      auto out = openForWrite(path);
      writeTimeSeriesCsv(out, run.truth, series);
      if (!out) {
        throw IoError(fmt::format("write failed: {}", path.string()));
      }
      written.push_back(path);
    }
  }
  const auto summary = dir / fmt::format("{}_summary.csv", result.name);
  auto out = openForWrite(summary);
  writeSummaryCsv(out, {result});
  if (!out) {
    throw IoError(fmt::format("write failed: {}", summary.string()));
  }
  written.push_back(summary);
  return written;
}

}  // namespace uikf

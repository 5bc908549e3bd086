#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "uikf/sim.hpp"

namespace uikf {

/// Six significant digits, as used by every CSV and table this library emits.
std::string formatNumber(double value);

/// Columns: t, x_true1.., x_hat1.., d_true1.., d_hat1.. and, for the A2KF,
/// Qd_diag1... One row per measurement step.
void writeTimeSeriesCsv(std::ostream& out, const TruthTrajectory& truth,
                        const EstimateSeries& series);

/// Rows: scenario x estimator. Columns: case, estimator, x1.., d1...
void writeSummaryCsv(std::ostream& out, const std::vector<ScenarioResult>& results);

/// Fixed-width table of the seed-averaged RMSEs.
void printSummaryTable(std::ostream& out, const ScenarioResult& result);

/// Writes <dir>/<name>_<estimator>.csv for the first seed and
/// <dir>/<name>_summary.csv. Throws IoError on I/O failure.
std::vector<std::filesystem::path> writeScenarioOutputs(
    const std::filesystem::path& dir, const ScenarioResult& result);

}  // namespace uikf

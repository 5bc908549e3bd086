#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "uikf/a2kf.hpp"
#include "uikf/model.hpp"

namespace uikf {

/// Draws N(0, cov) using a symmetric square root, so PSD (even zero)
/// covariances are accepted.
Vector sampleGaussian(const Matrix& cov, std::mt19937_64& rng);

/// Scalar unknown-input channel. Window boundaries follow t_on < t <= t_off,
/// resolved with a 1e-9 s tolerance so that grid times k*dt land on the
/// intended side.
struct SignalSpec {
  enum class Kind { kZero, kStep, kWindowedSine, kSamples };
  Kind kind = Kind::kZero;
  double t_on = 0.0;
  double t_off = 0.0;
  double amplitude = 0.0;
  double f0 = 0.0;
  /// kSamples: zero-order hold of values[i] from times[i] on; 0 before.
  std::vector<double> times;
  std::vector<double> values;

  static SignalSpec zero();
  static SignalSpec step(double t_on, double t_off, double amplitude);
  static SignalSpec windowedSine(double t_on, double t_off, double amplitude,
                                 double f0);
  static SignalSpec samples(std::vector<double> times, std::vector<double> values);

  double operator()(double t) const;
};

enum class Estimator { kR4skf, kA2kf, kOneStep, kUio };

std::string_view estimatorName(Estimator e);
/// Throws std::invalid_argument on an unknown name.
Estimator parseEstimator(std::string_view name);

struct UioGainSpec {
  enum class Mode { kPinv, kSteadyState, kMatrix };
  Mode mode = Mode::kPinv;
  Matrix L;
};

struct ScenarioConfig {
  explicit ScenarioConfig(SystemModel m) : model(std::move(m)) {}

  std::string name = "scenario";
  SystemModel model;
  std::vector<SignalSpec> signals;  ///< one per unknown-input channel
  double duration = 10.0;
  std::vector<std::uint64_t> seeds{1};
  Vector x0_true;
  Vector x0_hat;
  Vector u;  ///< constant known input; empty means zero
  std::vector<Estimator> estimators{Estimator::kR4skf, Estimator::kA2kf};
  /// RMSE is accumulated over measurement times t_k >= rmse_start.
  double rmse_start = 1.0;
  double p0_scale = 10.0;
  A2KFOptions a2kf;
  UioGainSpec uio_gain;

  std::size_t stepCount() const;
  /// Throws ConfigError on an inconsistent configuration.
  void validate() const;
};

/// Sampled truth. Entry i describes step k = i + 1: x[i] = x_k, y[i] = y_k,
/// t[i] = t_k, and d[i] = d(t_{k-1}), the input acting over that step.
struct TruthTrajectory {
  Vector x0;
  std::vector<double> t;
  std::vector<Vector> x;
  std::vector<Vector> y;
  std::vector<Vector> d;
};

/// Euler-Maruyama on the shared first-order discretization:
///   x_k = A_d x_{k-1} + B_d u + E_d d(t_{k-1}) + G_d w,  w ~ N(0, Q / dt)
///   y_k = C_k x_k + v_k,                                  v ~ N(0, R_k)
TruthTrajectory generateTruth(const ScenarioConfig& config, std::uint64_t seed);

struct EstimateSeries {
  Estimator estimator = Estimator::kR4skf;
  std::vector<Vector> x_hat;  ///< aligned with TruthTrajectory::x
  std::vector<Vector> d_hat;  ///< aligned with TruthTrajectory::d
  std::vector<Vector> innovation;
  std::vector<Vector> qd_diag;  ///< A2KF only
  Vector rmse_x;
  Vector rmse_d;
};

struct SeedRun {
  std::uint64_t seed = 0;
  TruthTrajectory truth;
  std::vector<EstimateSeries> estimates;
};

struct RmseRow {
  Estimator estimator = Estimator::kR4skf;
  Vector x;
  Vector d;
};

struct ScenarioResult {
  std::string name;
  std::vector<SeedRun> runs;      ///< in config seed order
  std::vector<RmseRow> mean_rmse; ///< mean over seeds of per-seed RMSE
};

/// Per-channel root mean square error over entries [first, end).
Vector rmse(const std::vector<Vector>& estimate, const std::vector<Vector>& truth,
            std::size_t first = 0);

/// Runs one estimator over a truth trajectory. Failures are rethrown as
/// EstimatorError with scenario context.
EstimateSeries runEstimator(const ScenarioConfig& config,
                            const TruthTrajectory& truth, Estimator which,
                            std::uint64_t seed);

/// Drives every configured estimator over each seed's measurement stream.
/// Seeds run concurrently; results are merged in seed-list order.
ScenarioResult runScenario(const ScenarioConfig& config);

/// The unstable fourth-order benchmark plant (E = B, C selects x1, x2, x4).
SystemModel benchmarkModel(double dt = 0.01, double r_variance = 1e-7);

/// Benchmark case 1 (f0 = 0.5), 2 (f0 = 5) or 3 (R = 1e-5 I). Twenty seeds.
ScenarioConfig benchmarkCase(int which, double dt = 0.01, double duration = 10.0);

}  // namespace uikf

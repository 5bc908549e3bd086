#include "uikf/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <numbers>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>

#include "uikf/errors.hpp"
#include "uikf/onestep.hpp"
#include "uikf/r4skf.hpp"
#include "uikf/uio.hpp"

namespace uikf {

namespace {

constexpr double kBoundaryTol = 1e-9;

bool inWindow(double t, double on, double off) {
  return t > on + kBoundaryTol && t <= off + kBoundaryTol;
}

}  // namespace

Vector sampleGaussian(const Matrix& cov, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(cov.rows());
  for (Eigen::Index i = 0; i < z.size(); ++i) {
    z(i) = normal(rng);
  }
  if (cov.isDiagonal(0.0)) {
    return cov.diagonal().cwiseMax(0.0).cwiseSqrt().cwiseProduct(z);
  }
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetrize(cov));
  const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * root.cwiseProduct(z);
}

SignalSpec SignalSpec::zero() { return {}; }

SignalSpec SignalSpec::step(double t_on, double t_off, double amplitude) {
  SignalSpec s;
  s.kind = Kind::kStep;
  s.t_on = t_on;
  s.t_off = t_off;
  s.amplitude = amplitude;
  return s;
}

SignalSpec SignalSpec::windowedSine(double t_on, double t_off, double amplitude,
                                    double f0) {
  SignalSpec s = step(t_on, t_off, amplitude);
  s.kind = Kind::kWindowedSine;
  s.f0 = f0;
  return s;
}

SignalSpec SignalSpec::samples(std::vector<double> times,
                               std::vector<double> values) {
  if (times.size() != values.size()) {
    throw std::invalid_argument("sample times and values differ in length");
  }
  if (!std::is_sorted(times.begin(), times.end())) {
    throw std::invalid_argument("sample times must be non-decreasing");
  }
  SignalSpec s;
  s.kind = Kind::kSamples;
  s.times = std::move(times);
  s.values = std::move(values);
  return s;
}

double SignalSpec::operator()(double t) const {
  switch (kind) {
    case Kind::kZero:
      return 0.0;
    case Kind::kStep:
      return inWindow(t, t_on, t_off) ? amplitude : 0.0;
    case Kind::kWindowedSine:
      return inWindow(t, t_on, t_off)
                 ? amplitude * std::sin(2.0 * std::numbers::pi * f0 * (t - t_on))
                 : 0.0;
    case Kind::kSamples: {
      auto it = std::upper_bound(times.begin(), times.end(), t + kBoundaryTol);
      if (it == times.begin()) {
        return 0.0;
      }
      return values[static_cast<std::size_t>(std::distance(times.begin(), it)) - 1];
    }
  }
  return 0.0;
}

std::string_view estimatorName(Estimator e) {
  switch (e) {
    case Estimator::kR4skf:
      return "r4skf";
    case Estimator::kA2kf:
      return "a2kf";
    case Estimator::kOneStep:
      return "onestep";
    case Estimator::kUio:
      return "uio";
  }
  return "unknown";
}

Estimator parseEstimator(std::string_view name) {
  for (Estimator e : {Estimator::kR4skf, Estimator::kA2kf, Estimator::kOneStep,
                      Estimator::kUio}) {
    if (estimatorName(e) == name) {
      return e;
    }
  }
  throw std::invalid_argument(fmt::format("unknown estimator '{}'", name));
}

std::size_t ScenarioConfig::stepCount() const {
  return static_cast<std::size_t>(std::llround(duration / model.dt()));
}

void ScenarioConfig::validate() const {
  const auto& dims = model.dims();
  if (!(duration > 0.0)) {
    throw ConfigError("duration", "must be > 0");
  }
  if (seeds.empty()) {
    throw ConfigError("seeds", "at least one seed is required");
  }
  if (static_cast<Eigen::Index>(signals.size()) != dims.nd) {
    throw ConfigError("signals", fmt::format("expected {} channels, got {}",
                                             dims.nd, signals.size()));
  }
  if (x0_true.size() != dims.nx) {
    throw ConfigError("x0_true", fmt::format("expected length {}", dims.nx));
  }
  if (x0_hat.size() != dims.nx) {
    throw ConfigError("x0_hat", fmt::format("expected length {}", dims.nx));
  }
  if (u.size() != 0 && u.size() != dims.nu) {
    throw ConfigError("u", fmt::format("expected length {}", dims.nu));
  }
  if (estimators.empty()) {
    throw ConfigError("estimators", "at least one estimator is required");
  }
  for (Estimator e : estimators) {
    if (e == Estimator::kOneStep && !isSquareCase(dims)) {
      throw ConfigError("estimators",
                        "onestep requires n_x = n_y = n_d (square case)");
    }
  }
  if (a2kf.window == 0) {
    throw ConfigError("a2kf.window", "must be >= 1");
  }
  if (uio_gain.mode == UioGainSpec::Mode::kMatrix &&
      (uio_gain.L.rows() != dims.nx || uio_gain.L.cols() != dims.ny)) {
    throw ConfigError("uio.gain", fmt::format("expected a {}x{} matrix",
                                              dims.nx, dims.ny));
  }
  if (!(p0_scale > 0.0)) {
    throw ConfigError("r4skf.p0_scale", "must be > 0");
  }
}

namespace {

Vector knownInput(const ScenarioConfig& config) {
  return config.u.size() == 0 ? Vector::Zero(config.model.dims().nu) : config.u;
}

Vector evaluateSignals(const ScenarioConfig& config, double t) {
  Vector d(static_cast<Eigen::Index>(config.signals.size()));
  for (std::size_t i = 0; i < config.signals.size(); ++i) {
    d(static_cast<Eigen::Index>(i)) = config.signals[i](t);
  }
  return d;
}

std::size_t firstScoredIndex(const ScenarioConfig& config,
                             const TruthTrajectory& truth) {
  const auto it = std::lower_bound(truth.t.begin(), truth.t.end(),
                                   config.rmse_start - kBoundaryTol);
  return static_cast<std::size_t>(std::distance(truth.t.begin(), it));
}

}  // namespace

TruthTrajectory generateTruth(const ScenarioConfig& config, std::uint64_t seed) {
  const SystemModel& model = config.model;
  const double dt = model.dt();
  const std::size_t steps = config.stepCount();
  const Vector u = knownInput(config);
  std::mt19937_64 rng(seed);

  TruthTrajectory truth;
  truth.x0 = config.x0_true;
  truth.t.reserve(steps);
  truth.x.reserve(steps);
  truth.y.reserve(steps);
  truth.d.reserve(steps);

  Vector x = config.x0_true;
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t_prev = static_cast<double>(k - 1) * dt;
    const DiscretizedModel dm = discretize(model, t_prev);
    const Vector d = evaluateSignals(config, t_prev);
    const Vector w = sampleGaussian(model.Q(t_prev) / dt, rng);
    x = dm.Ad * x + dm.Bd * u + dm.Ed * d + dm.Gd * w;
    if (!x.allFinite()) {
      throw NumericalError(fmt::format(
          "truth state is not finite at t = {}; shorten the horizon",
          static_cast<double>(k) * dt));
    }
    const Vector v = sampleGaussian(model.R(k), rng);
    truth.t.push_back(static_cast<double>(k) * dt);
    truth.x.push_back(x);
    truth.y.push_back(model.C(k) * x + v);
    truth.d.push_back(d);
  }
  return truth;
}

Vector rmse(const std::vector<Vector>& estimate, const std::vector<Vector>& truth,
            std::size_t first) {
  if (estimate.size() != truth.size()) {
    throw DimensionError(fmt::format("rmse: {} estimates vs {} truth samples",
                                     estimate.size(), truth.size()));
  }
  if (first >= estimate.size()) {
    throw std::invalid_argument("rmse: empty series");
  }
  Vector sum = Vector::Zero(truth[first].size());
  for (std::size_t i = first; i < estimate.size(); ++i) {
    sum += (estimate[i] - truth[i]).cwiseAbs2();
  }
  return (sum / static_cast<double>(estimate.size() - first)).cwiseSqrt();
}

namespace {

Matrix uioGain(const ScenarioConfig& config) {
  const SystemModel& model = config.model;
  const auto nx = model.dims().nx;
  switch (config.uio_gain.mode) {
    case UioGainSpec::Mode::kPinv:
      return pinvObserverGain(model.C(1));
    case UioGainSpec::Mode::kSteadyState:
      return steadyStateGain(model, config.p0_scale * Matrix::Identity(nx, nx));
    case UioGainSpec::Mode::kMatrix:
      return config.uio_gain.L;
  }
  return {};
}

EstimateSeries runUnchecked(const ScenarioConfig& config,
                            const TruthTrajectory& truth, Estimator which) {
  const SystemModel& model = config.model;
  const auto& dims = model.dims();
  const Vector u = knownInput(config);
  const Matrix P0 = config.p0_scale * Matrix::Identity(dims.nx, dims.nx);
  const std::size_t steps = truth.y.size();

  EstimateSeries out;
  out.estimator = which;
  out.x_hat.reserve(steps);
  out.d_hat.reserve(steps);
  out.innovation.reserve(steps);

  switch (which) {
    case Estimator::kR4skf: {
      FilterState state = FilterState::initial(config.x0_hat, P0, dims.nd, dims.ny);
      for (std::size_t i = 0; i < steps; ++i) {
        state = step(state, u, truth.y[i], model).first;
        out.x_hat.push_back(state.x_hat);
        out.d_hat.push_back(state.d_hat);
        out.innovation.push_back(state.gamma);
      }
      break;
    }
    case Estimator::kA2kf: {
      const Matrix Pd0 = Matrix::Identity(dims.nd, dims.nd);
      A2KFState state =
          A2KFState::initial(config.x0_hat, P0, Pd0, config.a2kf, dims.ny);
      out.qd_diag.reserve(steps);
      for (std::size_t i = 0; i < steps; ++i) {
        auto [next, report] = a2kfStep(state, u, truth.y[i], model, config.a2kf);
        state = std::move(next);
        out.x_hat.push_back(state.stateEstimate());
        out.d_hat.push_back(state.inputEstimate());
        out.innovation.push_back(report.innovation);
        out.qd_diag.push_back(report.Qd_used.diagonal());
      }
      break;
    }
    case Estimator::kOneStep: {
      Vector previous = config.x0_hat;
      for (std::size_t i = 0; i < steps; ++i) {
        const std::size_t k = i + 1;
        const double t = static_cast<double>(i) * model.dt();
        const DiscretizedModel dm = discretize(model, t);
        const Matrix C = model.C(k);
        const Vector x_star = predictNoInput(previous, u, dm);
        const UnknownInputEstimate ui =
            estimateUnknownInput(truth.y[i], x_star, dm, C);
        previous = oneStepEstimate(truth.y[i], C);
        out.x_hat.push_back(previous);
        out.d_hat.push_back(ui.d_hat);
        out.innovation.push_back(ui.gamma);
      }
      break;
    }
    case Estimator::kUio: {
      const Matrix L = uioGain(config);
      ObserverState state = ObserverState::initial(config.x0_hat, dims.nd);
      for (std::size_t i = 0; i < steps; ++i) {
        state = observerStep(state, truth.y[i], u, model, i, L);
        out.x_hat.push_back(state.x_hat);
        out.d_hat.push_back(state.d_hat);
        out.innovation.push_back(truth.y[i] - model.C(i + 1) * state.w);
      }
      break;
    }
  }

  const std::size_t first = firstScoredIndex(config, truth);
  out.rmse_x = rmse(out.x_hat, truth.x, first);
  out.rmse_d = rmse(out.d_hat, truth.d, first);
  return out;
}

}  // namespace

EstimateSeries runEstimator(const ScenarioConfig& config,
                            const TruthTrajectory& truth, Estimator which,
                            std::uint64_t seed) {
  try {
    return runUnchecked(config, truth, which);
  } catch (const std::exception& e) {
    throw EstimatorError(fmt::format("scenario '{}', seed {}, estimator {}: {}",
                                     config.name, seed, estimatorName(which),
                                     e.what()));
  }
}

ScenarioResult runScenario(const ScenarioConfig& config) {
  config.validate();
  const std::size_t n = config.seeds.size();
  std::vector<SeedRun> runs(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        SeedRun run;
        run.seed = config.seeds[i];
        run.truth = generateTruth(config, run.seed);
        for (Estimator e : config.estimators) {
          run.estimates.push_back(runEstimator(config, run.truth, e, run.seed));
        }
        runs[i] = std::move(run);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  const std::size_t threads =
      std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
  std::vector<std::jthread> pool;
  for (std::size_t i = 1; i < threads; ++i) {
    pool.emplace_back(worker);
  }
  worker();
  pool.clear();

  for (const auto& e : errors) {
    if (e) {
      std::rethrow_exception(e);
    }
  }

  ScenarioResult result;
  result.name = config.name;
  for (std::size_t j = 0; j < config.estimators.size(); ++j) {
    RmseRow row;
    row.estimator = config.estimators[j];
    row.x = Vector::Zero(config.model.dims().nx);
    row.d = Vector::Zero(config.model.dims().nd);
    for (const auto& run : runs) {
      row.x += run.estimates[j].rmse_x;
      row.d += run.estimates[j].rmse_d;
    }
    row.x /= static_cast<double>(n);
    row.d /= static_cast<double>(n);
    result.mean_rmse.push_back(std::move(row));
  }
  result.runs = std::move(runs);
  return result;
}

SystemModel benchmarkModel(double dt, double r_variance) {
  Matrix A(4, 4);
  A << 1.9527, -0.0075, 0.0663, 0.0437,  //
      0.0017, 1.0452, 0.0056, -0.0242,   //
      0.0092, 0.0064, -0.1975, 0.00128,  //
      0.0, 0.0, 1.0, 0.0;
  Matrix B(4, 2);
  B << 0.554, 0.156,  //
      0.246, -0.982,  //
      0.320, 0.560,   //
      0.0, 0.0;
  Matrix C = Matrix::Zero(3, 4);
  C(0, 0) = 1.0;
  C(1, 1) = 1.0;
  C(2, 3) = 1.0;
  const Matrix G = Matrix::Identity(4, 4);
  const Matrix Q = 1e-6 * Matrix::Identity(4, 4);
  const Matrix R = r_variance * Matrix::Identity(3, 3);
  return SystemModel::timeInvariant(A, B, B, G, C, Q, R, dt);
}

ScenarioConfig benchmarkCase(int which, double dt, double duration) {
  if (which < 1 || which > 3) {
    throw std::invalid_argument(fmt::format("unknown benchmark case {}", which));
  }
  const double r = which == 3 ? 1e-5 : 1e-7;
  const double f0 = which == 2 ? 5.0 : 0.5;
  ScenarioConfig config(benchmarkModel(dt, r));
  config.name = fmt::format("case{}", which);
  config.signals = {SignalSpec::step(3.0, 7.0, 0.5),
                    SignalSpec::windowedSine(2.0, 6.0, 0.4, f0)};
  config.duration = duration;
  config.seeds.clear();
  for (std::uint64_t s = 1; s <= 20; ++s) {
    config.seeds.push_back(s);
  }
  config.x0_true = Vector::Zero(4);
  config.x0_hat = Vector::Constant(4, 10.0);
  config.estimators = {Estimator::kR4skf, Estimator::kA2kf};
  return config;
}

}  // namespace uikf

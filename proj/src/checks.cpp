#include "uikf/checks.hpp"

#include <algorithm>
#include <random>

#include <fmt/format.h>

#include "uikf/a2kf.hpp"
#include "uikf/onestep.hpp"
#include "uikf/r4skf.hpp"
#include "uikf/sim.hpp"
#include "uikf/uio.hpp"

namespace uikf {

namespace {

double scaled(const Vector& a, const Vector& b) {
  const double s = std::max({1.0, a.lpNorm<Eigen::Infinity>(),
                             b.lpNorm<Eigen::Infinity>()});
  return (a - b).lpNorm<Eigen::Infinity>() / s;
}

CheckResult atMost(std::string name, double value, double threshold) {
  return {std::move(name), value <= threshold, value, threshold, {}};
}

CheckResult dualFormEquality() {
  const SystemModel model = benchmarkModel();
  ScenarioConfig config = benchmarkCase(1);
  const TruthTrajectory truth = generateTruth(config, 11);
  FilterState state = FilterState::initial(config.x0_hat,
                                           10.0 * Matrix::Identity(4, 4), 2, 3);
  double worst = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    auto [next, report] = step(state, Vector::Zero(2), truth.y[i], model);
    const Vector viaL = report.x_star + report.L * next.gamma;
    worst = std::max(worst, scaled(next.x_hat, viaL));
    state = std::move(next);
  }
  return atMost("dual-form update (x* + L gamma*)", worst, 1e-12);
}

CheckResult squareObserverEquivalence() {
  const SystemModel model = squareTestModel();
  std::mt19937_64 rng(5);
  Vector x = Vector::Zero(2);
  ObserverState obs = ObserverState::initial(Vector::Constant(2, 100.0), 2);
  const Matrix L = pinvObserverGain(model.C(1));
  double worst = 0.0;
  for (std::size_t i = 0; i < 500; ++i) {
    const DiscretizedModel dm = discretize(model, static_cast<double>(i) * model.dt());
    const Vector d = Vector::Constant(2, i < 250 ? 0.3 : -0.2);
    x = dm.Ad * x + dm.Ed * d + dm.Gd * sampleGaussian(model.Q(0) / model.dt(), rng);
    const Vector y = x + sampleGaussian(model.R(1), rng);
    obs = observerStep(obs, y, Vector::Zero(1), model, i, L);
    worst = std::max(worst, scaled(obs.x_hat, oneStepEstimate(y, model.C(i + 1))));
  }
  return atMost("observer with L = C^-1 equals one-step filter", worst, 1e-12);
}

CheckResult generalObserverEquivalence() {
  const SystemModel model = benchmarkModel();
  const ScenarioConfig config = benchmarkCase(1);
  const TruthTrajectory truth = generateTruth(config, 3);
  const Matrix L = steadyStateGain(model, 10.0 * Matrix::Identity(4, 4));
  FilterState filter = FilterState::initial(config.x0_hat,
                                            10.0 * Matrix::Identity(4, 4), 2, 3);
  ObserverState obs = ObserverState::initial(config.x0_hat, 2);
  const Vector u = Vector::Zero(2);
  double worst = 0.0;
  for (std::size_t i = 0; i < truth.y.size(); ++i) {
    filter = step(filter, u, truth.y[i], model, GainPolicy::fixedGain(L)).first;
    obs = observerStep(obs, truth.y[i], u, model, i, L);
    worst = std::max(worst, scaled(filter.x_hat, obs.x_hat));
  }
  return atMost("observer with fixed L equals four-step filter with K = L",
                worst, 1e-10);
}

CheckResult qdRoundTrip() {
  Matrix CE(2, 2);
  CE << 0.554, 0.156, 0.246, -0.982;
  Matrix S(2, 2);
  S << 0.04, 0.01, 0.01, 0.02;
  DiscretizedModel dm;
  dm.dt = 0.01;
  dm.Ed = CE * dm.dt;  // with C = I
  dm.Ad = Matrix::Identity(2, 2);
  const Matrix C = Matrix::Identity(2, 2);
  const Matrix G = Matrix::Identity(2, 2);
  const Matrix Q = 1e-6 * Matrix::Identity(2, 2);
  const Matrix R = 1e-7 * Matrix::Identity(2, 2);
  const Matrix CEd = C * dm.Ed;
  const Matrix Cgamma =
      CEd * S * CEd.transpose() + C * G * Q * G.transpose() * C.transpose() * dm.dt + R;
  const Matrix Qd = estimateQd(Cgamma, dm, C, Q, G, R);
  const double err = (Qd - S).cwiseAbs().maxCoeff() / S.cwiseAbs().maxCoeff();
  return atMost("Qd reconstruction of an SPD input", err, 1e-10);
}

}  // namespace

std::vector<CheckResult> runPropertyChecks() {
  std::vector<CheckResult> results;
  EquivalenceOptions options;
  options.steps = 500;
  options.seed = 7;
  options.initial_offset = Vector::Constant(2, 100.0);
  const EquivalenceReport eq = equivalenceCheck(squareTestModel(), options);
  results.push_back(atMost("gain irrelevance (K optimal vs K = 0)",
                           eq.max_optimal_vs_zero_gain, 1e-9));
  results.push_back(atMost("four-step filter equals C^-1 y",
                           eq.max_filter_vs_one_step, 1e-9));
  results.push_back(atMost("square-case A_bar vanishes", eq.max_a_bar_norm, 1e-12));
  results.push_back(dualFormEquality());
  results.push_back(squareObserverEquivalence());
  results.push_back(generalObserverEquivalence());
  results.push_back(qdRoundTrip());
  return results;
}

StabilityReport stabilityReport(const std::string& name, const SystemModel& model,
                                std::size_t steps) {
  const auto nx = model.dims().nx;
  const Matrix K = steadyStateGain(model, 10.0 * Matrix::Identity(nx, nx), steps);
  const double t = static_cast<double>(steps) * model.dt();
  const DiscretizedModel dm = discretize(model, t);
  const Matrix C = model.C(steps + 1);
  const StabilityMatrices m = stabilityMatrices(dm, C, pinv(C * dm.Ed), K);
  return {name, spectralRadius(m.A_bar), spectralRadius(m.A_tilde)};
}

}  // namespace uikf

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "uikf/linalg.hpp"
#include "uikf/onestep.hpp"
#include "uikf/r4skf.hpp"
#include "uikf/sim.hpp"
#include "uikf/uio.hpp"

namespace uikf {
namespace {

// Noise-free benchmark trajectory with the step/sine inputs of the first case.
TruthTrajectory noiseFreeTruth(std::size_t steps) {
  ScenarioConfig config(benchmarkModel(0.01, 0.0));
  const Matrix zero = Matrix::Zero(4, 4);
  const SystemModel& m = config.model;
  config.model = SystemModel::timeInvariant(m.A(0), m.B(0), m.E(0), m.G(0), m.C(1), zero,
                                            Matrix::Zero(3, 3), 0.01);
  config.signals = benchmarkCase(1).signals;
  config.duration = static_cast<double>(steps) * 0.01;
  config.x0_true = (Vector(4) << 0.5, -0.3, 0.2, 0.1).finished();
  config.x0_hat = config.x0_true;
  return generateTruth(config, 1);
}

TEST(Observer, ZeroGainTracksNoiseFreeTruth) {
  const SystemModel model = benchmarkModel();
  const TruthTrajectory truth = noiseFreeTruth(1000);
  ObserverState state = ObserverState::initial(truth.x0, 2);
  const Matrix L = Matrix::Zero(4, 3);
  for (std::size_t i = 0; i < truth.y.size(); ++i) {
    state = observerStep(state, truth.y[i], Vector::Zero(2), model, i, L);
    ASSERT_LT(oracle::relativeInf(state.x_hat, truth.x[i]), 1e-10) << "step " << i;
    ASSERT_LT((state.d_hat - truth.d[i]).cwiseAbs().maxCoeff(), 1e-8) << "step " << i;
  }
}

TEST(Observer, InverseGainMatchesOneStep) {
  const SystemModel model = squareTestModel();
  const Matrix L = pinvObserverGain(model.C(1));
  std::mt19937_64 rng(8);
  ObserverState state = ObserverState::initial(Vector::Constant(2, 5.0), 2);
  for (std::size_t i = 0; i < 300; ++i) {
    const Vector y = sampleGaussian(Matrix::Identity(2, 2), rng);
    state = observerStep(state, y, Vector::Zero(1), model, i, L);
    ASSERT_LT(oracle::relativeInf(state.x_hat, oneStepEstimate(y, model.C(i + 1))), 1e-12);
  }
}

TEST(Observer, MatchesFilterWithSameGain) {
  const SystemModel model = benchmarkModel();
  const Matrix L = steadyStateGain(model, 10.0 * Matrix::Identity(4, 4));
  const TruthTrajectory truth = generateTruth(benchmarkCase(1), 5);
  ObserverState obs = ObserverState::initial(Vector::Constant(4, 10.0), 2);
  FilterState filt = FilterState::initial(obs.x_hat, Matrix::Identity(4, 4), 2, 3);
  const GainPolicy policy = GainPolicy::fixedGain(L);
  for (std::size_t i = 0; i < truth.y.size(); ++i) {
    obs = observerStep(obs, truth.y[i], Vector::Zero(2), model, i, L);
    filt = step(filt, Vector::Zero(2), truth.y[i], model, policy).first;
    ASSERT_LT(oracle::relativeInf(obs.x_hat, filt.x_hat), 1e-10);
  }
}

TEST(Observer, SteadyStateGainErrorDecays) {
  const SystemModel model = benchmarkModel();
  const Matrix L = steadyStateGain(model, 10.0 * Matrix::Identity(4, 4));
  const DiscretizedModel dm = discretize(model, 0.0);
  const Matrix F_d = pinv(model.C(1) * dm.Ed);
  const double rho = verifyObserverStability(dm, model.C(1), F_d, L);
  ASSERT_LT(rho, 1.0);
  const TruthTrajectory truth = noiseFreeTruth(1000);
  ObserverState state = ObserverState::initial(truth.x0 + Vector::Constant(4, 10.0), 2);
  const double e0 = Vector::Constant(4, 10.0).norm();
  for (std::size_t i = 0; i < truth.y.size(); ++i) {
    state = observerStep(state, truth.y[i], Vector::Zero(2), model, i, L);
    const double bound = 10.0 * e0 * std::pow(rho + 1e-3, static_cast<double>(i + 1));
    ASSERT_LE((state.x_hat - truth.x[i]).norm(), bound) << "step " << i;
  }
}

TEST(ObserverStability, Examples) {
  const SystemModel square = squareTestModel();
  const DiscretizedModel sdm = discretize(square, 0.0);
  const Matrix I = Matrix::Identity(2, 2);
  EXPECT_LT(verifyObserverStability(sdm, I, pinv(sdm.Ed), I), 1e-12);

  const SystemModel model = benchmarkModel();
  const DiscretizedModel dm = discretize(model, 0.0);
  const Matrix C = model.C(1);
  const Matrix F_d = pinv(C * dm.Ed);
  const Matrix A_bar = (Matrix::Identity(4, 4) - dm.Ed * F_d * C) * dm.Ad;
  EXPECT_NEAR(verifyObserverStability(dm, C, F_d, Matrix::Zero(4, 3)), spectralRadius(A_bar),
              1e-12);
}

}  // namespace
}  // namespace uikf

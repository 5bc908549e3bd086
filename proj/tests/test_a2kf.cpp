#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "uikf/a2kf.hpp"
#include "uikf/linalg.hpp"
#include "uikf/sim.hpp"

namespace uikf {
namespace {

Matrix scalar(double v) { return Matrix::Constant(1, 1, v); }

TEST(Augment, ScalarBlocks) {
  const auto model = SystemModel::timeInvariant(scalar(2), scalar(0), scalar(3), scalar(5),
                                                scalar(7), scalar(1), scalar(1), 0.1);
  const AugmentedModel aug = augment(model, 0.0, 1, scalar(0.4));
  EXPECT_EQ(aug.A_a, (Matrix(2, 2) << 2, 3, 0, 0).finished());
  EXPECT_EQ(aug.G_a, (Matrix(2, 2) << 5, 0, 0, 1).finished());
  EXPECT_EQ(aug.C_a, (Matrix(1, 2) << 7, 0).finished());
  EXPECT_EQ(aug.Q_a, (Matrix(2, 2) << 1, 0, 0, 0.4).finished());
}

TEST(Augment, BenchmarkLayout) {
  const SystemModel model = benchmarkModel();
  const AugmentedModel aug = augment(model, 0.0, 1, 1e-6 * Matrix::Identity(2, 2));
  ASSERT_EQ(aug.A_a.rows(), 6);
  EXPECT_EQ(aug.A_a.topLeftCorner(4, 4), model.A(0));
  EXPECT_EQ(aug.A_a.topRightCorner(4, 2), model.B(0));
  EXPECT_EQ(aug.A_a.bottomRows(2).cwiseAbs().maxCoeff(), 0.0);
  Vector xa = Vector::Zero(6);
  xa.head(4) << 1, 2, 3, 4;
  Vector xb = xa;
  xb.tail(2) << 50, -50;
  EXPECT_EQ(aug.C_a * xa, aug.C_a * xb);
}

TEST(InnovationWindow, KeepsMostRecent) {
  InnovationWindow w(3, 1);
  EXPECT_TRUE(w.empty());
  for (int i = 1; i <= 5; ++i) w.push(scalar(i));
  ASSERT_EQ(w.size(), 3u);
  const auto c = w.contents();
  EXPECT_EQ(c[0](0), 3);
  EXPECT_EQ(c[2](0), 5);
}

TEST(InnovationCovariance, Examples) {
  InnovationWindow same(4, 2);
  const Vector v = (Vector(2) << 1, 2).finished();
  for (int i = 0; i < 4; ++i) same.push(v);
  EXPECT_LT((innovationCovariance(same) - v * v.transpose()).norm(), 1e-15);

  InnovationWindow pair(2, 2);
  pair.push((Vector(2) << 1, 0).finished());
  pair.push((Vector(2) << -1, 0).finished());
  EXPECT_EQ(innovationCovariance(pair), (Matrix(2, 2) << 1, 0, 0, 0).finished());

  EXPECT_THROW(innovationCovariance(InnovationWindow(3, 2)), std::invalid_argument);
}

TEST(InnovationCovariance, MatchesMonteCarlo) {
  const Matrix S = (Matrix(2, 2) << 2, 0.6, 0.6, 1).finished();
  std::mt19937_64 rng(23);
  InnovationWindow w(100000, 2);
  for (int i = 0; i < 100000; ++i) w.push(sampleGaussian(S, rng));
  EXPECT_LT((innovationCovariance(w) - S).norm() / S.norm(), 0.05);
}

struct QdFixture : ::testing::Test {
  SystemModel model = benchmarkModel();
  DiscretizedModel dm = discretize(model, 0.0);
  Matrix C = model.C(1);
  Matrix Q = model.Q(0);
  Matrix G = model.G(0);
  Matrix R = model.R(1);
  Matrix baseline() const { return C * G * Q * G.transpose() * C.transpose() * dm.dt + R; }
};

TEST_F(QdFixture, QuiescentGivesFloor) {
  const Matrix Qd = estimateQd(baseline(), dm, C, Q, G, R);
  EXPECT_LE(Qd.cwiseAbs().maxCoeff(), QdOptions{}.floor);
}

TEST_F(QdFixture, RoundTripSpd) {
  const Matrix truth = (Matrix(2, 2) << 0.8, 0.2, 0.2, 0.5).finished();
  const Matrix CE = C * dm.Ed;
  const Matrix Cgamma = CE * truth * CE.transpose() + baseline();
  const Matrix Qd = estimateQd(Cgamma, dm, C, Q, G, R);
  EXPECT_LT((Qd - truth).norm() / truth.norm(), 1e-10);
  QdOptions innov;
  innov.check = QdOptions::NegativeCheck::kInnovation;
  EXPECT_LT((estimateQd(Cgamma, dm, C, Q, G, R, innov) - truth).norm() / truth.norm(), 1e-10);
}

TEST_F(QdFixture, RescaleDividesByDt) {
  const Matrix truth = (Matrix(2, 2) << 0.8, 0.2, 0.2, 0.5).finished();
  const Matrix CE = C * dm.Ed;
  const Matrix Cgamma = CE * truth * CE.transpose() + baseline();
  QdOptions opts;
  opts.rescale_by_dt = true;
  EXPECT_LT((estimateQd(Cgamma, dm, C, Q, G, R, opts) - truth / dm.dt).norm() /
                (truth.norm() / dm.dt),
            1e-10);
}

TEST_F(QdFixture, IndefiniteFallsBackToDiagonal) {
  const Matrix CE = C * dm.Ed;
  const Matrix indefinite = (Matrix(2, 2) << 1, 2, 2, 1).finished();
  const Matrix Qd = estimateQd(CE * indefinite * CE.transpose() + baseline(), dm, C, Q, G, R);
  EXPECT_EQ(Qd(0, 1), 0.0);
  EXPECT_NEAR(Qd(0, 0), 1.0, 1e-9);
  EXPECT_NEAR(Qd(1, 1), 1.0, 1e-9);

  const Matrix negative = (Matrix(2, 2) << -1, 0, 0, 0.5).finished();
  const Matrix Qn = estimateQd(CE * negative * CE.transpose() + baseline(), dm, C, Q, G, R);
  EXPECT_EQ(Qn(0, 0), QdOptions{}.floor);
  EXPECT_NEAR(Qn(1, 1), 0.5, 1e-9);
}

TEST_F(QdFixture, AlwaysPsd) {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    Matrix A(3, 3);
    for (int i = 0; i < 9; ++i) A.data()[i] = n(rng);
    const double scale = std::pow(10.0, -8.0 + trial % 6);
    const Matrix Cgamma = scale * A * A.transpose();
    const Matrix Qd = estimateQd(Cgamma, dm, C, Q, G, R);
    ASSERT_TRUE(Qd.allFinite());
    ASSERT_GE(minEigenvalue(Qd), 0.0) << "trial " << trial;
  }
}

TEST(A2kfStep, FrozenWithoutInputIsPlainKalman) {
  const SystemModel model = benchmarkModel();
  ScenarioConfig config = benchmarkCase(1);
  config.signals = {SignalSpec::zero(), SignalSpec::zero()};
  const TruthTrajectory truth = generateTruth(config, 2);
  A2KFOptions opts;
  opts.adapt = false;
  opts.qd_initial = 0.0;
  const Matrix P0 = 10.0 * Matrix::Identity(4, 4);
  A2KFState state = A2KFState::initial(config.x0_hat, P0, Matrix::Zero(2, 2), opts, 3);
  oracle::PlainKalman kf{config.x0_hat, P0};
  const DiscretizedModel dm = discretize(model, 0.0);
  const Matrix Qd = model.G(0) * model.Q(0) * model.G(0).transpose() * dm.dt;
  for (std::size_t i = 0; i < truth.y.size(); ++i) {
    state = a2kfStep(state, Vector::Zero(2), truth.y[i], model, opts).first;
    kf.step(dm.Ad, dm.Bd, Vector::Zero(2), Qd, model.C(1), model.R(1), truth.y[i]);
    ASSERT_LT(oracle::relativeInf(state.stateEstimate(), kf.x), 1e-9) << "step " << i;
    ASSERT_EQ(state.inputEstimate().cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(A2kfStep, UnbiasedWithoutInput) {
  ScenarioConfig config = benchmarkCase(1);
  config.signals = {SignalSpec::zero(), SignalSpec::zero()};
  config.x0_true = config.x0_hat;
  config.duration = 5.0;
  config.estimators = {Estimator::kA2kf};
  config.seeds.clear();
  for (std::uint64_t s = 1; s <= 200; ++s) config.seeds.push_back(s);
  const ScenarioResult result = runScenario(config);
  const std::size_t last = result.runs[0].truth.x.size() - 1;
  for (std::size_t idx : {last / 2, last}) {
    Vector sum = Vector::Zero(6);
    Vector sq = Vector::Zero(6);
    for (const SeedRun& run : result.runs) {
      Vector e(6);
      e << run.estimates[0].x_hat[idx] - run.truth.x[idx], run.estimates[0].d_hat[idx];
      sum += e;
      sq += e.cwiseAbs2();
    }
    const double n = static_cast<double>(result.runs.size());
    const Vector mean = sum / n;
    const Vector var = (sq - n * mean.cwiseAbs2()) / (n - 1.0);
    for (int j = 0; j < 6; ++j) {
      EXPECT_LE(std::abs(mean(j)), 4.0 * std::sqrt(var(j) / n) + 1e-15)
          << "component " << j << " at index " << idx;
    }
  }
}

TEST(A2kfStep, QdPeaksAtStepEdges) {
  ScenarioConfig config = benchmarkCase(1);
  const TruthTrajectory truth = generateTruth(config, 1);
  const EstimateSeries est = runEstimator(config, truth, Estimator::kA2kf, 1);
  std::vector<double> quiet;
  double peak3 = 0.0;
  double peak7 = 0.0;
  for (std::size_t i = 0; i < truth.t.size(); ++i) {
    const double t = truth.t[i];
    const double q = est.qd_diag[i](0);
    if (t < 2.0) quiet.push_back(q);
    if (std::abs(t - 3.0) <= 0.2) peak3 = std::max(peak3, q);
    if (std::abs(t - 7.0) <= 0.2) peak7 = std::max(peak7, q);
  }
  std::nth_element(quiet.begin(), quiet.begin() + quiet.size() / 2, quiet.end());
  const double median = quiet[quiet.size() / 2];
  EXPECT_GT(peak3, 10.0 * median);
  EXPECT_GT(peak7, 10.0 * median);
}

}  // namespace
}  // namespace uikf

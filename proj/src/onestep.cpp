#include "uikf/onestep.hpp"

#include <algorithm>
#include <limits>
#include <random>

#include <fmt/format.h>

#include "uikf/errors.hpp"
#include "uikf/r4skf.hpp"
#include "uikf/sim.hpp"

namespace uikf {

namespace {

double conditionNumber(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(s.size() - 1) == 0.0) {
    return std::numeric_limits<double>::infinity();
  }
  return s(0) / s(s.size() - 1);
}

void requireInvertible(const Matrix& m, std::string_view what) {
  if (m.rows() != m.cols()) {
    throw StructuralError(fmt::format("{} must be square", what));
  }
  if (!(conditionNumber(m) < kSquareCaseMaxCondition)) {
    throw StructuralError(fmt::format("{} is singular", what));
  }
}

double scaledDeviation(const Vector& a, const Vector& b) {
  const double scale = std::max({1.0, a.lpNorm<Eigen::Infinity>(),
                                 b.lpNorm<Eigen::Infinity>()});
  return (a - b).lpNorm<Eigen::Infinity>() / scale;
}

}  // namespace

void SquareCaseModel::validate() const {
  requireInvertible(C, "C");
  requireInvertible(E, "E");
  if (C.rows() != E.rows()) {
    throw StructuralError("square case requires n_x = n_y = n_d");
  }
  requireShape(R, C.rows(), C.rows(), "R");
}

Vector oneStepEstimate(const Vector& y, const Matrix& C) {
  requireInvertible(C, "C");
  requireSize(y, C.rows(), "y");
  return C.partialPivLu().solve(y);
}

Matrix oneStepErrorCov(const Matrix& C, const Matrix& R) {
  requireInvertible(C, "C");
  requireShape(R, C.rows(), C.rows(), "R");
  const auto lu = C.partialPivLu();
  const Matrix CinvR = lu.solve(R);
  // C^-1 R C^-T = (C^-1 (C^-1 R)^T)^T
  return symmetrize(lu.solve(CinvR.transpose()).transpose());
}

bool isSquareCase(const Dimensions& dims) {
  return dims.nx == dims.ny && dims.ny == dims.nd;
}

EquivalenceReport equivalenceCheck(const SystemModel& model,
                                   const EquivalenceOptions& options) {
  const auto& dims = model.dims();
  if (!isSquareCase(dims)) {
    throw StructuralError(fmt::format(
        "equivalence check needs n_x = n_y = n_d, got {}, {}, {}", dims.nx,
        dims.ny, dims.nd));
  }

  std::mt19937_64 rng(options.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);

  const double dt = model.dt();
  Vector x = Vector::Zero(dims.nx);
  Vector d = Vector::Zero(dims.nd);
  Vector x0_hat = x;
  if (options.initial_offset.size() == dims.nx) {
    x0_hat += options.initial_offset;
  }
  const Matrix P0 = 10.0 * Matrix::Identity(dims.nx, dims.nx);
  FilterState optimal = FilterState::initial(x0_hat, P0, dims.nd, dims.ny);
  FilterState zeroGain = optimal;
  const Vector u = Vector::Zero(dims.nu);

  EquivalenceReport report;
  for (std::size_t k = 1; k <= options.steps; ++k) {
    const double t = static_cast<double>(k - 1) * dt;
    // Unknown input is redrawn every 50 steps.
    if (options.input_amplitude > 0.0 && (k - 1) % 50 == 0) {
      for (Eigen::Index i = 0; i < dims.nd; ++i) {
        d(i) = options.input_amplitude * uniform(rng);
      }
    }
    const DiscretizedModel dm = discretize(model, t);
    Vector w = Vector::Zero(dims.nw);
    Vector v = Vector::Zero(dims.ny);
    if (options.noise) {
      w = sampleGaussian(model.Q(t) / dt, rng);
      v = sampleGaussian(model.R(k), rng);
    }
    x = dm.Ad * x + dm.Bd * u + dm.Ed * d + dm.Gd * w;
    const Vector y = model.C(k) * x + v;

    optimal = step(optimal, u, y, model, GainPolicy::optimal()).first;
    auto [zs, zr] = step(zeroGain, u, y, model, GainPolicy::zero());
    zeroGain = std::move(zs);
    const Vector direct = oneStepEstimate(y, model.C(k));

    report.max_filter_vs_one_step = std::max(
        report.max_filter_vs_one_step, scaledDeviation(optimal.x_hat, direct));
    report.max_optimal_vs_zero_gain =
        std::max(report.max_optimal_vs_zero_gain,
                 scaledDeviation(optimal.x_hat, zeroGain.x_hat));
    const double adNorm = std::max(1.0, dm.Ad.norm());
    report.max_a_bar_norm =
        std::max(report.max_a_bar_norm, zr.A_bar.norm() / adNorm);
  }
  return report;
}

SystemModel squareTestModel(double dt) {
  Matrix A(2, 2);
  A << 0.0, 1.0, 0.0, 0.0;
  const Matrix I = Matrix::Identity(2, 2);
  return SystemModel::timeInvariant(A, Matrix::Zero(2, 1), I, I, I, 1e-6 * I,
                                    1e-6 * I, dt);
}

}  // namespace uikf

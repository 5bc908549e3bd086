#include "uikf/a2kf.hpp"

#include <stdexcept>

#include <fmt/format.h>

#include "uikf/errors.hpp"
#include "uikf/r4skf.hpp"

namespace uikf {

AugmentedModel augment(const SystemModel& model, double t, std::size_t k,
                       const Matrix& Qd) {
  const auto& d = model.dims();
  const auto na = d.nx + d.nd;
  requireShape(Qd, d.nd, d.nd, "Qd");

  AugmentedModel a;
  a.A_a = Matrix::Zero(na, na);
  a.A_a.topLeftCorner(d.nx, d.nx) = model.A(t);
  a.A_a.topRightCorner(d.nx, d.nd) = model.E(t);

  a.B_a = Matrix::Zero(na, d.nu);
  a.B_a.topRows(d.nx) = model.B(t);

  a.G_a = Matrix::Zero(na, d.nw + d.nd);
  a.G_a.topLeftCorner(d.nx, d.nw) = model.G(t);
  a.G_a.bottomRightCorner(d.nd, d.nd) = Matrix::Identity(d.nd, d.nd);

  a.C_a = Matrix::Zero(d.ny, na);
  a.C_a.leftCols(d.nx) = model.C(k);

  a.Q_a = Matrix::Zero(d.nw + d.nd, d.nw + d.nd);
  a.Q_a.topLeftCorner(d.nw, d.nw) = model.Q(t);
  a.Q_a.bottomRightCorner(d.nd, d.nd) = Qd;
  return a;
}

InnovationWindow::InnovationWindow(std::size_t capacity, Eigen::Index dim)
    : buffer_(capacity, Vector::Zero(dim)) {
  if (capacity == 0) {
    throw std::invalid_argument("innovation window needs capacity >= 1");
  }
}

void InnovationWindow::push(const Vector& gamma) {
  buffer_[head_] = gamma;
  head_ = (head_ + 1) % buffer_.size();
  if (count_ < buffer_.size()) {
    ++count_;
  }
}

std::vector<Vector> InnovationWindow::contents() const {
  std::vector<Vector> out;
  out.reserve(count_);
  const std::size_t start = (head_ + buffer_.size() - count_) % buffer_.size();
  for (std::size_t i = 0; i < count_; ++i) {
    out.push_back(buffer_[(start + i) % buffer_.size()]);
  }
  return out;
}

Matrix innovationCovariance(const InnovationWindow& window) {
  if (window.empty()) {
    throw std::invalid_argument("innovation covariance of an empty window");
  }
  const auto samples = window.contents();
  const auto ny = samples.front().size();
  Matrix sum = Matrix::Zero(ny, ny);
  for (const auto& g : samples) {
    sum.noalias() += g * g.transpose();
  }
  return sum / static_cast<double>(samples.size());
}

namespace {

bool hasNegativeDiagonal(const Matrix& m) {
  return (m.diagonal().array() < 0.0).any();
}

}  // namespace

Matrix estimateQd(const Matrix& Cgamma, const DiscretizedModel& dm,
                  const Matrix& C, const Matrix& Q, const Matrix& G,
                  const Matrix& R, const QdOptions& options) {
  const auto ny = C.rows();
  requireShape(Cgamma, ny, ny, "C_gamma");
  const Matrix CG = C * G;
  const Matrix C0 = Cgamma - CG * Q * CG.transpose() * dm.dt - R;
  const Matrix F = pinv(C * dm.Ed);
  Matrix Qd = symmetrize(F * C0 * F.transpose());

  bool diagonalOnly =
      options.check == QdOptions::NegativeCheck::kEstimate
          ? hasNegativeDiagonal(Qd)
          : hasNegativeDiagonal(C0);
  if (!diagonalOnly && minEigenvalue(Qd) < 0.0) {
    diagonalOnly = true;
  }
  if (diagonalOnly) {
    const Vector diagonal = Qd.diagonal().cwiseMax(options.floor);
    Qd = diagonal.asDiagonal();
  }
  if (options.rescale_by_dt) {
    Qd /= dm.dt;
  }
  return Qd;
}

A2KFState A2KFState::initial(const Vector& x0, const Matrix& P0,
                             const Matrix& Pd0, const A2KFOptions& options,
                             Eigen::Index ny) {
  const auto nx = x0.size();
  const auto nd = Pd0.rows();
  requireShape(P0, nx, nx, "P0");
  requireShape(Pd0, nd, nd, "Pd0");
  A2KFState s;
  s.x_a = Vector::Zero(nx + nd);
  s.x_a.head(nx) = x0;
  s.P_a = Matrix::Zero(nx + nd, nx + nd);
  s.P_a.topLeftCorner(nx, nx) = P0;
  s.P_a.bottomRightCorner(nd, nd) = Pd0;
  s.innovations = InnovationWindow(options.window, ny);
  s.Qd_hat = options.qd_initial * Matrix::Identity(nd, nd);
  return s;
}

Vector A2KFState::stateEstimate() const {
  return x_a.head(x_a.size() - Qd_hat.rows());
}

Vector A2KFState::inputEstimate() const { return x_a.tail(Qd_hat.rows()); }

std::pair<A2KFState, A2KFReport> a2kfStep(const A2KFState& state,
                                          const Vector& u, const Vector& y,
                                          const SystemModel& model,
                                          const A2KFOptions& options) {
  const auto& dims = model.dims();
  const auto na = dims.nx + dims.nd;
  requireSize(state.x_a, na, "x_a");
  requireSize(y, dims.ny, "y");
  const double dt = model.dt();
  const double t = static_cast<double>(state.k) * dt;
  const std::size_t k = state.k + 1;

  const AugmentedModel aug = augment(model, t, k, state.Qd_hat);
  const Matrix Aad = Matrix::Identity(na, na) + aug.A_a * dt;
  const Matrix Bad = aug.B_a * dt;
  const Matrix R = model.R(k);

  const Vector x_pred = Aad * state.x_a + Bad * u;
  const Matrix P_pred = symmetrize(Aad * state.P_a * Aad.transpose() +
                                   aug.G_a * aug.Q_a * aug.G_a.transpose() * dt);
  A2KFReport report;
  report.K = kalmanGain(P_pred, aug.C_a, R);
  report.innovation = y - aug.C_a * x_pred;
  report.Qd_used = state.Qd_hat;

  A2KFState next;
  next.x_a = x_pred + report.K * report.innovation;
  if (!next.x_a.allFinite()) {
    throw NumericalError(
        fmt::format("augmented estimate diverged at step {}", k));
  }
  next.P_a = josephUpdate(P_pred, report.K, aug.C_a, R);
  next.innovations = state.innovations;
  next.innovations.push(report.innovation);
  next.k = k;

  if (options.adapt) {
    const DiscretizedModel dm = discretize(model, t);
    next.Qd_hat = estimateQd(innovationCovariance(next.innovations), dm,
                             model.C(k), model.Q(t), model.G(t), R, options.qd);
  } else {
    next.Qd_hat = state.Qd_hat;
  }
  return {std::move(next), std::move(report)};
}

}  // namespace uikf

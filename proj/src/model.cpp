#include "uikf/model.hpp"

#include <cmath>
#include <utility>

#include <fmt/format.h>

#include "uikf/errors.hpp"

namespace uikf {

SystemModel::SystemModel(TimeFn A, TimeFn B, TimeFn E, TimeFn G, StepFn C,
                         TimeFn Q, StepFn R, Dimensions dims, double dt)
    : A_(std::move(A)),
      B_(std::move(B)),
      E_(std::move(E)),
      G_(std::move(G)),
      Q_(std::move(Q)),
      C_(std::move(C)),
      R_(std::move(R)),
      dims_(dims),
      dt_(dt) {
  if (!(dt_ > 0.0) || !std::isfinite(dt_)) {
    throw DimensionError(fmt::format("sample period must be > 0, got {}", dt_));
  }
  if (dims_.nx <= 0 || dims_.ny <= 0) {
    throw DimensionError("n_x and n_y must be positive");
  }
  if (dims_.nd > dims_.ny) {
    throw StructuralError(fmt::format(
        "rank condition cannot hold: n_d = {} exceeds n_y = {}", dims_.nd,
        dims_.ny));
  }
}

SystemModel SystemModel::timeInvariant(const Matrix& A, const Matrix& B,
                                       const Matrix& E, const Matrix& G,
                                       const Matrix& C, const Matrix& Q,
                                       const Matrix& R, double dt) {
  Dimensions dims{A.rows(), B.cols(), E.cols(), C.rows(), G.cols()};
  auto constant = [](Matrix m) { return [m](double) { return m; }; };
  auto constantStep = [](Matrix m) { return [m](std::size_t) { return m; }; };
  SystemModel model(constant(A), constant(B), constant(E), constant(G),
                    constantStep(C), constant(Q), constantStep(R), dims, dt);
  model.validate(0.0, 1);
  return model;
}

Matrix SystemModel::A(double t) const { return A_(t); }
Matrix SystemModel::B(double t) const { return B_(t); }
Matrix SystemModel::E(double t) const { return E_(t); }
Matrix SystemModel::G(double t) const { return G_(t); }
Matrix SystemModel::Q(double t) const { return Q_(t); }
Matrix SystemModel::C(std::size_t k) const { return C_(k); }
Matrix SystemModel::R(std::size_t k) const { return R_(k); }

SystemModel SystemModel::withDt(double dt) const {
  return SystemModel(A_, B_, E_, G_, C_, Q_, R_, dims_, dt);
}

SystemModel SystemModel::withScaledR(double scale) const {
  StepFn base = R_;
  return SystemModel(
      A_, B_, E_, G_, C_, Q_,
      [base, scale](std::size_t k) -> Matrix { return scale * base(k); },
      dims_, dt_);
}

namespace {

void requireSymmetric(const Matrix& m, std::string_view what) {
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw DimensionError(fmt::format("{} is not symmetric", what));
  }
}

}  // namespace

void SystemModel::validate(double t, std::size_t k) const {
  const auto& d = dims_;
  const Matrix a = A(t);
  const Matrix e = E(t);
  const Matrix c = C(k);
  const Matrix q = Q(t);
  const Matrix r = R(k);
  requireShape(a, d.nx, d.nx, "A");
  requireShape(B(t), d.nx, d.nu, "B");
  requireShape(e, d.nx, d.nd, "E");
  requireShape(G(t), d.nx, d.nw, "G");
  requireShape(c, d.ny, d.nx, "C");
  requireShape(q, d.nw, d.nw, "Q");
  requireShape(r, d.ny, d.ny, "R");
  requireSymmetric(q, "Q");
  requireSymmetric(r, "R");
  const double qScale = std::max(1.0, q.cwiseAbs().maxCoeff());
  if (minEigenvalue(q) < -1e-12 * qScale) {
    throw DimensionError("Q is not positive semi-definite");
  }
  if (minEigenvalue(r) < 0.0) {
    throw DimensionError("R is not positive semi-definite");
  }
  if (d.nd > 0 && !checkRankCondition(c, e)) {
    throw StructuralError(fmt::format(
        "rank condition rank(C E) = rank(E) = n_d fails at t = {}", t));
  }
}

DiscretizedModel discretize(const SystemModel& model, double t) {
  const double dt = model.dt();
  const auto nx = model.dims().nx;
  DiscretizedModel dm;
  dm.Ad = Matrix::Identity(nx, nx) + model.A(t) * dt;
  dm.Bd = model.B(t) * dt;
  dm.Ed = model.E(t) * dt;
  dm.Gd = model.G(t) * dt;
  dm.t = t;
  dm.dt = dt;
  return dm;
}

Eigen::Index numericalRank(const Matrix& m, double tol) {
  if (m.size() == 0) {
    return 0;
  }
  Eigen::JacobiSVD<Matrix> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) {
    return 0;
  }
  return (s.array() > tol * s(0)).count();
}

bool checkRankCondition(const Matrix& C, const Matrix& E, double tol) {
  if (C.cols() != E.rows()) {
    throw DimensionError(fmt::format(
        "C is {}x{} but E has {} rows", C.rows(), C.cols(), E.rows()));
  }
  const Eigen::Index nd = E.cols();
  return numericalRank(E, tol) == nd && numericalRank(C * E, tol) == nd;
}

Matrix pinv(const Matrix& m, double tol) {
  if (m.size() == 0) {
    return Matrix::Zero(m.cols(), m.rows());
  }
  Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Vector& s = svd.singularValues();
  const double cutoff = s.size() > 0 ? tol * s(0) : 0.0;
  Vector inv = Vector::Zero(s.size());
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s(i) > cutoff && s(i) > 0.0) {
      inv(i) = 1.0 / s(i);
    }
  }
  return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

}  // namespace uikf

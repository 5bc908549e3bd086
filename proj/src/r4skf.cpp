#include "uikf/r4skf.hpp"

#include <fmt/format.h>

#include "uikf/errors.hpp"

namespace uikf {

FilterState FilterState::initial(const Vector& x0, const Matrix& P0,
                                 Eigen::Index nd, Eigen::Index ny) {
  requireShape(P0, x0.size(), x0.size(), "P0");
  FilterState s;
  s.x_hat = x0;
  s.P = P0;
  s.d_hat = Vector::Zero(nd);
  s.Pd = Matrix::Identity(nd, nd);
  s.gamma = Vector::Zero(ny);
  s.k = 0;
  return s;
}

Vector predictNoInput(const Vector& x_hat, const Vector& u,
                      const DiscretizedModel& dm) {
  requireSize(x_hat, dm.Ad.cols(), "x_hat");
  requireSize(u, dm.Bd.cols(), "u");
  return dm.Ad * x_hat + dm.Bd * u;
}

UnknownInputEstimate estimateUnknownInput(const Vector& y, const Vector& x_star,
                                          const DiscretizedModel& dm,
                                          const Matrix& C) {
  requireShape(C, y.size(), dm.Ad.rows(), "C");
  requireSize(x_star, dm.Ad.rows(), "x_star");
  const Matrix CEd = C * dm.Ed;
  if (numericalRank(CEd) < dm.Ed.cols()) {
    throw StructuralError(fmt::format(
        "rank(C E_d) < n_d = {} at t = {}; unknown input is not "
        "recoverable from this measurement",
        dm.Ed.cols(), dm.t));
  }
  UnknownInputEstimate out;
  out.gamma = y - C * x_star;
  out.F_d = pinv(CEd);
  out.d_hat = out.F_d * out.gamma;
  return out;
}

Vector predictWithInput(const Vector& x_star, const Vector& d_hat,
                        const DiscretizedModel& dm) {
  requireSize(d_hat, dm.Ed.cols(), "d_hat");
  return x_star + dm.Ed * d_hat;
}

Matrix kalmanGain(const Matrix& P_pred, const Matrix& C, const Matrix& R) {
  const Matrix S = symmetrize(C * P_pred * C.transpose() + R);
  Eigen::LLT<Matrix> llt(S);
  if (llt.info() != Eigen::Success || !(llt.rcond() >= kInnovationRcondFloor)) {
    throw NumericalError(
        "innovation covariance C P C^T + R is numerically singular");
  }
  // K^T = S^-1 C P^T
  return llt.solve(C * P_pred.transpose()).transpose();
}

Matrix combinedGain(const Matrix& K, const Matrix& C, const Matrix& Ed,
                    const Matrix& F_d) {
  const auto nx = K.rows();
  return K + (Matrix::Identity(nx, nx) - K * C) * Ed * F_d;
}

Matrix josephUpdate(const Matrix& P_pred, const Matrix& L, const Matrix& C,
                    const Matrix& R) {
  const auto nx = P_pred.rows();
  const Matrix IL = Matrix::Identity(nx, nx) - L * C;
  return symmetrize(IL * P_pred * IL.transpose() + L * R * L.transpose());
}

GainAndCovariance gainAndCovariance(const Matrix& P_prev,
                                    const DiscretizedModel& dm,
                                    const Matrix& C, const Matrix& G,
                                    const Matrix& Q, const Matrix& R,
                                    const Matrix& F_d) {
  const auto nx = dm.Ad.rows();
  requireShape(P_prev, nx, nx, "P_prev");
  requireShape(R, C.rows(), C.rows(), "R");
  GainAndCovariance out;
  out.P_pred = symmetrize(dm.Ad * P_prev * dm.Ad.transpose() +
                          G * Q * G.transpose() * dm.dt);
  out.K = kalmanGain(out.P_pred, C, R);
  out.L = combinedGain(out.K, C, dm.Ed, F_d);
  out.P_post = josephUpdate(out.P_pred, out.L, C, R);
  return out;
}

Vector update(const Vector& x_pred, const Vector& y, const Matrix& K,
              const Matrix& C) {
  requireShape(K, x_pred.size(), y.size(), "K");
  return x_pred + K * (y - C * x_pred);
}

StabilityMatrices stabilityMatrices(const DiscretizedModel& dm, const Matrix& C,
                                    const Matrix& F_d, const Matrix& K) {
  const auto nx = dm.Ad.rows();
  const Matrix I = Matrix::Identity(nx, nx);
  const Matrix project = I - dm.Ed * F_d * C;
  const Matrix IK = I - K * C;
  StabilityMatrices m;
  m.A_bar = project * dm.Ad;
  m.G_bar = project * dm.Gd;
  m.D_bar = -dm.Ed * F_d;
  m.A_tilde = IK * m.A_bar;
  m.G_tilde = IK * m.G_bar;
  m.D_tilde = IK * m.D_bar - K;
  return m;
}

Matrix unknownInputErrorCov(const Matrix& P_prev, const DiscretizedModel& dm,
                            const Matrix& C, const Matrix& G, const Matrix& Q,
                            const Matrix& R, const Matrix& F_d) {
  const Matrix CA = C * dm.Ad;
  const Matrix CG = C * G;
  const Matrix inner = CA * P_prev * CA.transpose() +
                       CG * Q * CG.transpose() * dm.dt + R;
  return symmetrize(F_d * inner * F_d.transpose());
}

std::pair<FilterState, StepReport> step(const FilterState& state,
                                        const Vector& u, const Vector& y,
                                        const SystemModel& model,
                                        const GainPolicy& policy) {
  const auto& dims = model.dims();
  requireSize(state.x_hat, dims.nx, "x_hat");
  requireSize(y, dims.ny, "y");
  const double t = static_cast<double>(state.k) * model.dt();
  const std::size_t k = state.k + 1;

  const DiscretizedModel dm = discretize(model, t);
  const Matrix C = model.C(k);
  const Matrix R = model.R(k);
  const Matrix G = model.G(t);
  const Matrix Q = model.Q(t);

  StepReport report;
  report.x_star = predictNoInput(state.x_hat, u, dm);
  UnknownInputEstimate ui = estimateUnknownInput(y, report.x_star, dm, C);
  report.d_hat = ui.d_hat;
  report.F_d = ui.F_d;
  report.x_pred = predictWithInput(report.x_star, ui.d_hat, dm);

  report.P_pred = symmetrize(dm.Ad * state.P * dm.Ad.transpose() +
                             G * Q * G.transpose() * dm.dt);
  switch (policy.mode) {
    case GainPolicy::Mode::kOptimal:
      report.K = kalmanGain(report.P_pred, C, R);
      break;
    case GainPolicy::Mode::kZero:
      report.K = Matrix::Zero(dims.nx, dims.ny);
      break;
    case GainPolicy::Mode::kFixed:
      requireShape(policy.fixed, dims.nx, dims.ny, "fixed gain");
      report.K = policy.fixed;
      break;
  }
  report.L = combinedGain(report.K, C, dm.Ed, ui.F_d);

  const StabilityMatrices stab = stabilityMatrices(dm, C, ui.F_d, report.K);
  report.A_bar = stab.A_bar;
  report.A_tilde = stab.A_tilde;

  FilterState next;
  next.x_hat = update(report.x_pred, y, report.K, C);
  if (!next.x_hat.allFinite()) {
    throw NumericalError(fmt::format("state estimate diverged at step {}", k));
  }
  next.P = josephUpdate(report.P_pred, report.L, C, R);
  next.d_hat = ui.d_hat;
  next.Pd = unknownInputErrorCov(state.P, dm, C, G, Q, R, ui.F_d);
  next.gamma = ui.gamma;
  next.k = k;
  return {std::move(next), std::move(report)};
}

}  // namespace uikf

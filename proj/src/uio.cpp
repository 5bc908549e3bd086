#include "uikf/uio.hpp"

#include "uikf/r4skf.hpp"

namespace uikf {

ObserverState ObserverState::initial(const Vector& x0, Eigen::Index nd) {
  return {x0, x0, x0, Vector::Zero(nd)};
}

ObserverState observerStep(const ObserverState& state, const Vector& y,
                           const Vector& u, const DiscretizedModel& dm,
                           const Matrix& C, const Matrix& L,
                           const Matrix& F_d) {
  const auto nx = dm.Ad.rows();
  requireSize(state.x_hat, nx, "x_hat");
  requireShape(C, y.size(), nx, "C");
  requireShape(L, nx, y.size(), "L");
  requireShape(F_d, dm.Ed.cols(), y.size(), "F_d");

  ObserverState next;
  next.w = dm.Ad * state.x_hat + dm.Bd * u;
  next.d_hat = F_d * (y - C * next.w);
  next.z = next.w + dm.Ed * next.d_hat;
  next.x_hat = next.z + L * (y - C * next.z);
  return next;
}

ObserverState observerStep(const ObserverState& state, const Vector& y,
                           const Vector& u, const SystemModel& model,
                           std::size_t k, const Matrix& L) {
  const double t = static_cast<double>(k) * model.dt();
  const DiscretizedModel dm = discretize(model, t);
  const Matrix C = model.C(k + 1);
  return observerStep(state, y, u, dm, C, L, pinv(C * dm.Ed));
}

double verifyObserverStability(const DiscretizedModel& dm, const Matrix& C,
                               const Matrix& F_d, const Matrix& L) {
  return spectralRadius(stabilityMatrices(dm, C, F_d, L).A_tilde);
}

Matrix pinvObserverGain(const Matrix& C) { return pinv(C); }

Matrix steadyStateGain(const SystemModel& model, const Matrix& P0,
                       std::size_t steps) {
  Matrix P = P0;
  Matrix K;
  for (std::size_t k = 1; k <= steps; ++k) {
    const double t = static_cast<double>(k - 1) * model.dt();
    const DiscretizedModel dm = discretize(model, t);
    const Matrix C = model.C(k);
    const Matrix F_d = pinv(C * dm.Ed);
    GainAndCovariance gc = gainAndCovariance(P, dm, C, model.G(t), model.Q(t),
                                             model.R(k), F_d);
    P = std::move(gc.P_post);
    K = std::move(gc.K);
  }
  return K;
}

}  // namespace uikf

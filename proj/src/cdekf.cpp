#include "uikf/cdekf.hpp"

#include <cmath>

#include <fmt/format.h>

#include "uikf/errors.hpp"

namespace uikf {

NonlinearModel NonlinearModel::fromLinear(const SystemModel& model) {
  const Matrix A = model.A(0.0);
  const Matrix B = model.B(0.0);
  const Matrix C = model.C(1);
  NonlinearModel m;
  m.f = [A, B](const Vector& x, const Vector& u, double) -> Vector {
    return A * x + B * u;
  };
  m.h = [C](const Vector& x) -> Vector { return C * x; };
  m.F = [A](const Vector&, const Vector&, double) -> Matrix { return A; };
  m.H = [C](const Vector&) -> Matrix { return C; };
  m.E = model.E(0.0);
  m.G = model.G(0.0);
  m.Q = model.Q(0.0);
  m.R = model.R(1);
  m.dims = model.dims();
  m.dt = model.dt();
  return m;
}

Matrix finiteDifferenceJacobian(const std::function<Vector(const Vector&)>& fn,
                                const Vector& x) {
  const Vector f0 = fn(x);
  Matrix J(f0.size(), x.size());
  Vector probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = 1e-6 * (1.0 + std::abs(x(i)));
    probe(i) = x(i) + h;
    const Vector plus = fn(probe);
    probe(i) = x(i) - h;
    const Vector minus = fn(probe);
    probe(i) = x(i);
    J.col(i) = (plus - minus) / (2.0 * h);
  }
  return J;
}

Matrix dynamicsJacobian(const NonlinearModel& model, const Vector& x,
                        const Vector& u, double t) {
  if (model.F) {
    return model.F(x, u, t);
  }
  return finiteDifferenceJacobian(
      [&](const Vector& p) { return model.f(p, u, t); }, x);
}

Matrix outputJacobian(const NonlinearModel& model, const Vector& x) {
  if (model.H) {
    return model.H(x);
  }
  return finiteDifferenceJacobian(model.h, x);
}

Vector propagateState(const Vector& x, const Vector& u, const Vector& d_hat,
                      const NonlinearModel& model, double t,
                      Integrator method) {
  const double dt = model.dt;
  const Vector forcing = model.E * d_hat;
  auto rhs = [&](const Vector& s, double tau) -> Vector {
    return model.f(s, u, tau) + forcing;
  };

  Vector next;
  if (method == Integrator::kEuler) {
    next = x + rhs(x, t) * dt;
  } else {
    const Vector k1 = rhs(x, t);
    const Vector k2 = rhs(x + 0.5 * dt * k1, t + 0.5 * dt);
    const Vector k3 = rhs(x + 0.5 * dt * k2, t + 0.5 * dt);
    const Vector k4 = rhs(x + dt * k3, t + dt);
    next = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  if (!next.allFinite()) {
    throw NumericalError(fmt::format("state integration diverged at t = {}", t));
  }
  return next;
}

Matrix propagateCovariance(const Matrix& P, const Matrix& F, const Matrix& G,
                           const Matrix& Q, double dt) {
  const Matrix FP = F * P;
  const Matrix rate = FP + FP.transpose() + FP * F.transpose() * dt +
                      G * Q * G.transpose();
  return symmetrize(P + rate * dt);
}

std::pair<FilterState, StepReport> cdFourStep(const FilterState& state,
                                              const Vector& u, const Vector& y,
                                              const NonlinearModel& model,
                                              Integrator method) {
  const auto& dims = model.dims;
  requireSize(state.x_hat, dims.nx, "x_hat");
  requireSize(y, dims.ny, "y");
  const double dt = model.dt;
  const double t = static_cast<double>(state.k) * dt;
  const std::size_t k = state.k + 1;
  const auto nx = dims.nx;

  const Matrix F = dynamicsJacobian(model, state.x_hat, u, t);
  DiscretizedModel dm;
  dm.Ad = Matrix::Identity(nx, nx) + F * dt;
  dm.Bd = Matrix::Zero(nx, dims.nu);
  dm.Ed = model.E * dt;
  dm.Gd = model.G * dt;
  dm.t = t;
  dm.dt = dt;

  StepReport report;
  report.x_star =
      propagateState(state.x_hat, u, Vector::Zero(dims.nd), model, t, method);

  const Matrix Hstar = outputJacobian(model, report.x_star);
  const Matrix HEd = Hstar * dm.Ed;
  if (numericalRank(HEd) < dims.nd) {
    throw StructuralError(fmt::format(
        "rank(H E_d) < n_d at the linearization point, t = {}", t));
  }
  const Vector gamma = y - model.h(report.x_star);
  report.F_d = pinv(HEd);
  report.d_hat = report.F_d * gamma;

  // Under Euler, x + (f + E d̂) dt = x* + E_d d̂, so the linear path is reused.
  report.x_pred = method == Integrator::kEuler
                      ? Vector(report.x_star + dm.Ed * report.d_hat)
                      : propagateState(state.x_hat, u, report.d_hat, model, t,
                                       method);

  const Matrix H = outputJacobian(model, report.x_pred);
  report.P_pred = propagateCovariance(state.P, F, model.G, model.Q, dt);
  report.K = kalmanGain(report.P_pred, H, model.R);
  report.L = combinedGain(report.K, H, dm.Ed, report.F_d);
  const StabilityMatrices stab = stabilityMatrices(dm, H, report.F_d, report.K);
  report.A_bar = stab.A_bar;
  report.A_tilde = stab.A_tilde;

  FilterState next;
  next.x_hat = report.x_pred + report.K * (y - model.h(report.x_pred));
  if (!next.x_hat.allFinite()) {
    throw NumericalError(fmt::format("state estimate diverged at step {}", k));
  }
  next.P = josephUpdate(report.P_pred, report.L, H, model.R);
  next.d_hat = report.d_hat;
  next.Pd = unknownInputErrorCov(state.P, dm, Hstar, model.G, model.Q, model.R,
                                 report.F_d);
  next.gamma = gamma;
  next.k = k;
  return {std::move(next), std::move(report)};
}

}  // namespace uikf

#pragma once

#include <functional>
#include <optional>
#include <utility>

#include "uikf/model.hpp"
#include "uikf/r4skf.hpp"

namespace uikf {

/// x' = f(x, u, t) + E d + G w,  y_k = h(x_k) + v_k.
struct NonlinearModel {
  using Dynamics = std::function<Vector(const Vector& x, const Vector& u, double t)>;
  using Output = std::function<Vector(const Vector& x)>;
  using DynamicsJacobian =
      std::function<Matrix(const Vector& x, const Vector& u, double t)>;
  using OutputJacobian = std::function<Matrix(const Vector& x)>;

  Dynamics f;
  Output h;
  /// Optional analytic Jacobians; central differences are used when absent.
  DynamicsJacobian F;
  OutputJacobian H;
  Matrix E;
  Matrix G;
  Matrix Q;
  Matrix R;
  Dimensions dims;
  double dt = 0.01;

  /// Linear plant x' = A x + B u, h(x) = C x with analytic Jacobians.
  static NonlinearModel fromLinear(const SystemModel& model);
};

enum class Integrator { kEuler, kRk4 };

/// Central-difference step 1e-6 (1 + |x_i|).
Matrix finiteDifferenceJacobian(const std::function<Vector(const Vector&)>& fn,
                                const Vector& x);

Matrix dynamicsJacobian(const NonlinearModel& model, const Vector& x,
                        const Vector& u, double t);
Matrix outputJacobian(const NonlinearModel& model, const Vector& x);

/// Integrates x' = f(x, u, t) + E d̂ over one dt with u and d̂ held constant.
/// Throws NumericalError on a non-finite result.
Vector propagateState(const Vector& x, const Vector& u, const Vector& d_hat,
                      const NonlinearModel& model, double t,
                      Integrator method = Integrator::kEuler);

/// P + [F P + P F^T + F P F^T dt + G Q G^T] dt, symmetrized.
Matrix propagateCovariance(const Matrix& P, const Matrix& F, const Matrix& G,
                           const Matrix& Q, double dt);

/// Four-step recursion on the linearization: A_d = I + F dt, E_d = E dt,
/// H at x* for the unknown-input extraction and at x̂_{k|k-1} for the gain.
std::pair<FilterState, StepReport> cdFourStep(
    const FilterState& state, const Vector& u, const Vector& y,
    const NonlinearModel& model, Integrator method = Integrator::kEuler);

}  // namespace uikf

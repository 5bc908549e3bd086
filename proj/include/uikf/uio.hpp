#pragma once

#include "uikf/model.hpp"

namespace uikf {

/// Deterministic unknown-input observer. Holds no covariance.
struct ObserverState {
  Vector w;      ///< input-free prediction
  Vector z;      ///< prediction including d̂
  Vector x_hat;
  Vector d_hat;

  /// w(0) = z(0) = x̂(0), d̂ = 0.
  static ObserverState initial(const Vector& x0, Eigen::Index nd);
};

/// One observer update on the shared first-order discretization:
///   w = A_d x̂ + B_d u,  d̂ = F_d (y - C w),  z = w + E_d d̂,
///   x̂ = z + L (y - C z).
ObserverState observerStep(const ObserverState& state, const Vector& y,
                           const Vector& u, const DiscretizedModel& dm,
                           const Matrix& C, const Matrix& L, const Matrix& F_d);

/// Convenience overload: discretizes at t_k = k dt and uses F_d = (C E_d)^+.
ObserverState observerStep(const ObserverState& state, const Vector& y,
                           const Vector& u, const SystemModel& model,
                           std::size_t k, const Matrix& L);

/// rho((I - L C) Ā) with Ā = (I - E_d F_d C) A_d.
double verifyObserverStability(const DiscretizedModel& dm, const Matrix& C,
                               const Matrix& F_d, const Matrix& L);

/// L = C^+ (exactly C^-1 in the square case).
Matrix pinvObserverGain(const Matrix& C);

/// Optimal four-step filter gain after `steps` noise-free covariance
/// recursions from P0 on a time-invariant model.
Matrix steadyStateGain(const SystemModel& model, const Matrix& P0,
                       std::size_t steps = 2000);

}  // namespace uikf

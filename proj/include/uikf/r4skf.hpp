#pragma once

#include <cstddef>
#include <utility>

#include "uikf/model.hpp"

namespace uikf {

/// Recursion state of the four-step filter after processing measurement k.
struct FilterState {
  Vector x_hat;  ///< x̂_{k|k}
  Matrix P;      ///< P*_{k|k}
  Vector d_hat;  ///< d̂(t_{k-1}), estimated at step k
  Matrix Pd;     ///< covariance of d - d̂
  Vector gamma;  ///< input-free innovation y_k - C_k x*_{k|k-1}
  std::size_t k = 0;

  /// d̂ = 0 and P^d = I.
  static FilterState initial(const Vector& x0, const Matrix& P0, Eigen::Index nd,
                             Eigen::Index ny);
};

struct StepReport {
  Vector x_star;  ///< input-free prediction x*_{k|k-1}
  Vector x_pred;  ///< x̂_{k|k-1}
  Vector d_hat;
  Matrix F_d;  ///< (C E_d)^+
  Matrix K;
  Matrix L;  ///< K + (I - K C) E_d F_d
  Matrix A_bar;
  Matrix A_tilde;
  Matrix P_pred;
};

struct UnknownInputEstimate {
  Vector d_hat;
  Matrix F_d;
  Vector gamma;
};

struct GainAndCovariance {
  Matrix P_pred;
  Matrix K;
  Matrix L;
  Matrix P_post;
};

struct StabilityMatrices {
  Matrix A_bar;
  Matrix A_tilde;
  Matrix G_bar;
  Matrix D_bar;
  Matrix G_tilde;
  Matrix D_tilde;
};

/// How step() chooses the measurement-update gain. The covariance is always
/// propagated with the Joseph form, which is valid for any gain.
struct GainPolicy {
  enum class Mode { kOptimal, kZero, kFixed };
  Mode mode = Mode::kOptimal;
  Matrix fixed;  ///< n_x x n_y, used when mode == kFixed

  static GainPolicy optimal() { return {}; }
  static GainPolicy zero() { return {Mode::kZero, {}}; }
  static GainPolicy fixedGain(Matrix K) { return {Mode::kFixed, std::move(K)}; }
};

/// Reciprocal condition number below which the innovation covariance is
/// treated as singular.
inline constexpr double kInnovationRcondFloor = 1e-14;

/// x* = A_d x̂ + B_d u.
Vector predictNoInput(const Vector& x_hat, const Vector& u,
                      const DiscretizedModel& dm);

/// gamma* = y - C x*, F_d = (C E_d)^+, d̂ = F_d gamma*. Throws StructuralError
/// when rank(C E_d) < n_d.
UnknownInputEstimate estimateUnknownInput(const Vector& y, const Vector& x_star,
                                          const DiscretizedModel& dm,
                                          const Matrix& C);

/// x̂_{k|k-1} = x* + E_d d̂.
Vector predictWithInput(const Vector& x_star, const Vector& d_hat,
                        const DiscretizedModel& dm);

/// Covariance prediction, optimal gain, combined gain L and Joseph update.
/// Q is the continuous process-noise PSD and G the continuous noise matrix;
/// the prediction adds G Q G^T dt. Throws NumericalError when the innovation
/// covariance is singular.
GainAndCovariance gainAndCovariance(const Matrix& P_prev,
                                    const DiscretizedModel& dm,
                                    const Matrix& C, const Matrix& G,
                                    const Matrix& Q, const Matrix& R,
                                    const Matrix& F_d);

/// Optimal gain K = P C^T (C P C^T + R)^-1.
Matrix kalmanGain(const Matrix& P_pred, const Matrix& C, const Matrix& R);

/// L = K + (I - K C) E_d F_d.
Matrix combinedGain(const Matrix& K, const Matrix& C, const Matrix& Ed,
                    const Matrix& F_d);

/// (I - L C) P (I - L C)^T + L R L^T, symmetrized.
Matrix josephUpdate(const Matrix& P_pred, const Matrix& L, const Matrix& C,
                    const Matrix& R);

/// x̂_{k|k} = x̂_{k|k-1} + K (y - C x̂_{k|k-1}).
Vector update(const Vector& x_pred, const Vector& y, const Matrix& K,
              const Matrix& C);

StabilityMatrices stabilityMatrices(const DiscretizedModel& dm, const Matrix& C,
                                    const Matrix& F_d, const Matrix& K);

/// P^d = F_d [C A_d P A_d^T C^T + C G Q G^T C^T dt + R] F_d^T.
Matrix unknownInputErrorCov(const Matrix& P_prev, const DiscretizedModel& dm,
                            const Matrix& C, const Matrix& G, const Matrix& Q,
                            const Matrix& R, const Matrix& F_d);

/// One full recursion: consumes measurement y_{k+1} and the known input over
/// [t_k, t_{k+1}).
std::pair<FilterState, StepReport> step(const FilterState& state,
                                        const Vector& u, const Vector& y,
                                        const SystemModel& model,
                                        const GainPolicy& policy = {});

}  // namespace uikf

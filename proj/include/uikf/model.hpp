#pragma once

#include <cstddef>
#include <functional>

#include "uikf/linalg.hpp"

namespace uikf {

struct Dimensions {
  Eigen::Index nx = 0;
  Eigen::Index nu = 0;
  Eigen::Index nd = 0;
  Eigen::Index ny = 0;
  Eigen::Index nw = 0;
};

/**
 * Continuous-discrete linear plant
 *
 *   x'(t) = A(t) x + B(t) u + E(t) d + G(t) w,   w ~ N(0, Q(t))
 *   y_k   = C_k x_k + v_k,                       v ~ N(0, R_k)
 *
 * The continuous matrices are evaluated by time, the measurement matrices by
 * step index. Instances are immutable once built.
 */
class SystemModel {
 public:
  using TimeFn = std::function<Matrix(double t)>;
  using StepFn = std::function<Matrix(std::size_t k)>;

  SystemModel(TimeFn A, TimeFn B, TimeFn E, TimeFn G, StepFn C, TimeFn Q,
              StepFn R, Dimensions dims, double dt);

  /// Wraps constant matrices as callbacks; dimensions are inferred.
  static SystemModel timeInvariant(const Matrix& A, const Matrix& B,
                                   const Matrix& E, const Matrix& G,
                                   const Matrix& C, const Matrix& Q,
                                   const Matrix& R, double dt);

  Matrix A(double t) const;
  Matrix B(double t) const;
  Matrix E(double t) const;
  Matrix G(double t) const;
  Matrix Q(double t) const;
  Matrix C(std::size_t k) const;
  Matrix R(std::size_t k) const;

  const Dimensions& dims() const noexcept { return dims_; }
  double dt() const noexcept { return dt_; }

  /// Same plant with a different sample period.
  SystemModel withDt(double dt) const;
  /// Same plant with R_k replaced by scale * R_k.
  SystemModel withScaledR(double scale) const;

  /// Checks shapes, symmetry/definiteness of Q and R, n_d <= n_y and the rank
  /// condition at (t, k). Throws DimensionError or StructuralError.
  void validate(double t, std::size_t k) const;

 private:
  TimeFn A_, B_, E_, G_, Q_;
  StepFn C_, R_;
  Dimensions dims_;
  double dt_;
};

/// First-order discretization over one sample period starting at t.
struct DiscretizedModel {
  Matrix Ad;
  Matrix Bd;
  Matrix Ed;
  Matrix Gd;
  double t = 0.0;
  double dt = 0.0;
};

/// A_d = I + A(t) dt, B_d = B(t) dt, E_d = E(t) dt, G_d = G(t) dt.
DiscretizedModel discretize(const SystemModel& model, double t);

inline constexpr double kDefaultRankTol = 1e-10;

/// Numerical rank: singular values above tol * sigma_max.
Eigen::Index numericalRank(const Matrix& m, double tol = kDefaultRankTol);

/// True iff rank(C E) == rank(E) == cols(E).
bool checkRankCondition(const Matrix& C, const Matrix& E,
                        double tol = kDefaultRankTol);

/// Moore-Penrose pseudo-inverse via SVD; singular values below
/// tol * sigma_max are treated as zero.
Matrix pinv(const Matrix& m, double tol = kDefaultRankTol);

}  // namespace uikf

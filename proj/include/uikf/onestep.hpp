#pragma once

#include <cstdint>

#include "uikf/model.hpp"

namespace uikf {

/// n_x = n_y = n_d with invertible C and E.
struct SquareCaseModel {
  Matrix C;
  Matrix E;
  Matrix R;
  double dt = 0.0;

  /// Throws StructuralError unless C and E are square, of equal size and
  /// have condition number below 1e12.
  void validate() const;
};

inline constexpr double kSquareCaseMaxCondition = 1e12;

/// x̂_{k|k} = C^-1 y, solved by LU with partial pivoting.
Vector oneStepEstimate(const Vector& y, const Matrix& C);

/// Exact error covariance C^-1 R C^-T of the one-step estimate.
Matrix oneStepErrorCov(const Matrix& C, const Matrix& R);

/// True when the model has n_x = n_y = n_d.
bool isSquareCase(const Dimensions& dims);

struct EquivalenceOptions {
  std::size_t steps = 500;
  std::uint64_t seed = 1;
  /// Added to the true initial state to form x̂_0.
  Vector initial_offset;
  bool noise = true;
  /// Amplitude of the random piecewise-constant unknown input; 0 disables it.
  double input_amplitude = 1.0;
};

struct EquivalenceReport {
  double max_filter_vs_one_step = 0.0;   ///< max_k ||x̂_R4SKF - C^-1 y||
  double max_optimal_vs_zero_gain = 0.0; ///< max_k ||x̂(K_opt) - x̂(K=0)||
  double max_a_bar_norm = 0.0;           ///< max_k ||Ā_k|| / ||A_d||
};

/// Runs the full four-step filter (with optimal and with zero gain) and the
/// one-step estimator on the same simulated data. Deviations are measured in
/// the infinity norm relative to max(1, ||x||).
EquivalenceReport equivalenceCheck(const SystemModel& model,
                                   const EquivalenceOptions& options);

/// Square test plant: n = 2, A = [[0,1],[0,0]], B = 0, C = E = G = I,
/// Q = 1e-6 I, R = 1e-6 I.
SystemModel squareTestModel(double dt = 0.01);

}  // namespace uikf

#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "uikf/model.hpp"

namespace uikf {

/// Random-walk augmentation x_a = [x; d]:
///   A_a = [A E; 0 0], B_a = [B; 0], G_a = [G 0; 0 I], C_a = [C 0].
struct AugmentedModel {
  Matrix A_a;
  Matrix B_a;
  Matrix G_a;
  Matrix C_a;
  Matrix Q_a;  ///< blkdiag(Q, Q^d)
};

AugmentedModel augment(const SystemModel& model, double t, std::size_t k,
                       const Matrix& Qd);

/// Fixed-capacity ring buffer of innovation vectors.
class InnovationWindow {
 public:
  InnovationWindow() = default;
  InnovationWindow(std::size_t capacity, Eigen::Index dim);

  void push(const Vector& gamma);
  std::size_t size() const noexcept { return count_; }
  std::size_t capacity() const noexcept { return buffer_.size(); }
  bool empty() const noexcept { return count_ == 0; }

  /// Oldest first.
  std::vector<Vector> contents() const;

 private:
  std::vector<Vector> buffer_;
  std::size_t head_ = 0;
  std::size_t count_ = 0;
};

/// Sample second moment (1/N) sum gamma gamma^T. Throws std::invalid_argument
/// on an empty window.
Matrix innovationCovariance(const InnovationWindow& window);

struct QdOptions {
  /// Which matrix is inspected for negative diagonal entries before the
  /// diagonal-only fallback.
  enum class NegativeCheck { kEstimate, kInnovation };
  NegativeCheck check = NegativeCheck::kEstimate;
  double floor = 1e-12;
  /// Divide the estimate by dt (off by default).
  bool rescale_by_dt = false;
};

/// Q̂^d = (C E_d)^+ C0 (E_d^T C^T)^+, with C0 = C^γ - C G Q G^T C^T dt - R.
/// If the inspected matrix has a negative diagonal entry, or the estimate is
/// indefinite, only the diagonal is kept and clamped at `floor`. The result
/// is always symmetric PSD.
Matrix estimateQd(const Matrix& Cgamma, const DiscretizedModel& dm,
                  const Matrix& C, const Matrix& Q, const Matrix& G,
                  const Matrix& R, const QdOptions& options = {});

struct A2KFOptions {
  std::size_t window = 10;
  double qd_initial = 1e-6;
  /// Q̂^d is held at its initial value when false.
  bool adapt = true;
  QdOptions qd;
};

struct A2KFState {
  Vector x_a;
  Matrix P_a;
  InnovationWindow innovations;
  Matrix Qd_hat;
  std::size_t k = 0;

  /// x_a = [x0; 0], P_a = blkdiag(P0, Pd0), Q̂^d = qd_initial I.
  static A2KFState initial(const Vector& x0, const Matrix& P0, const Matrix& Pd0,
                           const A2KFOptions& options, Eigen::Index ny);

  Vector stateEstimate() const;
  Vector inputEstimate() const;
};

struct A2KFReport {
  Vector innovation;
  Matrix K;
  Matrix Qd_used;  ///< Q̂^d applied in this step's prediction
};

/// Standard KF predict/update on the augmented system with the Q̂^d derived
/// from innovations up to the previous step, then refreshes Q̂^d.
std::pair<A2KFState, A2KFReport> a2kfStep(const A2KFState& state,
                                          const Vector& u, const Vector& y,
                                          const SystemModel& model,
                                          const A2KFOptions& options = {});

}  // namespace uikf

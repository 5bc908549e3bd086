#include "uikf/linalg.hpp"

#include <string>

#include <fmt/format.h>

#include "uikf/errors.hpp"

namespace uikf {

void requireShape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                  std::string_view what) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionError(fmt::format("{} is {}x{}, expected {}x{}", what,
                                     m.rows(), m.cols(), rows, cols));
  }
}

void requireSize(const Vector& v, Eigen::Index size, std::string_view what) {
  if (v.size() != size) {
    throw DimensionError(
        fmt::format("{} has length {}, expected {}", what, v.size(), size));
  }
}

double spectralRadius(const Matrix& m) {
  if (m.rows() != m.cols()) {
    throw DimensionError("spectral radius needs a square matrix");
  }
  if (m.size() == 0) {
    return 0.0;
  }
  Eigen::EigenSolver<Matrix> solver(m, /*computeEigenvectors=*/false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

bool allFinite(const Matrix& m) { return m.allFinite(); }

double minEigenvalue(const Matrix& m) {
  if (m.size() == 0) {
    return 0.0;
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(symmetrize(m),
                                               Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

}  // namespace uikf

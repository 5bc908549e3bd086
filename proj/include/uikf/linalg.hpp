#pragma once

#include <string_view>

#include <Eigen/Dense>

namespace uikf {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Throws DimensionError naming `what` unless m is rows x cols.
void requireShape(const Matrix& m, Eigen::Index rows, Eigen::Index cols,
                  std::string_view what);
void requireSize(const Vector& v, Eigen::Index size, std::string_view what);

/// Largest eigenvalue magnitude of a square (not necessarily symmetric) matrix.
double spectralRadius(const Matrix& m);

inline Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

bool allFinite(const Matrix& m);

/// Smallest eigenvalue of the symmetric part of m.
double minEigenvalue(const Matrix& m);

}  // namespace uikf

#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace mbcrb {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Raised when a covariance or normal-equations matrix is not symmetric
/// positive definite, or when a solve is otherwise numerically impossible.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised on inconsistent vector/matrix shapes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Relative symmetry tolerance applied to every covariance input.
inline constexpr double kSymmetryTolerance = 1e-12;

bool is_symmetric(const Matrix& m, double rel_tol = kSymmetryTolerance);
Matrix symmetrize(const Matrix& m);

/// Smallest eigenvalue of the symmetric part of `m`.
double min_eigenvalue(const Matrix& m);

/// PSD check with the tolerance used for returned bound matrices:
/// symmetric within 1e-12 and every eigenvalue >= -1e-10 * trace.
bool is_bound_psd(const Matrix& m);

/// Cholesky factor of a symmetric positive definite matrix.
///
/// The input is symmetrised before factorisation. Construction throws
/// NumericalError when the input is asymmetric beyond kSymmetryTolerance or
/// when a pivot is not strictly positive.
class SpdFactor {
 public:
  SpdFactor() = default;
  explicit SpdFactor(const Matrix& spd, const std::string& what = "matrix");

  Eigen::Index dim() const { return llt_.rows(); }
  Matrix lower() const { return llt_.matrixL(); }

  Vector solve(const Vector& b) const { return llt_.solve(b); }
  Matrix solve(const Matrix& b) const { return llt_.solve(b); }
  Matrix inverse() const;
  double log_det() const;

 private:
  Eigen::LLT<Matrix> llt_;
};

}  // namespace mbcrb

#include "mbcrb/linalg.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>

namespace mbcrb {

bool is_symmetric(const Matrix& m, double rel_tol) {
  if (m.rows() != m.cols()) return false;
  if (m.size() == 0) return true;
  const double scale = m.cwiseAbs().maxCoeff();
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  return asym <= rel_tol * scale;
}

Matrix symmetrize(const Matrix& m) { return 0.5 * (m + m.transpose()); }

double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(m), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

bool is_bound_psd(const Matrix& m) {
  if (!is_symmetric(m)) return false;
  const double trace = m.trace();
  return min_eigenvalue(m) >= -1e-10 * std::abs(trace);
}

SpdFactor::SpdFactor(const Matrix& spd, const std::string& what) {
  if (spd.rows() != spd.cols()) {
    throw DimensionError(what + " is not square");
  }
  if (!is_symmetric(spd)) {
    throw NumericalError(what + " not symmetric");
  }
  llt_.compute(symmetrize(spd));
  if (llt_.info() != Eigen::Success) {
    throw NumericalError(what + " not positive definite");
  }
  // LLT accepts tiny negative pivots as NaN-free sqrt of positive rounding;
  // reject a zero diagonal explicitly.
  const Matrix l = llt_.matrixL();
  for (Eigen::Index i = 0; i < l.rows(); ++i) {
    if (!(l(i, i) > 0.0) || !std::isfinite(l(i, i))) {
      throw NumericalError(what + " not positive definite");
    }
  }
}

Matrix SpdFactor::inverse() const {
  Matrix inv = llt_.solve(Matrix::Identity(dim(), dim()));
  return symmetrize(inv);
}

double SpdFactor::log_det() const {
  const Matrix l = llt_.matrixL();
  return 2.0 * l.diagonal().array().log().sum();
}

}  // namespace mbcrb

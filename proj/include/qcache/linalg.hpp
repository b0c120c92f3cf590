#pragma once

#include <cmath>
#include <complex>

#include <Eigen/Dense>

namespace qcache {

/// True if a = lambda * b for some non-zero complex lambda, comparing the
/// Frobenius-normalized matrices entrywise at `tol`. Works for any pair of
/// dense Eigen expressions with complex scalars.
template <typename DerivedA, typename DerivedB>
bool equal_up_to_scalar(const Eigen::MatrixBase<DerivedA>& a, const Eigen::MatrixBase<DerivedB>& b, double tol) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  const double na = a.norm(), nb = b.norm();
  if (na == 0.0 || nb == 0.0) return na == nb;
  const auto an = (a / na).eval();
  const auto bn = (b / nb).eval();
  // Best unit-modulus phase aligning bn onto an.
  const std::complex<double> overlap = (bn.array().conjugate() * an.array()).sum();
  if (std::abs(overlap) == 0.0) return false;
  const std::complex<double> phase = overlap / std::abs(overlap);
  return ((an - phase * bn).cwiseAbs().maxCoeff()) <= tol;
}

}  // namespace qcache

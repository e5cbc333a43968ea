#pragma once

#include <Eigen/Dense>

#include "dlra/core/common.hpp"

namespace dlra {

/// Orthonormalize the columns of m via Householder QR. All k columns of Q are
/// kept even when m is rank-deficient, so augmented bases retain their full
/// declared width.
template <typename Scalar>
DenseMatrix<Scalar> orth(const DenseMatrix<Scalar>& m) {
  DLRA_REQUIRE(m.allFinite(), "orth: input has non-finite entries");
  DLRA_REQUIRE(m.cols() <= m.rows(), "orth: more columns than rows");
  Eigen::HouseholderQR<DenseMatrix<Scalar>> qr(m);
  DenseMatrix<Scalar> q =
      qr.householderQ() * DenseMatrix<Scalar>::Identity(m.rows(), m.cols());
  return q;
}

/// Orthonormal directions that extend `basis` (orthonormal columns) by the
/// span of `update`: returns the trailing block of a Householder QR of
/// [basis, update], width min(update.cols(), rows - basis.cols()). The block
/// is orthonormal and orthogonal to range(basis) even when `update` is zero
/// or dependent, so [basis, block] is a valid augmented basis of fixed width.
template <typename Scalar>
DenseMatrix<Scalar> orth_complement(const DenseMatrix<Scalar>& basis,
                                    const DenseMatrix<Scalar>& update) {
  DLRA_REQUIRE(basis.rows() == update.rows(),
               "orth_complement: row count mismatch");
  DLRA_REQUIRE(update.allFinite(), "orth_complement: non-finite update");
  const Index rows = basis.rows();
  const Index nb = basis.cols();
  const Index width = std::min(update.cols(), rows - nb);
  if (width <= 0) return DenseMatrix<Scalar>(rows, 0);

  DenseMatrix<Scalar> stacked(rows, nb + update.cols());
  stacked.leftCols(nb) = basis;
  stacked.rightCols(update.cols()) = update;
  Eigen::HouseholderQR<DenseMatrix<Scalar>> qr(stacked);
  DenseMatrix<Scalar> q =
      qr.householderQ() * DenseMatrix<Scalar>::Identity(rows, nb + width);
  return q.rightCols(width);
}

/// ||Q^H Q - I||_F; 0 for perfectly orthonormal columns.
template <typename Scalar>
double orthonormality_defect(const DenseMatrix<Scalar>& q) {
  if (q.cols() == 0) return 0.0;
  DenseMatrix<Scalar> gram = q.adjoint() * q;
  gram -= DenseMatrix<Scalar>::Identity(q.cols(), q.cols());
  return gram.norm();
}

}  // namespace dlra

#pragma once

#include "dlra/core/common.hpp"
#include "dlra/core/state.hpp"

namespace dlra {

/// Orthogonal projection of z onto the tangent space of the rank-r manifold
/// at x: U U^H z (I - V V^H) + z V V^H.
template <typename Scalar>
DenseMatrix<Scalar> tangent_project(const LowRankState<Scalar>& x,
                                    const DenseMatrix<Scalar>& z) {
  DLRA_REQUIRE(z.rows() == x.rows() && z.cols() == x.cols(),
               "tangent_project: shape mismatch");
  const DenseMatrix<Scalar> zv = z * x.V;             // rows x r
  const DenseMatrix<Scalar> uhz = x.U.adjoint() * z;  // r x cols
  const DenseMatrix<Scalar> uhzv = x.U.adjoint() * zv;
  return x.U * uhz + (zv - x.U * uhzv) * x.V.adjoint();
}

/// || (I - P(x)) z ||_F, the normal component left after projecting onto the
/// tangent space at x.
template <typename Scalar>
double normal_component_norm(const LowRankState<Scalar>& x,
                             const DenseMatrix<Scalar>& z) {
  return (z - tangent_project(x, z)).norm();
}

}  // namespace dlra

#pragma once

#include <vector>

#include "dlra/core/common.hpp"
#include "dlra/core/orth.hpp"
#include "dlra/core/random.hpp"

namespace dlra {

/// Low-rank factorization Y = U S V^H with orthonormal U, V. S is dense and
/// generally non-diagonal. Immutable by convention: operations return new
/// states.
template <typename Scalar>
struct LowRankState {
  DenseMatrix<Scalar> U;  // rows x rank, orthonormal columns
  DenseMatrix<Scalar> S;  // rank x rank
  DenseMatrix<Scalar> V;  // cols x rank, orthonormal columns
  double t = 0.0;

  Index rows() const { return U.rows(); }
  Index cols() const { return V.rows(); }
  Index rank() const { return S.rows(); }

  DenseMatrix<Scalar> dense() const { return U * (S * V.adjoint()); }

  /// Frobenius norm of the represented matrix; equals ||S||_F for
  /// orthonormal bases.
  double norm() const { return S.norm(); }

  static constexpr ScalarField field() { return scalar_field<Scalar>(); }
};

/// Throws unless the factorization invariants hold:
/// orthonormal bases (defect <= tol), 1 <= rank <= min(rows, cols),
/// finite entries.
template <typename Scalar>
void validate(const LowRankState<Scalar>& y, double tol = 1e-12) {
  DLRA_REQUIRE(y.U.allFinite() && y.S.allFinite() && y.V.allFinite(),
               "state: non-finite entries");
  DLRA_REQUIRE(y.U.cols() == y.S.rows() && y.V.cols() == y.S.cols() &&
                   y.S.rows() == y.S.cols(),
               "state: factor shape mismatch");
  DLRA_REQUIRE(y.rank() >= 1 && y.rank() <= std::min(y.rows(), y.cols()),
               "state: rank out of range");
  DLRA_REQUIRE(orthonormality_defect(y.U) <= tol,
               "state: U columns not orthonormal");
  DLRA_REQUIRE(orthonormality_defect(y.V) <= tol,
               "state: V columns not orthonormal");
}

enum class SingularValueLaw {
  decade_decay,  // sigma_i = 10^-i, i = 1..r
  unit,          // sigma_i = 1
};

/// Deterministic random low-rank state: bases from QR of seeded Gaussian
/// matrices, singular values from an explicit list.
template <typename Scalar>
LowRankState<Scalar> random_lowrank(Index rows, Index cols, std::uint64_t seed,
                                    const std::vector<double>& sigmas) {
  const Index r = static_cast<Index>(sigmas.size());
  DLRA_REQUIRE(r >= 1 && r <= std::min(rows, cols),
               "random_lowrank: invalid rank");
  GaussianSampler rng(seed);
  LowRankState<Scalar> y;
  y.U = orth<Scalar>(rng.matrix<Scalar>(rows, r));
  y.V = orth<Scalar>(rng.matrix<Scalar>(cols, r));
  y.S = DenseMatrix<Scalar>::Zero(r, r);
  for (Index i = 0; i < r; ++i) y.S(i, i) = static_cast<Scalar>(sigmas[i]);
  return y;
}

template <typename Scalar>
LowRankState<Scalar> random_lowrank(
    Index rows, Index cols, Index rank, std::uint64_t seed,
    SingularValueLaw law = SingularValueLaw::decade_decay) {
  std::vector<double> sigmas(static_cast<std::size_t>(rank));
  for (Index i = 0; i < rank; ++i) {
    sigmas[static_cast<std::size_t>(i)] =
        law == SingularValueLaw::decade_decay
            ? std::pow(10.0, -static_cast<double>(i + 1))
            : 1.0;
  }
  return random_lowrank<Scalar>(rows, cols, seed, sigmas);
}

}  // namespace dlra

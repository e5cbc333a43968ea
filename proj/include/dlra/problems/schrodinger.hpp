#pragma once

#include <complex>

#include "dlra/core/state.hpp"
#include "dlra/core/truncation.hpp"
#include "dlra/ode/sum_factor.hpp"

namespace dlra {

namespace schrodinger_detail {

// second-difference matrix with coupled first/last entries:
// tridiag(-1, 2, -1) + e_1 e_n^T + e_n e_1^T
inline Eigen::SparseMatrix<std::complex<double>, Eigen::RowMajor>
difference_matrix(Index n) {
  using Cplx = std::complex<double>;
  std::vector<Eigen::Triplet<Cplx>> trips;
  trips.reserve(static_cast<std::size_t>(3 * n));
  for (Index i = 0; i < n; ++i) {
    trips.emplace_back(i, i, Cplx(2.0, 0.0));
    if (i > 0) trips.emplace_back(i, i - 1, Cplx(-1.0, 0.0));
    if (i < n - 1) trips.emplace_back(i, i + 1, Cplx(-1.0, 0.0));
  }
  trips.emplace_back(0, n - 1, Cplx(1.0, 0.0));
  trips.emplace_back(n - 1, 0, Cplx(1.0, 0.0));
  Eigen::SparseMatrix<Cplx, Eigen::RowMajor> d(n, n);
  d.setFromTriplets(trips.begin(), trips.end());
  return d;
}

// diag(1 - cos(2 pi j / n)), j = -n/2 .. n/2 - 1
inline DenseVector<std::complex<double>> potential_diagonal(Index n) {
  DenseVector<std::complex<double>> v(n);
  for (Index i = 0; i < n; ++i) {
    const double j = static_cast<double>(i) - static_cast<double>(n) / 2.0;
    v(i) = 1.0 - std::cos(2.0 * M_PI * j / static_cast<double>(n));
  }
  return v;
}

}  // namespace schrodinger_detail

/// Discrete Schroedinger system i dY/dt = H[Y] on an n x n grid with
/// H[Y] = -1/2 (D Y + Y D^T) + Vcos Y Vcos, in structured form
/// F(t, Y) = (i/2) D Y + (i/2) Y D^T - i Vcos Y Vcos.
class SchrodingerProblem {
 public:
  using Cplx = std::complex<double>;

  explicit SchrodingerProblem(Index n) : n_(n), rhs_(n, n) {
    DLRA_REQUIRE(n >= 2 && n % 2 == 0,
                 "schrodinger: grid size must be even and >= 2");
    const Cplx imag_half(0.0, 0.5);
    const Cplx minus_i(0.0, -1.0);
    auto d = schrodinger_detail::difference_matrix(n);
    auto vcos = schrodinger_detail::potential_diagonal(n);
    using Sparse = SumFactorRhs<Cplx>::Sparse;
    rhs_.add_term(Sparse(imag_half * d), sparse_identity<Cplx>(n));
    rhs_.add_term(sparse_identity<Cplx>(n),
                  Sparse(imag_half * Sparse(d.transpose())));
    rhs_.add_term(Sparse(minus_i * sparse_diagonal<Cplx>(vcos)),
                  sparse_diagonal<Cplx>(vcos));
  }

  Index grid_size() const { return n_; }
  const SumFactorRhs<Cplx>& rhs() const { return rhs_; }

  /// Full-rank initial data: random orthonormal bases and singular values
  /// 10^-i, i = 1..n. Deterministic per seed.
  LowRankState<Cplx> initial_full(std::uint64_t seed) const {
    GaussianSampler rng(seed);
    LowRankState<Cplx> y;
    y.U = orth<Cplx>(rng.matrix<double>(n_, n_).cast<Cplx>());
    y.V = orth<Cplx>(rng.matrix<double>(n_, n_).cast<Cplx>());
    y.S = DenseMatrix<Cplx>::Zero(n_, n_);
    for (Index i = 0; i < n_; ++i)
      y.S(i, i) = std::pow(10.0, -static_cast<double>(i + 1));
    return y;
  }

  /// Initial data truncated to the requested rank.
  LowRankState<Cplx> initial_state(Index rank, std::uint64_t seed) const {
    auto full = initial_full(seed);
    return truncate(full, TruncationPolicy::fixed(rank)).state;
  }

  DenseMatrix<Cplx> initial_dense(std::uint64_t seed) const {
    return initial_full(seed).dense();
  }

 private:
  Index n_;
  SumFactorRhs<Cplx> rhs_;
};

}  // namespace dlra

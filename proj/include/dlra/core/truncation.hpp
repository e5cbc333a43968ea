#pragma once

#include <Eigen/SVD>

#include <algorithm>
#include <limits>

#include "dlra/core/common.hpp"
#include "dlra/core/state.hpp"

namespace dlra {

enum class TruncationMode { tolerance, fixed_rank };

/// Rank selection rule applied after each integrator step.
struct TruncationPolicy {
  TruncationMode mode = TruncationMode::tolerance;
  double tolerance = 0.0;  // Frobenius bound on the discarded tail
  Index target_rank = 1;   // fixed_rank mode
  Index r_min = 1;
  Index r_max = std::numeric_limits<Index>::max();

  static TruncationPolicy by_tolerance(double tol, Index r_min = 1,
                                       Index r_max =
                                           std::numeric_limits<Index>::max()) {
    TruncationPolicy p;
    p.mode = TruncationMode::tolerance;
    p.tolerance = tol;
    p.r_min = r_min;
    p.r_max = r_max;
    return p;
  }

  static TruncationPolicy fixed(Index rank) {
    TruncationPolicy p;
    p.mode = TruncationMode::fixed_rank;
    p.target_rank = rank;
    return p;
  }

  void check() const {
    DLRA_REQUIRE(tolerance >= 0.0, "truncation: tolerance must be >= 0");
    DLRA_REQUIRE(r_min >= 1 && r_min <= r_max, "truncation: bad rank bounds");
    DLRA_REQUIRE(target_rank >= 1, "truncation: target rank must be >= 1");
  }
};

template <typename Scalar>
struct TruncationResult {
  LowRankState<Scalar> state;
  double discarded = 0.0;  // sqrt(sum of discarded sigma^2)
  Index pre_rank = 0;      // number of singular values before truncation
};

/// SVD-truncate the factorization u_hat * s_hat * v_hat^H. Tolerance mode
/// picks the minimal rank whose discarded tail satisfies
/// sqrt(sum_{j>r} sigma_j^2) <= tolerance; fixed_rank keeps
/// min(target_rank, available). Both modes clamp to [r_min, r_max].
template <typename Scalar>
TruncationResult<Scalar> truncate(const DenseMatrix<Scalar>& u_hat,
                                  const DenseMatrix<Scalar>& s_hat,
                                  const DenseMatrix<Scalar>& v_hat,
                                  const TruncationPolicy& policy,
                                  double t = 0.0) {
  policy.check();
  DLRA_REQUIRE(u_hat.cols() == s_hat.rows() && v_hat.cols() == s_hat.cols(),
               "truncate: factor shape mismatch");
  DLRA_CHECK_NUMERIC(s_hat.allFinite(), "truncate: non-finite coefficients");

  Eigen::JacobiSVD<DenseMatrix<Scalar>> svd(
      s_hat, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& sigma = svd.singularValues();
  const Index available = sigma.size();
  DLRA_CHECK_NUMERIC(sigma.allFinite(), "truncate: SVD failure");

  // suffix[j] = sum_{i >= j} sigma_i^2, accumulated small-to-large
  std::vector<double> suffix(static_cast<std::size_t>(available) + 1, 0.0);
  for (Index j = available - 1; j >= 0; --j) {
    const double s = static_cast<double>(sigma(j));
    suffix[static_cast<std::size_t>(j)] =
        suffix[static_cast<std::size_t>(j) + 1] + s * s;
  }

  Index r1 = available;
  if (policy.mode == TruncationMode::tolerance) {
    const double budget = policy.tolerance * policy.tolerance;
    for (Index j = 0; j <= available; ++j) {
      if (suffix[static_cast<std::size_t>(j)] <= budget) {
        r1 = j;
        break;
      }
    }
  } else {
    r1 = std::min(policy.target_rank, available);
  }
  r1 = std::clamp(r1, std::min(policy.r_min, available),
                  std::min(policy.r_max, available));

  TruncationResult<Scalar> out;
  out.pre_rank = available;
  out.discarded = std::sqrt(suffix[static_cast<std::size_t>(r1)]);
  out.state.U = u_hat * svd.matrixU().leftCols(r1);
  out.state.V = v_hat * svd.matrixV().leftCols(r1);
  out.state.S = DenseMatrix<Scalar>::Zero(r1, r1);
  for (Index i = 0; i < r1; ++i)
    out.state.S(i, i) = static_cast<Scalar>(sigma(i));
  out.state.t = t;
  return out;
}

template <typename Scalar>
TruncationResult<Scalar> truncate(const LowRankState<Scalar>& y,
                                  const TruncationPolicy& policy) {
  return truncate<Scalar>(y.U, y.S, y.V, policy, y.t);
}

}  // namespace dlra

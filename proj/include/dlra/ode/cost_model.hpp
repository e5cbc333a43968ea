#pragma once

#include <cstdint>
#include <span>

#include "dlra/core/common.hpp"

namespace dlra {

/// Operation counts (multiply-accumulate units) for one macro step of the
/// augmented substep machinery on a structured RHS with M terms whose sparse
/// factors carry c_l entries per row (left, m x m) and d_l entries per row
/// (right, n x n).
struct CostReport {
  std::int64_t aug_k = 0;  // one evaluation F(t0, Y0) V0 at width r
  std::int64_t aug_l = 0;  // one evaluation F(t0, Y0)^H U0 at width r
  std::int64_t ode_k = 0;  // K substep, width 2r, n_ode RHS evaluations
  std::int64_t ode_l = 0;  // L substep, width 2r
  std::int64_t ode_s = 0;  // S substep, 2r x 2r coefficient matrix
  std::int64_t ode_evals = 0;
};

/// Closed-form operation counts, exact integer arithmetic.
inline CostReport cost_estimate(std::int64_t m, std::int64_t n, std::int64_t r,
                                std::span<const std::int64_t> c,
                                std::span<const std::int64_t> d,
                                std::int64_t n_ode) {
  DLRA_REQUIRE(m >= 1 && n >= 1 && r >= 1 && n_ode >= 1,
               "cost_estimate: dimensions must be positive");
  DLRA_REQUIRE(c.size() == d.size() && !c.empty(),
               "cost_estimate: per-term sparsity lists must match");
  CostReport report;
  report.ode_evals = n_ode;
  for (std::size_t l = 0; l < c.size(); ++l) {
    const std::int64_t cl = c[l];
    const std::int64_t dl = d[l];
    report.aug_k += r * (r * n * dl + r * m + m * cl);
    report.aug_l += r * (r * m * cl + r * n + n * dl);
    report.ode_k += n_ode * r * (4 * r * n * dl + 4 * r * m + 2 * m * cl);
    report.ode_l += n_ode * r * (4 * r * m * cl + 4 * r * n + 2 * n * dl);
    report.ode_s += n_ode * r * (4 * r * n * dl + 4 * r * m * cl + 16 * r * r);
  }
  return report;
}

}  // namespace dlra

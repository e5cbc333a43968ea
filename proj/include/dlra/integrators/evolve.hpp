#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "dlra/integrators/step.hpp"

namespace dlra {

/// Per-step diagnostics of a time-stepping run.
struct RunRecord {
  long step = 0;
  double time = 0.0;
  Index rank = 0;
  double norm = 0.0;
  double eta = std::numeric_limits<double>::quiet_NaN();
  double discarded = 0.0;
  double wall_seconds = 0.0;  // cumulative; excluded from deterministic CSVs
  int stages = 0;
  long rhs_evals = 0;
  bool partial_step = false;
};

struct EvolveOptions {
  StepOptions step;
  bool reject_enabled = false;  // retry a step with h/2 when eta > reject_tol
  double reject_tol = std::numeric_limits<double>::infinity();
  Index reject_rank_boost = 0;  // added to r_max on retry
};

template <typename Scalar>
struct EvolveResult {
  LowRankState<Scalar> state;
  std::vector<RunRecord> records;
  bool completed = true;
  std::string message;
  long rejected_steps = 0;
};

template <typename Scalar>
using StepObserver = std::function<void(const LowRankState<Scalar>& before,
                                        const StepResult<Scalar>& result)>;

/// Repeated macro stepping from state.t over a horizon of length
/// final_time with step h; a trailing partial step is taken and flagged when
/// final_time is not an integer multiple of h. Any step failure aborts with
/// the partial trajectory.
template <typename Scalar>
EvolveResult<Scalar> evolve(LowRankState<Scalar> state,
                            const MatrixOde<Scalar>& rhs, double final_time,
                            double h, IntegratorVariant variant,
                            const EvolveOptions& opts,
                            const StepObserver<Scalar>& observer = {}) {
  DLRA_REQUIRE(final_time >= 0.0, "evolve: final_time must be >= 0");
  DLRA_REQUIRE(h > 0.0, "evolve: h must be > 0");

  EvolveResult<Scalar> out;
  out.records.push_back(RunRecord{0, state.t, state.rank(), state.norm(),
                                  std::numeric_limits<double>::quiet_NaN(),
                                  0.0, 0.0, 0, 0, false});

  const double t_end = state.t + final_time;
  long n_full = static_cast<long>(std::floor(final_time / h + 1e-9));
  double remainder = final_time - static_cast<double>(n_full) * h;
  if (remainder < 1e-12 * std::max(1.0, final_time)) remainder = 0.0;

  StepOptions step_opts = opts.step;
  if (opts.reject_enabled) step_opts.estimate_rejection = true;

  double wall = 0.0;
  const long total_steps = n_full + (remainder > 0.0 ? 1 : 0);
  for (long k = 0; k < total_steps; ++k) {
    const bool partial = (k == n_full);
    const double hk = partial ? remainder : h;
    try {
      detail::StageTimer timer;
      StepResult<Scalar> result = step(variant, state, rhs, hk, step_opts);

      if (opts.reject_enabled && std::isfinite(result.eta) &&
          result.eta > opts.reject_tol) {
        ++out.rejected_steps;
        StepOptions retry = step_opts;
        if (retry.policy.r_max <
            std::numeric_limits<Index>::max() - opts.reject_rank_boost)
          retry.policy.r_max += opts.reject_rank_boost;
        StepResult<Scalar> half1 = step(variant, state, rhs, hk / 2, retry);
        StepResult<Scalar> half2 =
            step(variant, half1.state, rhs, hk / 2, retry);
        half2.eta = result.eta;  // report the estimate that triggered retry
        result = std::move(half2);
      }

      wall += timer.seconds();
      if (observer) observer(state, result);
      state = result.state;
      // exact accumulated time; avoids drift from repeated addition
      state.t = partial ? t_end : out.records.front().time + (k + 1) * h;
      out.records.push_back(RunRecord{
          k + 1, state.t, state.rank(), state.norm(), result.eta,
          result.discarded, wall, result.sequential_stages,
          result.k_stats.rhs_evals + result.l_stats.rhs_evals +
              result.s_stats.rhs_evals,
          partial});
    } catch (const std::exception& ex) {
      out.completed = false;
      out.message = std::string("step ") + std::to_string(k + 1) +
                    " failed: " + ex.what();
      break;
    }
  }
  out.state = std::move(state);
  return out;
}

}  // namespace dlra

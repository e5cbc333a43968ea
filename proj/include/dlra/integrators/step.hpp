#pragma once

#include <chrono>
#include <future>
#include <memory>
#include <utility>

#include "dlra/core/orth.hpp"
#include "dlra/core/state.hpp"
#include "dlra/core/truncation.hpp"
#include "dlra/ode/matrix_ode.hpp"
#include "dlra/ode/solvers.hpp"

namespace dlra {

enum class IntegratorVariant {
  parallel1,      // first-order parallel basis-update & Galerkin step
  parallel2_v1,   // second-order parallel step, half-step projected bases
  parallel2_v2,   // second-order parallel step, full K/L span augmentation
  augmented_bug,  // basis update followed by a sequential Galerkin step
};

inline const char* to_string(IntegratorVariant v) {
  switch (v) {
    case IntegratorVariant::parallel1: return "parallel1";
    case IntegratorVariant::parallel2_v1: return "parallel2_v1";
    case IntegratorVariant::parallel2_v2: return "parallel2_v2";
    case IntegratorVariant::augmented_bug: return "augmented_bug";
  }
  return "?";
}

struct StepOptions {
  SolverConfig solver;
  TruncationPolicy policy;
  int threads = 1;                 // >1: K/L/S substeps run concurrently
  bool estimate_rejection = false; // compute eta = ||U~^H F(t0,Y0) V~||
  bool capture_internals = false;  // keep bases/substep endpoints for tests
};

/// Intermediate quantities of one step, kept only on request.
template <typename Scalar>
struct StepInternals {
  DenseMatrix<Scalar> u_aug0, v_aug0;  // first augmentation (2nd-order steps)
  DenseMatrix<Scalar> u_aug1, v_aug1;  // bases entering truncation
  DenseMatrix<Scalar> k1, l1;          // substep endpoints
  DenseMatrix<Scalar> grad_v;          // F(t0, Y0) V0 (2nd-order steps)
  DenseMatrix<Scalar> s_hat;           // assembled coefficient block matrix
};

template <typename Scalar>
struct StepResult {
  LowRankState<Scalar> state;
  Index pre_rank = 0;      // singular values available before truncation
  double discarded = 0.0;  // singular mass dropped by truncation
  double eta = std::numeric_limits<double>::quiet_NaN();
  int sequential_stages = 1;  // ODE-solve stages that cannot overlap
  OdeStats k_stats, l_stats, s_stats;
  double k_seconds = 0.0, l_seconds = 0.0, s_seconds = 0.0;
  std::shared_ptr<const StepInternals<Scalar>> internals;
};

/// eta = ||u_tilde^H F(t0, Y0) v_tilde||_F for orthonormal blocks orthogonal
/// to the retained bases; estimates the normal component driving step
/// rejection.
template <typename Scalar>
double rejection_estimate(const MatrixOde<Scalar>& rhs, double t0,
                          const LowRankState<Scalar>& y0,
                          const DenseMatrix<Scalar>& u_tilde,
                          const DenseMatrix<Scalar>& v_tilde) {
  if (u_tilde.cols() == 0 || v_tilde.cols() == 0) return 0.0;
  return rhs.eval_bilinear(t0, y0.U, y0.S, y0.V, u_tilde, v_tilde).norm();
}

namespace detail {

template <typename Scalar>
DenseMatrix<Scalar> hcat(const DenseMatrix<Scalar>& a,
                         const DenseMatrix<Scalar>& b) {
  DenseMatrix<Scalar> out(a.rows(), a.cols() + b.cols());
  out.leftCols(a.cols()) = a;
  out.rightCols(b.cols()) = b;
  return out;
}

// [[s_bar, l1^H v_tilde], [u_tilde^H k1, 0]]; the zero block is exact.
template <typename Scalar>
DenseMatrix<Scalar> assemble_coefficients(const DenseMatrix<Scalar>& s_bar,
                                          const DenseMatrix<Scalar>& k1,
                                          const DenseMatrix<Scalar>& l1,
                                          const DenseMatrix<Scalar>& u_tilde,
                                          const DenseMatrix<Scalar>& v_tilde) {
  DLRA_REQUIRE(l1.cols() == s_bar.rows() && k1.cols() == s_bar.cols(),
               "assemble: substep widths disagree");
  const Index wu = s_bar.rows() + u_tilde.cols();
  const Index wv = s_bar.cols() + v_tilde.cols();
  DenseMatrix<Scalar> s_hat = DenseMatrix<Scalar>::Zero(wu, wv);
  s_hat.topLeftCorner(s_bar.rows(), s_bar.cols()) = s_bar;
  if (v_tilde.cols() > 0)
    s_hat.topRightCorner(s_bar.rows(), v_tilde.cols()) =
        l1.adjoint() * v_tilde;
  if (u_tilde.cols() > 0)
    s_hat.bottomLeftCorner(u_tilde.cols(), s_bar.cols()) =
        u_tilde.adjoint() * k1;
  return s_hat;
}

class StageTimer {
 public:
  StageTimer() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

// Runs the three substep tasks of one stage, concurrently when requested.
// Tasks share only read-only inputs, so the execution order cannot change
// any output bit.
template <typename FnK, typename FnL, typename FnS>
void run_stage(int threads, FnK&& k_task, FnL&& l_task, FnS&& s_task) {
  if (threads > 1) {
    auto k_future = std::async(std::launch::async, std::forward<FnK>(k_task));
    auto l_future = std::async(std::launch::async, std::forward<FnL>(l_task));
    s_task();
    l_future.get();
    k_future.get();
  } else {
    k_task();
    l_task();
    s_task();
  }
}

}  // namespace detail

/// One step of the first-order parallel integrator: K, L and S substeps run
/// independently from the rank-r factors, the augmented coefficient matrix
/// is assembled from their endpoints, then truncated.
template <typename Scalar>
StepResult<Scalar> step_parallel1(const LowRankState<Scalar>& y0,
                                  const MatrixOde<Scalar>& rhs, double h,
                                  const StepOptions& opts) {
  DLRA_REQUIRE(h > 0.0, "step: h must be > 0");
  using Mat = DenseMatrix<Scalar>;
  const double t0 = y0.t;
  const double t1 = t0 + h;

  const Mat k0 = y0.U * y0.S;
  const Mat l0 = y0.V * y0.S.adjoint();

  StepResult<Scalar> res;
  Mat k1, l1, s1;
  detail::run_stage(
      opts.threads,
      [&] {
        detail::StageTimer timer;
        k1 = integrate(rhs.k_step_rhs(y0.V), k0, t0, t1, opts.solver,
                       &res.k_stats);
        res.k_seconds = timer.seconds();
      },
      [&] {
        detail::StageTimer timer;
        l1 = integrate(rhs.l_step_rhs(y0.U), l0, t0, t1, opts.solver,
                       &res.l_stats);
        res.l_seconds = timer.seconds();
      },
      [&] {
        detail::StageTimer timer;
        s1 = integrate(rhs.s_step_rhs(y0.U, y0.V), y0.S, t0, t1, opts.solver,
                       &res.s_stats);
        res.s_seconds = timer.seconds();
      });

  const Mat u_tilde = orth_complement(y0.U, k1);
  const Mat v_tilde = orth_complement(y0.V, l1);
  const Mat u_hat = detail::hcat(y0.U, u_tilde);
  const Mat v_hat = detail::hcat(y0.V, v_tilde);
  const Mat s_hat = detail::assemble_coefficients(s1, k1, l1, u_tilde,
                                                  v_tilde);

  if (opts.estimate_rejection)
    res.eta = rejection_estimate(rhs, t0, y0, u_tilde, v_tilde);

  auto trunc = truncate(u_hat, s_hat, v_hat, opts.policy, t1);
  res.state = std::move(trunc.state);
  res.pre_rank = trunc.pre_rank;
  res.discarded = trunc.discarded;
  res.sequential_stages = 1;
  if (opts.capture_internals) {
    auto internals = std::make_shared<StepInternals<Scalar>>();
    internals->u_aug1 = u_hat;
    internals->v_aug1 = v_hat;
    internals->k1 = k1;
    internals->l1 = l1;
    internals->s_hat = s_hat;
    res.internals = std::move(internals);
  }
  return res;
}

namespace detail {

// Shared machinery of both second-order parallel steps: augment the bases
// with the projected gradient at t0, run the widened K/L/S substeps, then
// augment once more with directions supplied by `extra_u` / `extra_v`.
template <typename Scalar, typename ExtraU, typename ExtraV>
StepResult<Scalar> step_parallel2_impl(const LowRankState<Scalar>& y0,
                                       const MatrixOde<Scalar>& rhs, double h,
                                       const StepOptions& opts,
                                       ExtraU&& extra_u, ExtraV&& extra_v) {
  DLRA_REQUIRE(h > 0.0, "step: h must be > 0");
  using Mat = DenseMatrix<Scalar>;
  const double t0 = y0.t;
  const double t1 = t0 + h;

  const Mat k0 = y0.U * y0.S;
  const Mat l0 = y0.V * y0.S.adjoint();
  const Mat grad_v = rhs.eval_K(t0, k0, y0.V);  // F(t0, Y0) V0
  const Mat grad_u = rhs.eval_L(t0, l0, y0.U);  // F(t0, Y0)^H U0

  const Mat u_extend = orth_complement(y0.U, grad_v);
  const Mat v_extend = orth_complement(y0.V, grad_u);
  const Mat u_aug0 = hcat(y0.U, u_extend);
  const Mat v_aug0 = hcat(y0.V, v_extend);

  const Mat k0_aug = k0 * (y0.V.adjoint() * v_aug0);
  const Mat l0_aug = l0 * (y0.U.adjoint() * u_aug0);
  const Mat s0_aug =
      (u_aug0.adjoint() * y0.U) * y0.S * (y0.V.adjoint() * v_aug0);

  StepResult<Scalar> res;
  Mat k1, l1, s1;
  run_stage(
      opts.threads,
      [&] {
        StageTimer timer;
        k1 = integrate(rhs.k_step_rhs(v_aug0), k0_aug, t0, t1, opts.solver,
                       &res.k_stats);
        res.k_seconds = timer.seconds();
      },
      [&] {
        StageTimer timer;
        l1 = integrate(rhs.l_step_rhs(u_aug0), l0_aug, t0, t1, opts.solver,
                       &res.l_stats);
        res.l_seconds = timer.seconds();
      },
      [&] {
        StageTimer timer;
        s1 = integrate(rhs.s_step_rhs(u_aug0, v_aug0), s0_aug, t0, t1,
                       opts.solver, &res.s_stats);
        res.s_seconds = timer.seconds();
      });

  const Mat u_tilde = orth_complement(
      u_aug0, extra_u(k1, l1, k0, l0, grad_v, grad_u, u_aug0, v_aug0));
  const Mat v_tilde = orth_complement(
      v_aug0, extra_v(k1, l1, k0, l0, grad_v, grad_u, u_aug0, v_aug0));
  const Mat u_hat = hcat(u_aug0, u_tilde);
  const Mat v_hat = hcat(v_aug0, v_tilde);
  const Mat s_hat = assemble_coefficients(s1, k1, l1, u_tilde, v_tilde);

  if (opts.estimate_rejection)
    res.eta = rejection_estimate(rhs, t0, y0, u_tilde, v_tilde);

  auto trunc = truncate(u_hat, s_hat, v_hat, opts.policy, t1);
  res.state = std::move(trunc.state);
  res.pre_rank = trunc.pre_rank;
  res.discarded = trunc.discarded;
  res.sequential_stages = 1;
  if (opts.capture_internals) {
    auto internals = std::make_shared<StepInternals<Scalar>>();
    internals->u_aug0 = u_aug0;
    internals->v_aug0 = v_aug0;
    internals->u_aug1 = u_hat;
    internals->v_aug1 = v_hat;
    internals->k1 = k1;
    internals->l1 = l1;
    internals->grad_v = grad_v;
    internals->s_hat = s_hat;
    res.internals = std::move(internals);
  }
  return res;
}

}  // namespace detail

/// Second-order parallel step, variant with half-step projected bases: the
/// final augmentation uses K(t1) V^H V* and L(t1) U^H U* where U*, V* are
/// first-order bases at the half step.
template <typename Scalar>
StepResult<Scalar> step_parallel2_v1(const LowRankState<Scalar>& y0,
                                     const MatrixOde<Scalar>& rhs, double h,
                                     const StepOptions& opts) {
  using Mat = DenseMatrix<Scalar>;
  const Scalar half_h = static_cast<Scalar>(0.5 * h);
  // V* = orth(Y0^H U0 + h/2 F(t0,Y0)^H U0) = orth(L0 + h/2 grad_u), and the
  // new range directions are K(t1) V_aug0^H V*; mirrored for the co-range.
  auto u_dirs = [half_h](const Mat& k1, const Mat&, const Mat&, const Mat& l0,
                         const Mat&, const Mat& grad_u, const Mat&,
                         const Mat& v_aug0) {
    const Mat v_star = orth<Scalar>(Mat(l0 + half_h * grad_u));
    return Mat(k1 * (v_aug0.adjoint() * v_star));
  };
  auto v_dirs = [half_h](const Mat&, const Mat& l1, const Mat& k0,
                         const Mat&, const Mat& grad_v, const Mat&,
                         const Mat& u_aug0, const Mat&) {
    const Mat u_star = orth<Scalar>(Mat(k0 + half_h * grad_v));
    return Mat(l1 * (u_aug0.adjoint() * u_star));
  };
  return detail::step_parallel2_impl(y0, rhs, h, opts, u_dirs, v_dirs);
}

/// Second-order parallel step, variant spanning all of K(t1) and L(t1) in
/// the final augmentation (wider coefficient matrix, no half-step bases).
template <typename Scalar>
StepResult<Scalar> step_parallel2_v2(const LowRankState<Scalar>& y0,
                                     const MatrixOde<Scalar>& rhs, double h,
                                     const StepOptions& opts) {
  using Mat = DenseMatrix<Scalar>;
  auto u_dirs = [](const Mat& k1, const Mat&, const Mat&, const Mat&,
                   const Mat&, const Mat&, const Mat&, const Mat&) {
    return k1;
  };
  auto v_dirs = [](const Mat&, const Mat& l1, const Mat&, const Mat&,
                   const Mat&, const Mat&, const Mat&, const Mat&) {
    return l1;
  };
  return detail::step_parallel2_impl(y0, rhs, h, opts, u_dirs, v_dirs);
}

/// Augmented basis-update & Galerkin step: parallel K/L substeps enlarge the
/// bases, then a sequential Galerkin substep updates the coefficient matrix
/// at the doubled rank.
template <typename Scalar>
StepResult<Scalar> step_augmented_bug(const LowRankState<Scalar>& y0,
                                      const MatrixOde<Scalar>& rhs, double h,
                                      const StepOptions& opts) {
  DLRA_REQUIRE(h > 0.0, "step: h must be > 0");
  using Mat = DenseMatrix<Scalar>;
  const double t0 = y0.t;
  const double t1 = t0 + h;

  const Mat k0 = y0.U * y0.S;
  const Mat l0 = y0.V * y0.S.adjoint();

  StepResult<Scalar> res;
  Mat k1, l1;
  detail::run_stage(
      opts.threads,
      [&] {
        detail::StageTimer timer;
        k1 = integrate(rhs.k_step_rhs(y0.V), k0, t0, t1, opts.solver,
                       &res.k_stats);
        res.k_seconds = timer.seconds();
      },
      [&] {
        detail::StageTimer timer;
        l1 = integrate(rhs.l_step_rhs(y0.U), l0, t0, t1, opts.solver,
                       &res.l_stats);
        res.l_seconds = timer.seconds();
      },
      [] {});

  const Mat u_tilde = orth_complement(y0.U, k1);
  const Mat v_tilde = orth_complement(y0.V, l1);
  const Mat u_hat = detail::hcat(y0.U, u_tilde);
  const Mat v_hat = detail::hcat(y0.V, v_tilde);

  // sequential Galerkin update from S(t0) = U^H Y0 V
  const Mat s0_hat =
      (u_hat.adjoint() * y0.U) * y0.S * (y0.V.adjoint() * v_hat);
  Mat s1_hat;
  {
    detail::StageTimer timer;
    s1_hat = integrate(rhs.s_step_rhs(u_hat, v_hat), s0_hat, t0, t1,
                       opts.solver, &res.s_stats);
    res.s_seconds = timer.seconds();
  }

  if (opts.estimate_rejection)
    res.eta = rejection_estimate(rhs, t0, y0, u_tilde, v_tilde);

  auto trunc = truncate(u_hat, s1_hat, v_hat, opts.policy, t1);
  res.state = std::move(trunc.state);
  res.pre_rank = trunc.pre_rank;
  res.discarded = trunc.discarded;
  res.sequential_stages = 2;
  if (opts.capture_internals) {
    auto internals = std::make_shared<StepInternals<Scalar>>();
    internals->u_aug1 = u_hat;
    internals->v_aug1 = v_hat;
    internals->k1 = k1;
    internals->l1 = l1;
    internals->s_hat = s1_hat;
    res.internals = std::move(internals);
  }
  return res;
}

template <typename Scalar>
StepResult<Scalar> step(IntegratorVariant variant,
                        const LowRankState<Scalar>& y0,
                        const MatrixOde<Scalar>& rhs, double h,
                        const StepOptions& opts) {
  switch (variant) {
    case IntegratorVariant::parallel1:
      return step_parallel1(y0, rhs, h, opts);
    case IntegratorVariant::parallel2_v1:
      return step_parallel2_v1(y0, rhs, h, opts);
    case IntegratorVariant::parallel2_v2:
      return step_parallel2_v2(y0, rhs, h, opts);
    case IntegratorVariant::augmented_bug:
      return step_augmented_bug(y0, rhs, h, opts);
  }
  throw InvalidInput("unknown integrator variant");
}

}  // namespace dlra

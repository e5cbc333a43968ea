#pragma once

#include <unsupported/Eigen/MatrixFunctions>

#include <functional>
#include <memory>

#include "dlra/core/state.hpp"
#include "dlra/ode/sum_factor.hpp"

namespace dlra {

enum class SyntheticKind {
  scalar_exponential,  // F(Y) = a Y
  two_sided,           // F(Y) = A Y + Y B, symmetric A and B
  skew,                // F(Y) = A Y - Y A, skew-symmetric A (norm preserving)
};

/// Calibration problem with a closed-form dense solution.
struct SyntheticProblem {
  std::shared_ptr<SumFactorRhs<double>> rhs;
  LowRankState<double> initial;
  std::function<DenseMatrix<double>(double)> closed_form;
  bool norm_preserving = false;
};

inline SyntheticProblem make_synthetic(SyntheticKind kind, Index m, Index n,
                                       Index r, std::uint64_t seed,
                                       double rate = -1.0,
                                       std::vector<double> sigmas = {}) {
  using Mat = DenseMatrix<double>;
  SyntheticProblem problem;
  problem.initial = sigmas.empty()
                        ? random_lowrank<double>(m, n, r, seed)
                        : random_lowrank<double>(m, n, seed, sigmas);
  const Mat y0 = problem.initial.dense();
  auto rhs = std::make_shared<SumFactorRhs<double>>(m, n);

  switch (kind) {
    case SyntheticKind::scalar_exponential: {
      using Sparse = SumFactorRhs<double>::Sparse;
      rhs->add_term(Sparse(rate * sparse_identity<double>(m)),
                    sparse_identity<double>(n));
      problem.closed_form = [y0, rate](double t) {
        return Mat(std::exp(rate * t) * y0);
      };
      break;
    }
    case SyntheticKind::two_sided: {
      GaussianSampler rng(seed + 1);
      Mat a = rng.matrix<double>(m, m);
      a = 0.5 * (a + a.transpose()).eval();
      a /= a.norm();
      Mat b = rng.matrix<double>(n, n);
      b = 0.5 * (b + b.transpose()).eval();
      b /= b.norm();
      rhs->add_term(a.sparseView().eval(), sparse_identity<double>(n));
      rhs->add_term(sparse_identity<double>(m), b.sparseView().eval());
      Eigen::SelfAdjointEigenSolver<Mat> ea(a), eb(b);
      problem.closed_form = [y0, ea, eb](double t) {
        const Mat left = ea.eigenvectors() *
                         (t * ea.eigenvalues()).array().exp().matrix().asDiagonal() *
                         ea.eigenvectors().transpose();
        const Mat right = eb.eigenvectors() *
                          (t * eb.eigenvalues()).array().exp().matrix().asDiagonal() *
                          eb.eigenvectors().transpose();
        return Mat(left * y0 * right);
      };
      break;
    }
    case SyntheticKind::skew: {
      DLRA_REQUIRE(m == n, "skew synthetic problem needs m == n");
      GaussianSampler rng(seed + 2);
      Mat a = rng.matrix<double>(m, m);
      a = 0.5 * (a - a.transpose()).eval();
      a /= a.norm();
      rhs->add_term(a.sparseView().eval(), sparse_identity<double>(n));
      rhs->add_term(sparse_identity<double>(m), Mat(-a).sparseView().eval());
      problem.closed_form = [y0, a](double t) {
        const Mat rot = (t * a).exp();
        return Mat(rot * y0 * rot.transpose());
      };
      problem.norm_preserving = true;
      break;
    }
  }
  problem.rhs = std::move(rhs);
  return problem;
}

}  // namespace dlra

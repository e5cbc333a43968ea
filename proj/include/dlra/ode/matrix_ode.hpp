#pragma once

#include <functional>

#include "dlra/core/common.hpp"
#include "dlra/core/state.hpp"

namespace dlra {

/// Right-hand side F(t, Y) of a matrix ODE dY/dt = F(t, Y) together with the
/// projected evaluation forms the substeps need. The defaults compose
/// eval_full; structured implementations override them with fast paths.
template <typename Scalar>
class MatrixOde {
 public:
  using Mat = DenseMatrix<Scalar>;
  using RhsFn = std::function<Mat(double, const Mat&)>;

  virtual ~MatrixOde() = default;

  virtual Index rows() const = 0;
  virtual Index cols() const = 0;

  virtual Mat eval_full(double t, const Mat& y) const = 0;

  /// F(t, K V^H) V with orthonormal projection basis v_basis.
  virtual Mat eval_K(double t, const Mat& k, const Mat& v_basis) const {
    return eval_full(t, k * v_basis.adjoint()) * v_basis;
  }

  /// F(t, U L^H)^H U with orthonormal projection basis u_basis.
  virtual Mat eval_L(double t, const Mat& l, const Mat& u_basis) const {
    return eval_full(t, u_basis * l.adjoint()).adjoint() * u_basis;
  }

  /// U^H F(t, U S V^H) V.
  virtual Mat eval_S(double t, const Mat& s, const Mat& u_basis,
                     const Mat& v_basis) const {
    return u_basis.adjoint() *
           eval_full(t, u_basis * s * v_basis.adjoint()) * v_basis;
  }

  /// p_left^H F(t, yu ys yv^H) p_right for arbitrary orthonormal blocks;
  /// backs the step-rejection estimate.
  virtual Mat eval_bilinear(double t, const Mat& yu, const Mat& ys,
                            const Mat& yv, const Mat& p_left,
                            const Mat& p_right) const {
    return p_left.adjoint() * eval_full(t, yu * ys * yv.adjoint()) * p_right;
  }

  // Substep right-hand sides over one macro step. Bases are captured by
  // value; overrides may precompute projected factors once per step.
  virtual RhsFn k_step_rhs(Mat v_basis) const {
    return [this, v = std::move(v_basis)](double t, const Mat& k) {
      return eval_K(t, k, v);
    };
  }

  virtual RhsFn l_step_rhs(Mat u_basis) const {
    return [this, u = std::move(u_basis)](double t, const Mat& l) {
      return eval_L(t, l, u);
    };
  }

  virtual RhsFn s_step_rhs(Mat u_basis, Mat v_basis) const {
    return [this, u = std::move(u_basis), v = std::move(v_basis)](
               double t, const Mat& s) { return eval_S(t, s, u, v); };
  }
};

/// Wrap a callable (t, Y) -> F(t, Y) as a MatrixOde; projections go through
/// the dense default paths.
template <typename Scalar>
class CallbackOde final : public MatrixOde<Scalar> {
 public:
  using Mat = DenseMatrix<Scalar>;
  using Fn = std::function<Mat(double, const Mat&)>;

  CallbackOde(Index rows, Index cols, Fn fn)
      : rows_(rows), cols_(cols), fn_(std::move(fn)) {}

  Index rows() const override { return rows_; }
  Index cols() const override { return cols_; }
  Mat eval_full(double t, const Mat& y) const override { return fn_(t, y); }

 private:
  Index rows_;
  Index cols_;
  Fn fn_;
};

}  // namespace dlra

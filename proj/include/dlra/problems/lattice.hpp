#pragma once

#include <fstream>
#include <sstream>
#include <vector>

#include "dlra/core/orth.hpp"
#include "dlra/core/state.hpp"
#include "dlra/ode/sum_factor.hpp"
#include "dlra/problems/spherical_harmonics.hpp"

namespace dlra {

/// Material override for one 7x7 block (0-based block coordinates).
struct BlockOverride {
  int row = 0;
  int col = 0;
  double sigma_s = 0.0;
  double sigma_a = 0.0;
  double source = 0.0;
};

/// Lines of "row col sigma_s sigma_a source"; '#' starts a comment.
inline std::vector<BlockOverride> load_block_overrides(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open lattice override file: " + path);
  std::vector<BlockOverride> overrides;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream iss(line);
    BlockOverride o;
    if (!(iss >> o.row >> o.col >> o.sigma_s >> o.sigma_a >> o.source))
      continue;
    DLRA_REQUIRE(o.row >= 0 && o.row < 7 && o.col >= 0 && o.col < 7,
                 "lattice override block out of range");
    overrides.push_back(o);
  }
  return overrides;
}

/// Two-dimensional lattice transport benchmark discretized with moments in
/// direction and first-order upwind-stabilized central differences in space.
/// Unknown layout: Y(cell, moment) with cell = ix + nx * iy over [0,7]^2.
/// The domain splits into 7x7 unit blocks: a checkerboard of absorbers
/// around a central absorbing source block inside a scattering background.
class LatticeProblem {
 public:
  LatticeProblem(Index cells_per_dim, int moment_degree,
                 const std::vector<BlockOverride>& overrides = {})
      : nx_(cells_per_dim),
        degree_(moment_degree),
        moments_((moment_degree + 1) * (moment_degree + 1)),
        dx_(7.0 / static_cast<double>(cells_per_dim)),
        pn_(pn_flux_matrices(moment_degree)),
        rhs_(cells_per_dim * cells_per_dim,
             (moment_degree + 1) * (moment_degree + 1)) {
    DLRA_REQUIRE(nx_ >= 7 && nx_ % 7 == 0,
                 "lattice: cells_per_dim must be a positive multiple of 7");
    build_materials(overrides);
    build_rhs();
  }

  Index cells_per_dim() const { return nx_; }
  int moment_degree() const { return degree_; }
  Index space_size() const { return nx_ * nx_; }
  Index moment_count() const { return moments_; }
  double dx() const { return dx_; }
  const PnMatrices& pn() const { return pn_; }
  const SumFactorRhs<double>& rhs() const { return rhs_; }
  const Eigen::VectorXd& sigma_s() const { return sigma_s_; }
  const Eigen::VectorXd& sigma_a() const { return sigma_a_; }
  Eigen::VectorXd sigma_t() const { return sigma_a_ + sigma_s_; }
  const Eigen::VectorXd& source() const { return source_; }

  /// Isotropic background f = 1e-9 padded to the requested rank with
  /// deterministic orthonormal complements.
  LowRankState<double> initial_state(Index rank) const {
    DLRA_REQUIRE(rank >= 1 && rank <= std::min(space_size(), moment_count()),
                 "lattice: invalid initial rank");
    const Index m = space_size();
    const double value = std::sqrt(4.0 * M_PI) * 1e-9;  // zeroth moment

    LowRankState<double> y;
    DenseMatrix<double> u1(m, 1);
    u1.setConstant(1.0 / std::sqrt(static_cast<double>(m)));
    if (rank > 1) {
      DenseMatrix<double> pad = orth_complement<double>(
          u1, DenseMatrix<double>(
                  DenseMatrix<double>::Identity(m, rank - 1)));
      y.U = DenseMatrix<double>(m, rank);
      y.U << u1, pad;
    } else {
      y.U = u1;
    }
    y.V = DenseMatrix<double>::Identity(moment_count(), rank);
    y.S = DenseMatrix<double>::Zero(rank, rank);
    y.S(0, 0) = value * std::sqrt(static_cast<double>(m));
    return y;
  }

  /// Scalar flux sqrt(4 pi) * zeroth moment, reshaped to the grid.
  Eigen::MatrixXd scalar_flux(const LowRankState<double>& y) const {
    DenseVector<double> zeroth =
        y.U * (y.S * y.V.row(0).adjoint());
    return flux_from_zeroth(zeroth);
  }

  Eigen::MatrixXd scalar_flux(const DenseMatrix<double>& y_dense) const {
    DLRA_REQUIRE(y_dense.rows() == space_size() &&
                     y_dense.cols() == moment_count(),
                 "scalar_flux: shape mismatch");
    return flux_from_zeroth(y_dense.col(0));
  }

 private:
  Eigen::MatrixXd flux_from_zeroth(const DenseVector<double>& zeroth) const {
    DLRA_CHECK_NUMERIC(zeroth.allFinite(), "scalar_flux: non-finite moments");
    Eigen::MatrixXd field(nx_, nx_);
    for (Index iy = 0; iy < nx_; ++iy)
      for (Index ix = 0; ix < nx_; ++ix)
        field(ix, iy) = std::sqrt(4.0 * M_PI) * zeroth(ix + nx_ * iy);
    return field;
  }

  void build_materials(const std::vector<BlockOverride>& overrides) {
    const Index m = space_size();
    sigma_s_ = Eigen::VectorXd::Constant(m, 1.0);
    sigma_a_ = Eigen::VectorXd::Zero(m);
    source_ = Eigen::VectorXd::Zero(m);

    Eigen::Matrix<double, 7, 7> block_ss, block_sa, block_q;
    block_ss.setConstant(1.0);
    block_sa.setZero();
    block_q.setZero();
    for (int i = 1; i <= 5; ++i) {
      for (int j = 1; j <= 5; ++j) {
        if ((i + j) % 2 == 0 && !(i == 3 && j == 3)) {
          block_ss(i, j) = 0.0;
          block_sa(i, j) = 10.0;
        }
      }
    }
    block_ss(3, 3) = 0.0;
    block_sa(3, 3) = 10.0;
    block_q(3, 3) = 1.0;
    for (const auto& o : overrides) {
      block_ss(o.row, o.col) = o.sigma_s;
      block_sa(o.row, o.col) = o.sigma_a;
      block_q(o.row, o.col) = o.source;
    }

    const Index cells_per_block = nx_ / 7;
    for (Index iy = 0; iy < nx_; ++iy) {
      for (Index ix = 0; ix < nx_; ++ix) {
        const int bi = static_cast<int>(ix / cells_per_block);
        const int bj = static_cast<int>(iy / cells_per_block);
        const Index cell = ix + nx_ * iy;
        sigma_s_(cell) = block_ss(bi, bj);
        sigma_a_(cell) = block_sa(bi, bj);
        source_(cell) = block_q(bi, bj);
      }
    }
  }

  using Sparse = SumFactorRhs<double>::Sparse;

  // central difference and second-difference stencils scaled by 1/(2 dx);
  // zero-inflow boundaries through zero-valued ghost cells
  Sparse stencil(bool along_x, bool stabilization) const {
    std::vector<Eigen::Triplet<double>> trips;
    const double scale = 1.0 / (2.0 * dx_);
    for (Index iy = 0; iy < nx_; ++iy) {
      for (Index ix = 0; ix < nx_; ++ix) {
        const Index row = ix + nx_ * iy;
        const Index i = along_x ? ix : iy;
        const Index stride = along_x ? 1 : nx_;
        if (stabilization) trips.emplace_back(row, row, -2.0 * scale);
        if (i > 0)
          trips.emplace_back(row, row - stride,
                             stabilization ? scale : -scale);
        if (i < nx_ - 1) trips.emplace_back(row, row + stride, scale);
      }
    }
    Sparse s(space_size(), space_size());
    s.setFromTriplets(trips.begin(), trips.end());
    return s;
  }

  static Sparse sparse_from_dense(const Eigen::MatrixXd& dense) {
    Sparse s = dense.sparseView(1.0, 1e-14).eval();
    s.makeCompressed();
    return s;
  }

  void build_rhs() {
    rhs_.add_term(Sparse(-stencil(true, false)), sparse_from_dense(pn_.ax));
    rhs_.add_term(stencil(true, true), sparse_from_dense(pn_.abs_ax));
    rhs_.add_term(Sparse(-stencil(false, false)), sparse_from_dense(pn_.ay));
    rhs_.add_term(stencil(false, true), sparse_from_dense(pn_.abs_ay));
    // interaction: -sigma_a Y + sigma_s Y G, with G = diag(0, -1, ..., -1)
    rhs_.add_term(sparse_diagonal<double>(DenseVector<double>(-sigma_a_)),
                  sparse_identity<double>(moment_count()));
    rhs_.add_term(sparse_diagonal<double>(sigma_s_),
                  sparse_diagonal<double>(DenseVector<double>(pn_.g)));
    // isotropic source enters the zeroth moment only
    if (source_.cwiseAbs().maxCoeff() > 0.0) {
      DenseVector<double> e0 =
          DenseVector<double>::Zero(moment_count());
      e0(0) = 1.0;
      rhs_.add_source(std::sqrt(4.0 * M_PI) * source_, e0);
    }
  }

  Index nx_;
  int degree_;
  Index moments_;
  double dx_;
  PnMatrices pn_;
  SumFactorRhs<double> rhs_;
  Eigen::VectorXd sigma_s_, sigma_a_, source_;
};

}  // namespace dlra

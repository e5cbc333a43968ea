#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>

#include "dlra/core/tangent.hpp"
#include "dlra/integrators/step.hpp"
#include "dlra/ode/solvers.hpp"
#include "dlra/problems/lattice.hpp"
#include "dlra/problems/schrodinger.hpp"
#include "dlra/problems/spherical_harmonics.hpp"
#include "dlra/problems/synthetic.hpp"

using dlra::DenseMatrix;
using dlra::DenseVector;
using dlra::Index;
using Cplx = std::complex<double>;
using Mat = DenseMatrix<double>;
using CMat = DenseMatrix<Cplx>;

namespace {

// dense application of the Schroedinger right-hand side, assembled directly
// from the difference matrix and the potential
CMat dense_schrodinger_apply(Index n, const CMat& y) {
  Mat d = Mat::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    d(i, i) = 2.0;
    if (i > 0) d(i, i - 1) = -1.0;
    if (i < n - 1) d(i, i + 1) = -1.0;
  }
  d(0, n - 1) += 1.0;
  d(n - 1, 0) += 1.0;
  Eigen::VectorXd vc(n);
  for (Index i = 0; i < n; ++i)
    vc(i) = 1.0 - std::cos(2.0 * M_PI * (i - n / 2.0) / n);
  CMat h = -0.5 * (d.cast<Cplx>() * y + y * d.transpose().cast<Cplx>()) +
           vc.cast<Cplx>().asDiagonal() * y * vc.cast<Cplx>().asDiagonal();
  return Cplx(0.0, -1.0) * h;
}

}  // namespace

TEST(Schrodinger, MatchesDenseAssemblyOracle) {
  const Index n = 4;
  dlra::SchrodingerProblem problem(n);
  CMat id = CMat::Identity(n, n);
  EXPECT_LE((problem.rhs().eval_full(0.0, id) - dense_schrodinger_apply(n, id))
                .norm(),
            1e-13);
  dlra::GaussianSampler rng(3);
  CMat y = rng.matrix<Cplx>(n, n);
  EXPECT_LE(
      (problem.rhs().eval_full(0.0, y) - dense_schrodinger_apply(n, y)).norm(),
      1e-13 * y.norm());
}

TEST(Schrodinger, NormCompatibleField) {
  const Index n = 16;
  dlra::SchrodingerProblem problem(n);
  dlra::GaussianSampler rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    CMat y = rng.matrix<Cplx>(n, n);
    CMat f = problem.rhs().eval_full(0.0, y);
    const double re = std::real((y.adjoint() * f).trace());
    EXPECT_LE(std::abs(re), 1e-10 * y.norm() * y.norm());
  }
}

TEST(Schrodinger, DifferenceMatrixStructure) {
  const Index n = 100;
  auto d = dlra::schrodinger_detail::difference_matrix(n);
  EXPECT_EQ(d.nonZeros(), 3 * n);
  CMat dd = CMat(d);
  EXPECT_EQ((dd - dd.transpose()).norm(), 0.0);
}

TEST(Schrodinger, OddGridRejected) {
  EXPECT_THROW(dlra::SchrodingerProblem(7), dlra::InvalidInput);
}

TEST(Schrodinger, InitialDataSingularValues) {
  const Index n = 12;
  dlra::SchrodingerProblem problem(n);
  auto full = problem.initial_full(9);
  for (Index i = 0; i < n; ++i)
    EXPECT_DOUBLE_EQ(std::real(full.S(i, i)), std::pow(10.0, -double(i + 1)));

  auto rank5 = problem.initial_state(5, 9);
  ASSERT_EQ(rank5.rank(), 5);
  for (Index i = 0; i < 5; ++i)
    EXPECT_NEAR(std::real(rank5.S(i, i)), std::pow(10.0, -double(i + 1)),
                1e-15);
  double tail = 0.0;
  for (Index i = 5; i < n; ++i) tail += std::pow(10.0, -2.0 * (i + 1));
  EXPECT_NEAR((full.dense() - rank5.dense()).norm(), std::sqrt(tail),
              1e-12 * std::sqrt(tail));

  auto again = problem.initial_state(5, 9);
  EXPECT_EQ((rank5.dense() - again.dense()).norm(), 0.0);
}

TEST(Schrodinger, AdaptiveSolverSelfConsistency) {
  const Index n = 16;
  dlra::SchrodingerProblem problem(n);
  CMat a0 = problem.initial_dense(21);
  auto f = [&](double t, const CMat& y) { return problem.rhs().eval_full(t, y); };
  CMat ref = dlra::integrate(f, a0, 0.0, 1.0,
                             dlra::SolverConfig::adaptive(1e-10, 1e-10));
  CMat finer = dlra::integrate(f, a0, 0.0, 1.0,
                               dlra::SolverConfig::adaptive(5e-11, 5e-11));
  EXPECT_LE((ref - finer).norm(), 1e-8 * finer.norm());
}

TEST(PnMatrices, DegreeOneClosedForm) {
  auto pn = dlra::pn_flux_matrices(1);
  const double coupling = 1.0 / std::sqrt(3.0);
  ASSERT_EQ(pn.ax.rows(), 4);
  Mat expected_x = Mat::Zero(4, 4);
  expected_x(0, dlra::sh_index(1, 1)) = coupling;
  expected_x(dlra::sh_index(1, 1), 0) = coupling;
  Mat expected_y = Mat::Zero(4, 4);
  expected_y(0, dlra::sh_index(1, -1)) = coupling;
  expected_y(dlra::sh_index(1, -1), 0) = coupling;
  EXPECT_LE((pn.ax - expected_x).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((pn.ay - expected_y).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(PnMatrices, SymmetricAndBounded) {
  for (int degree : {2, 5, 9, 13}) {
    auto pn = dlra::pn_flux_matrices(degree);
    EXPECT_EQ((pn.ax - pn.ax.transpose()).norm(), 0.0);
    EXPECT_EQ((pn.ay - pn.ay.transpose()).norm(), 0.0);
    Eigen::SelfAdjointEigenSolver<Mat> eig(pn.ax);
    EXPECT_LE(eig.eigenvalues().cwiseAbs().maxCoeff(), 1.0 + 1e-12);
    // |A| reproduces A on its positive part: |A| - A is PSD
    Eigen::SelfAdjointEigenSolver<Mat> diff(Mat(pn.abs_ax - pn.ax));
    EXPECT_GE(diff.eigenvalues().minCoeff(), -1e-12);
  }
}

TEST(PnMatrices, BasisOrthonormalUnderQuadrature) {
  const int degree = 4;
  const int count = (degree + 1) * (degree + 1);
  auto rule = dlra::gauss_legendre(degree + 3);
  const int n_phi = 4 * degree + 8;
  Mat gram = Mat::Zero(count, count);
  for (int i = 0; i < rule.nodes.size(); ++i) {
    for (int j = 0; j < n_phi; ++j) {
      const double phi = 2.0 * M_PI * (j + 0.5) / n_phi;
      Eigen::VectorXd b = dlra::sh_basis(degree, rule.nodes(i), phi);
      gram += (rule.weights(i) * 2.0 * M_PI / n_phi) * (b * b.transpose());
    }
  }
  EXPECT_LE((gram - Mat::Identity(count, count)).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Lattice, MaterialLayoutCounts) {
  const Index n = 14;
  dlra::LatticeProblem lattice(n, 1);
  const Index per_block = (n / 7) * (n / 7);
  Index absorber_cells = 0, source_cells = 0;
  for (Index c = 0; c < lattice.space_size(); ++c) {
    if (lattice.sigma_a()(c) == 10.0 && lattice.source()(c) == 0.0)
      ++absorber_cells;
    if (lattice.source()(c) == 1.0) ++source_cells;
  }
  EXPECT_EQ(absorber_cells, 12 * per_block);
  EXPECT_EQ(source_cells, per_block);
  // total cross section splits into scattering and absorption everywhere
  EXPECT_EQ((lattice.sigma_t() - lattice.sigma_s() - lattice.sigma_a()).norm(),
            0.0);
}

TEST(Lattice, StructuredMatchesDenseComposition) {
  dlra::LatticeProblem lattice(14, 3);
  const auto& rhs = lattice.rhs();
  dlra::GaussianSampler rng(7);
  const Index r = 4;
  Mat u = dlra::orth<double>(rng.matrix<double>(lattice.space_size(), r));
  Mat v = dlra::orth<double>(rng.matrix<double>(lattice.moment_count(), r));
  Mat s = rng.matrix<double>(r, r);
  Mat full = rhs.eval_full(0.0, Mat(u * s * v.adjoint()));
  Mat s_expected = u.adjoint() * full * v;
  EXPECT_LE((rhs.eval_S(0.0, s, u, v) - s_expected).norm(),
            1e-12 * (1.0 + full.norm()));
  Mat k_expected = full * v;
  EXPECT_LE((rhs.eval_K(0.0, Mat(u * s), v) - k_expected).norm(),
            1e-12 * (1.0 + full.norm()));
}

TEST(Lattice, PureStreamingDissipates) {
  std::vector<dlra::BlockOverride> overrides;
  for (int i = 0; i < 7; ++i)
    for (int j = 0; j < 7; ++j)
      overrides.push_back({i, j, 0.0, 0.0, 0.0});
  dlra::LatticeProblem lattice(14, 1, overrides);
  const Index m = lattice.space_size();
  const Index nx = lattice.cells_per_dim();

  Mat y = Mat::Zero(m, lattice.moment_count());
  for (Index iy = 0; iy < nx; ++iy) {
    for (Index ix = 0; ix < nx; ++ix) {
      const double x = (ix + 0.5) * lattice.dx();
      const double yy = (iy + 0.5) * lattice.dx();
      y(ix + nx * iy, 0) =
          std::exp(-4.0 * ((x - 3.5) * (x - 3.5) + (yy - 3.5) * (yy - 3.5)));
    }
  }
  auto f = [&](double t, const Mat& z) { return lattice.rhs().eval_full(t, z); };
  const double h = 0.5 * lattice.dx();
  double prev = y.norm();
  for (int k = 0; k < 8; ++k) {
    y = dlra::integrate(f, y, k * h, (k + 1) * h,
                        dlra::SolverConfig::heun_steps(1));
    EXPECT_LE(y.norm(), prev * (1.0 + 1e-10)) << "step " << k;
    prev = y.norm();
  }
}

TEST(Lattice, ScalarFluxOfIsotropicState) {
  dlra::LatticeProblem lattice(14, 3);
  const double c = 0.7;  // f(x, Omega) = c
  Mat y = Mat::Zero(lattice.space_size(), lattice.moment_count());
  y.col(0).setConstant(c * std::sqrt(4.0 * M_PI));
  Mat flux = lattice.scalar_flux(y);
  EXPECT_NEAR(flux.minCoeff(), 4.0 * M_PI * c, 1e-10);
  EXPECT_NEAR(flux.maxCoeff(), 4.0 * M_PI * c, 1e-10);

  Mat zero_flux = lattice.scalar_flux(Mat(Mat::Zero(y.rows(), y.cols())));
  EXPECT_EQ(zero_flux.norm(), 0.0);
}

TEST(Lattice, ScalarFluxMatchesAngularQuadrature) {
  dlra::LatticeProblem lattice(7, 3);
  dlra::GaussianSampler rng(11);
  Mat y = Mat::Zero(lattice.space_size(), lattice.moment_count());
  const Index probe_cell = 10;
  for (Index k = 0; k < lattice.moment_count(); ++k)
    y(probe_cell, k) = rng.normal();

  // reconstruct f at quadrature nodes and integrate directly
  auto rule = dlra::gauss_legendre(8);
  const int n_phi = 24;
  double integral = 0.0;
  for (int i = 0; i < rule.nodes.size(); ++i) {
    for (int j = 0; j < n_phi; ++j) {
      const double phi = 2.0 * M_PI * (j + 0.5) / n_phi;
      Eigen::VectorXd basis = dlra::sh_basis(3, rule.nodes(i), phi);
      integral += rule.weights(i) * (2.0 * M_PI / n_phi) *
                  basis.dot(y.row(probe_cell));
    }
  }
  Mat flux = lattice.scalar_flux(y);
  const Index nx = lattice.cells_per_dim();
  EXPECT_NEAR(flux(probe_cell % nx, probe_cell / nx), integral, 1e-8);
}

TEST(Lattice, InitialStateIsIsotropicBackground) {
  dlra::LatticeProblem lattice(14, 3);
  auto y = lattice.initial_state(5);
  EXPECT_NO_THROW(dlra::validate(y));
  Mat dense = y.dense();
  // zeroth moment sqrt(4 pi) * 1e-9, all other moments zero
  EXPECT_NEAR(dense.col(0).maxCoeff(), std::sqrt(4.0 * M_PI) * 1e-9, 1e-22);
  EXPECT_LE(dense.rightCols(dense.cols() - 1).cwiseAbs().maxCoeff(), 1e-22);
  Mat flux = lattice.scalar_flux(y);
  EXPECT_NEAR(flux(0, 0), 4.0 * M_PI * 1e-9, 1e-18);
}

TEST(Lattice, RejectsMisalignedGrid) {
  EXPECT_THROW(dlra::LatticeProblem(15, 3), dlra::InvalidInput);
}

TEST(Lattice, OverridesLoadFromFile) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "dlra_lattice_overrides";
  fs::create_directories(dir);
  {
    std::ofstream out(dir / "mats.txt");
    out << "# row col sigma_s sigma_a q\n";
    out << "0 0 0.5 2.0 0.0\n";
    out << "3 3 0.0 10.0 4.0\n";
  }
  auto overrides = dlra::load_block_overrides((dir / "mats.txt").string());
  ASSERT_EQ(overrides.size(), 2u);
  dlra::LatticeProblem lattice(7, 1, overrides);
  EXPECT_EQ(lattice.sigma_s()(0), 0.5);
  EXPECT_EQ(lattice.sigma_a()(0), 2.0);
  // center block source rescaled by the override
  const Index center = 3 + 7 * 3;
  EXPECT_EQ(lattice.source()(center), 4.0);
  fs::remove_all(dir);
}

TEST(Synthetic, ScalarExponentialNormDecay) {
  auto problem = dlra::make_synthetic(dlra::SyntheticKind::scalar_exponential,
                                      10, 8, 3, 13, -1.0);
  Mat y1 = problem.closed_form(1.0);
  EXPECT_NEAR(y1.norm(), std::exp(-1.0) * problem.initial.dense().norm(),
              1e-12);
}

TEST(Synthetic, SkewFlowKeepsNormExactly) {
  auto problem =
      dlra::make_synthetic(dlra::SyntheticKind::skew, 9, 9, 3, 17);
  EXPECT_TRUE(problem.norm_preserving);
  const double n0 = problem.initial.dense().norm();
  for (double t : {0.3, 1.0, 2.5})
    EXPECT_NEAR(problem.closed_form(t).norm(), n0, 1e-12 * n0);
  // right-hand side satisfies the norm-compatibility condition
  dlra::GaussianSampler rng(19);
  Mat z = rng.matrix<double>(9, 9);
  Mat f = problem.rhs->eval_full(0.0, z);
  EXPECT_LE(std::abs((z.adjoint() * f).trace()), 1e-12 * z.norm() * f.norm());
}

TEST(Synthetic, TwoSidedClosedFormMatchesDenseSolve) {
  auto problem =
      dlra::make_synthetic(dlra::SyntheticKind::two_sided, 7, 6, 3, 23);
  auto f = [&](double t, const Mat& y) {
    return problem.rhs->eval_full(t, y);
  };
  Mat solved = dlra::integrate(f, problem.initial.dense(), 0.0, 1.0,
                               dlra::SolverConfig::adaptive(1e-11, 1e-11));
  Mat exact = problem.closed_form(1.0);
  EXPECT_LE((solved - exact).norm(), 1e-8 * exact.norm());
}

// eta = ||U~^H F(Y0) V~|| is a sub-block of the normal component, so it is
// bounded by it and shrinks as the rank grows.
TEST(Schrodinger, RejectionEstimateShrinksWithRank) {
  const dlra::Index n = 32;
  dlra::SchrodingerProblem problem(n);
  std::vector<double> etas;
  for (dlra::Index rank : {5, 10, 15}) {
    auto y0 = problem.initial_state(rank, 11);
    dlra::StepOptions opts;
    opts.solver = dlra::SolverConfig::rk4_steps(2);
    opts.policy = dlra::TruncationPolicy::fixed(rank);
    opts.estimate_rejection = true;
    auto res = dlra::step(dlra::IntegratorVariant::parallel1, y0,
                          problem.rhs(), 1e-2, opts);
    ASSERT_TRUE(std::isfinite(res.eta));
    const CMat grad = problem.rhs().eval_full(0.0, y0.dense());
    EXPECT_LE(res.eta,
              dlra::normal_component_norm(y0, grad) * (1.0 + 1e-12));
    etas.push_back(res.eta);
  }
  EXPECT_GT(etas[0], etas[1]);
  EXPECT_GT(etas[1], etas[2]);
}

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <vector>

#include "dlra/core/common.hpp"

namespace dlra {

struct GaussLegendre {
  Eigen::VectorXd nodes;    // on [-1, 1]
  Eigen::VectorXd weights;
};

/// Gauss-Legendre rule by Newton iteration on the Legendre polynomial.
inline GaussLegendre gauss_legendre(int n) {
  DLRA_REQUIRE(n >= 1, "gauss_legendre: need n >= 1");
  GaussLegendre rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      // evaluate P_n and P_n' by the three-term recurrence
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes(i) = -x;
    rule.nodes(n - 1 - i) = x;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.weights(i) = w;
    rule.weights(n - 1 - i) = w;
  }
  return rule;
}

/// Flat index of the real spherical harmonic of degree l and order m,
/// k = l^2 + l + m with m = -l..l.
inline int sh_index(int l, int m) { return l * l + l + m; }

/// Values of the real orthonormal spherical harmonics up to `degree` at
/// direction (mu = cos(theta), phi): unit L2 norm over the sphere.
inline Eigen::VectorXd sh_basis(int degree, double mu, double phi) {
  const int count = (degree + 1) * (degree + 1);
  Eigen::VectorXd out(count);
  const double s = std::sqrt(std::max(0.0, 1.0 - mu * mu));  // sin(theta)

  // fully normalized associated Legendre values by stable recurrence
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(degree + 1, degree + 1);
  p(0, 0) = std::sqrt(1.0 / (4.0 * M_PI));
  for (int m = 1; m <= degree; ++m)
    p(m, m) = p(m - 1, m - 1) * s * std::sqrt((2.0 * m + 1.0) / (2.0 * m));
  for (int m = 0; m < degree; ++m)
    p(m + 1, m) = std::sqrt(2.0 * m + 3.0) * mu * p(m, m);
  for (int m = 0; m <= degree; ++m) {
    for (int l = m + 2; l <= degree; ++l) {
      const double a =
          std::sqrt((4.0 * l * l - 1.0) / (static_cast<double>(l) * l - m * m));
      const double b = std::sqrt(
          ((l - 1.0) * (l - 1.0) - m * m) / (4.0 * (l - 1.0) * (l - 1.0) - 1.0));
      p(l, m) = a * (mu * p(l - 1, m) - b * p(l - 2, m));
    }
  }

  for (int l = 0; l <= degree; ++l) {
    out(sh_index(l, 0)) = p(l, 0);
    for (int m = 1; m <= l; ++m) {
      const double plm = M_SQRT2 * p(l, m);
      out(sh_index(l, m)) = plm * std::cos(m * phi);
      out(sh_index(l, -m)) = plm * std::sin(m * phi);
    }
  }
  return out;
}

/// Directional coupling matrices of the spherical-harmonics moment system.
struct PnMatrices {
  Eigen::MatrixXd ax, ay;          // A[k,l] = int Omega_{x|y} m_k m_l dOmega
  Eigen::MatrixXd abs_ax, abs_ay;  // |A| via symmetric eigendecomposition
  Eigen::VectorXd g;               // scattering kernel diagonal: 0, -1, ...
};

namespace detail {

// Product quadrature (Gauss-Legendre in mu, midpoint in phi) assembly of the
// first-moment coupling matrices. Exact for the polynomial integrands up to
// `degree` when n_mu >= degree+2 and n_phi >= 2*degree+3.
inline std::pair<Eigen::MatrixXd, Eigen::MatrixXd> assemble_flux_matrices(
    int degree, int n_mu, int n_phi) {
  const int count = (degree + 1) * (degree + 1);
  const GaussLegendre mu_rule = gauss_legendre(n_mu);
  const double phi_weight = 2.0 * M_PI / n_phi;

  Eigen::MatrixXd ax = Eigen::MatrixXd::Zero(count, count);
  Eigen::MatrixXd ay = Eigen::MatrixXd::Zero(count, count);
  for (int i = 0; i < n_mu; ++i) {
    const double mu = mu_rule.nodes(i);
    const double s = std::sqrt(std::max(0.0, 1.0 - mu * mu));
    for (int j = 0; j < n_phi; ++j) {
      const double phi = 2.0 * M_PI * (j + 0.5) / n_phi;
      const Eigen::VectorXd basis = sh_basis(degree, mu, phi);
      const double w = mu_rule.weights(i) * phi_weight;
      ax.noalias() += (w * s * std::cos(phi)) * (basis * basis.transpose());
      ay.noalias() += (w * s * std::sin(phi)) * (basis * basis.transpose());
    }
  }
  return {ax, ay};
}

inline Eigen::MatrixXd symmetric_abs(const Eigen::MatrixXd& a) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  return eig.eigenvectors() *
         eig.eigenvalues().cwiseAbs().asDiagonal() *
         eig.eigenvectors().transpose();
}

}  // namespace detail

/// Flux and scattering matrices for the moment system up to `degree`.
/// Construction is cross-checked against a refined quadrature; disagreement
/// beyond 1e-8 aborts.
inline PnMatrices pn_flux_matrices(int degree) {
  DLRA_REQUIRE(degree >= 1, "pn_flux_matrices: degree must be >= 1");
  const int n_mu = degree + 2;
  const int n_phi = 2 * degree + 4;
  auto [ax, ay] = detail::assemble_flux_matrices(degree, n_mu, n_phi);
  auto [ax_fine, ay_fine] =
      detail::assemble_flux_matrices(degree, 2 * n_mu, 2 * n_phi);
  DLRA_CHECK_NUMERIC((ax - ax_fine).cwiseAbs().maxCoeff() <= 1e-8 &&
                         (ay - ay_fine).cwiseAbs().maxCoeff() <= 1e-8,
                     "pn_flux_matrices: quadrature verification failed");

  PnMatrices pn;
  pn.ax = 0.5 * (ax + ax.transpose());  // integrand is symmetric in (k, l)
  pn.ay = 0.5 * (ay + ay.transpose());
  pn.abs_ax = detail::symmetric_abs(pn.ax);
  pn.abs_ay = detail::symmetric_abs(pn.ay);
  const int count = (degree + 1) * (degree + 1);
  pn.g = Eigen::VectorXd::Constant(count, -1.0);
  pn.g(0) = 0.0;  // isotropic scattering feeds only the zeroth moment
  return pn;
}

}  // namespace dlra

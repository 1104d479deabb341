#pragma once

#include <Eigen/Dense>
#include <cmath>

// Shared helpers for the unit suites: tolerant comparisons and the
// independent quadrature/brute-force oracles the module tests check against.

namespace testsup {

inline double rel_err(double a, double b, double floor = 1e-12) {
  const double denom = std::max({std::abs(a), std::abs(b), floor});
  return std::abs(a - b) / denom;
}

// Gradient comparator: analytic vs finite difference. Central differences
// carry ~|f| eps / step of roundoff, so differences below abs_tol are noise
// regardless of the relative error (e.g. gradients that are exactly zero).
inline bool grad_close(double analytic, double fd, double rel_tol,
                       double abs_tol = 1e-7) {
  if (std::abs(analytic - fd) <= abs_tol) return true;
  return rel_err(analytic, fd) < rel_tol;
}

// Independent oracle: 2x2 Gauss integration of B^T D B for the bilinear
// plane-stress quad (unit thickness), nodes CCW from lower-left.
inline Eigen::Matrix<double, 8, 8> ke_quadrature(double E, double nu,
                                                 double h) {
  Eigen::Matrix<double, 8, 8> ke = Eigen::Matrix<double, 8, 8>::Zero();
  Eigen::Matrix3d D;
  D << 1.0, nu, 0.0, nu, 1.0, 0.0, 0.0, 0.0, (1.0 - nu) / 2.0;
  D *= E / (1.0 - nu * nu);
  const double g = 1.0 / std::sqrt(3.0);
  const double pts[2] = {-g, g};
  for (double xi : pts) {
    for (double eta : pts) {
      // dN/dxi, dN/deta for N1..N4 (bl, br, tr, tl)
      const double dxi[4] = {-(1 - eta) / 4, (1 - eta) / 4, (1 + eta) / 4,
                             -(1 + eta) / 4};
      const double deta[4] = {-(1 - xi) / 4, -(1 + xi) / 4, (1 + xi) / 4,
                              (1 - xi) / 4};
      Eigen::Matrix<double, 3, 8> B = Eigen::Matrix<double, 3, 8>::Zero();
      for (int a = 0; a < 4; ++a) {
        const double dNdx = dxi[a] * 2.0 / h;
        const double dNdy = deta[a] * 2.0 / h;
        B(0, 2 * a) = dNdx;
        B(1, 2 * a + 1) = dNdy;
        B(2, 2 * a) = dNdy;
        B(2, 2 * a + 1) = dNdx;
      }
      ke += B.transpose() * D * B * (h * h / 4.0);  // detJ = h^2/4, w = 1
    }
  }
  return ke;
}

}  // namespace testsup

#pragma once

#include <Eigen/Dense>
#include <array>
#include <string>
#include <vector>

#include "core/common.hpp"

namespace fourtop::mat {

// Modulus assigned to void / fully removed material.
inline constexpr double kVoidModulus = 1e-9;

struct Material {
  std::string label;
  double young = 1.0;              // E
  double density = 1.0;            // physical density lambda
  std::array<unsigned char, 3> color{0, 0, 0};
};

// Ordered candidate set; entry 0 is always void.
struct MaterialCatalog {
  std::vector<Material> entries;

  // Prepends the void phase and assigns default display colors
  // (gray/black/red/blue, then a rotating fallback palette).
  static MaterialCatalog with_void(std::vector<Material> solids);

  int size() const { return static_cast<int>(entries.size()); }
  int solid_count() const { return size() - 1; }
  double max_density() const;
  void validate() const;
};

// E_e = Emin + rho_e^p (E0 - Emin)
Eigen::VectorXd simp_modulus(const Eigen::VectorXd& rho, double p, double E0,
                             double Emin = kVoidModulus);

// E_e = sum_i (rho_e^(i))^p E^(i); rows must satisfy the partition of unity.
Eigen::VectorXd mm_modulus(const Eigen::MatrixXd& rho_rows, double p,
                           const MaterialCatalog& catalog);

// m = sum_e sum_i lambda^(i) rho_e^(i) v_e
double mass(const Eigen::MatrixXd& rho_rows, const MaterialCatalog& catalog,
            double v_e);

// m normalized by filling the whole domain with the heaviest candidate.
double mass_fraction(const Eigen::MatrixXd& rho_rows,
                     const MaterialCatalog& catalog, double v_e,
                     double V_domain);

double volume_fraction(const Eigen::VectorXd& rho, double v_e,
                       double V_domain);

}  // namespace fourtop::mat

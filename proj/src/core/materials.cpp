#include "core/materials.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace fourtop::mat {

MaterialCatalog MaterialCatalog::with_void(std::vector<Material> solids) {
  MaterialCatalog cat;
  cat.entries.push_back(
      Material{"void", kVoidModulus, kVoidModulus, {128, 128, 128}});
  static const std::array<std::array<unsigned char, 3>, 6> palette = {{
      {0, 0, 0},      // black
      {220, 30, 30},  // red
      {40, 70, 220},  // blue
      {30, 160, 60},
      {230, 160, 20},
      {150, 40, 170},
  }};
  for (std::size_t i = 0; i < solids.size(); ++i) {
    Material m = solids[i];
    if (m.color == std::array<unsigned char, 3>{0, 0, 0} && i > 0)
      m.color = palette[i % palette.size()];
    cat.entries.push_back(std::move(m));
  }
  cat.validate();
  return cat;
}

double MaterialCatalog::max_density() const {
  double mx = 0.0;
  for (const auto& m : entries) mx = std::max(mx, m.density);
  return mx;
}

void MaterialCatalog::validate() const {
  if (entries.empty())
    throw std::invalid_argument("material catalog is empty");
  std::set<std::string> labels;
  for (const auto& m : entries) {
    if (!(m.young > 0.0) || !(m.density > 0.0))
      throw std::invalid_argument("material '" + m.label +
                                  "': E and density must be positive");
    if (!labels.insert(m.label).second)
      throw std::invalid_argument("duplicate material label '" + m.label +
                                  "'");
  }
}

Eigen::VectorXd simp_modulus(const Eigen::VectorXd& rho, double p, double E0,
                             double Emin) {
  return Emin + rho.array().pow(p) * (E0 - Emin);
}

Eigen::VectorXd mm_modulus(const Eigen::MatrixXd& rho_rows, double p,
                           const MaterialCatalog& catalog) {
  if (rho_rows.cols() != catalog.size())
    throw std::invalid_argument(
        "mm_modulus: density columns must match catalog size");
  const Eigen::VectorXd row_sums = rho_rows.rowwise().sum();
  if (((row_sums.array() - 1.0).abs() > 1e-4).any())
    throw std::invalid_argument(
        "mm_modulus: density rows violate the partition of unity");

  Eigen::VectorXd young = Eigen::VectorXd::Zero(rho_rows.rows());
  for (int i = 0; i < catalog.size(); ++i)
    young.array() +=
        rho_rows.col(i).array().pow(p) * catalog.entries[i].young;
  return young;
}

double mass(const Eigen::MatrixXd& rho_rows, const MaterialCatalog& catalog,
            double v_e) {
  if (rho_rows.cols() != catalog.size())
    throw std::invalid_argument(
        "mass: density columns must match catalog size");
  double m = 0.0;
  for (int i = 0; i < catalog.size(); ++i)
    m += catalog.entries[i].density * rho_rows.col(i).sum() * v_e;
  return m;
}

double mass_fraction(const Eigen::MatrixXd& rho_rows,
                     const MaterialCatalog& catalog, double v_e,
                     double V_domain) {
  return mass(rho_rows, catalog, v_e) / (V_domain * catalog.max_density());
}

double volume_fraction(const Eigen::VectorXd& rho, double v_e,
                       double V_domain) {
  return rho.sum() * v_e / V_domain;
}

}  // namespace fourtop::mat

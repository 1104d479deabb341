#pragma once

#include <Eigen/Dense>
#include <vector>

#include "core/optimizer.hpp"
#include "core/problems.hpp"

namespace fourtop::simp {

// Normalized linear-hat density filter: w_ej ~ max(0, r_min - dist(e, j)),
// rows summing to 1. Radius is measured in element units.
struct FilterKernel {
  double radius = 1.4;
  std::vector<int> offsets;  // size n_e + 1
  std::vector<int> cols;
  std::vector<double> weights;

  static FilterKernel build(const fea::GridMesh& mesh, double r_min);

  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;            // W x
  Eigen::VectorXd apply_transpose(const Eigen::VectorXd& x) const;  // W^T x
};

Eigen::VectorXd density_filter(const Eigen::VectorXd& rho,
                               const FilterKernel& kernel);

// Multiplicative optimality-criteria update with a move limit and bisection
// on the Lagrange multiplier until the (filtered) volume meets the target to
// 1e-4 relative. Densities are clamped to [1e-3, 1]; optional per-element
// bounds realize passive regions.
Eigen::VectorXd oc_update(const Eigen::VectorXd& rho,
                          const Eigen::VectorXd& sensitivities,
                          double v_star, double move_limit,
                          const FilterKernel& kernel,
                          const fea::GridMesh& mesh,
                          const Eigen::VectorXd* lower_bound = nullptr,
                          const Eigen::VectorXd* upper_bound = nullptr);

struct SimpResult {
  opt::RunStatus status = opt::RunStatus::kMaxEpochs;
  Eigen::VectorXd rho_phys;  // filtered densities
  std::vector<opt::HistoryRow> history;
  double J0 = 0.0;
};

// Classic filtered SIMP with OC updates on the shared grid FEA. Stops when
// the max design change drops below 0.01 or at max_iters.
SimpResult run_simp(const prob::Problem& problem, double v_star, double p,
                    double r_min, int max_iters);

}  // namespace fourtop::simp

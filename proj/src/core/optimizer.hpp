#pragma once

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

#include "core/fourier_net.hpp"
#include "core/grid.hpp"
#include "core/materials.hpp"

namespace fourtop::prob {
struct Problem;
}

namespace fourtop::opt {

struct OptConfig {
  double v_star = 0.5;   // target volume fraction (single material)
  double m_star = 0.0;   // target mass fraction; > 0 selects the mass constraint
  double alpha0 = 0.2;
  double d_alpha = 0.2;
  double alpha_max = 100.0;
  double p0 = 1.0;
  double d_p = 0.02;
  double p_max = 8.0;
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;
  double eps_g_star = 0.0025;
  int min_epochs = 150;
  int max_epochs = 500;
  std::uint64_t seed = 0;

  void validate() const;
};

struct AdamState {
  Eigen::VectorXd m, v;
  long t = 0;

  static AdamState zeros(Eigen::Index n);
};

// Standard bias-corrected Adam update, in place.
void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad,
               AdamState& state, double lr, double beta1, double beta2,
               double eps);

// Normalizing compliance from a uniform-gray FEA solve: J0 = V*^p0 sum_e J_e.
double compute_J0(fea::GridSolver& solver, double v_star, double p0);

// Multi-material variant: uniform rows at 1/(S+1) per phase.
double compute_J0_mm(fea::GridSolver& solver,
                     const mat::MaterialCatalog& catalog, double p0);

struct VolumeConstraint {
  double v_star;
  double v_e;
  double V_domain;
};

struct MassConstraint {
  double m_star;
  double v_e;
  double V_domain;
  const mat::MaterialCatalog* catalog = nullptr;
};

double loss(const Eigen::VectorXd& rho, const Eigen::VectorXd& element_compliance,
            double p, double alpha, double J0, const VolumeConstraint& c);

Eigen::VectorXd loss_grad_wrt_density(const Eigen::VectorXd& rho,
                                      const Eigen::VectorXd& element_compliance,
                                      double p, double alpha, double J0,
                                      const VolumeConstraint& c);

double loss_mm(const Eigen::MatrixXd& rho_rows,
               const Eigen::VectorXd& element_compliance, double p,
               double alpha, double J0, const MassConstraint& c);

Eigen::MatrixXd loss_grad_wrt_density_mm(
    const Eigen::MatrixXd& rho_rows, const Eigen::VectorXd& element_compliance,
    double p, double alpha, double J0, const MassConstraint& c);

// Fraction of entries strictly inside (0.05, 0.95).
double gray_fraction(const Eigen::VectorXd& rho);

// Multi-material: 1 - rho_void is the solid indicator.
double gray_fraction_mm(const Eigen::MatrixXd& rho_rows);

enum class RunStatus { kConverged, kMaxEpochs, kError };

struct HistoryRow {
  int epoch = 0;
  double loss = 0.0;
  double compliance = 0.0;
  double vol_or_mass_fraction = 0.0;
  double gray_fraction = 0.0;
  double alpha = 0.0;
  double p = 0.0;
};

struct RunResult {
  RunStatus status = RunStatus::kMaxEpochs;
  std::string message;
  Eigen::MatrixXd densities;  // final eval-mode field at element centers, n_e x n_o
  std::vector<HistoryRow> history;
  double J0 = 0.0;
};

// One optimization run per the training loop: forward at element centers,
// passive overrides, FEA, penalty loss, backprop through the density field,
// Adam update, then the alpha / p continuation step. Terminates when the
// gray fraction drops below eps_g_star (after min_epochs) or at max_epochs.
// A solver failure ends the run with the history preserved.
RunResult run(const prob::Problem& problem, net::Network& network,
              const net::FrequencyBank* bank,
              const mat::MaterialCatalog* catalog, const OptConfig& cfg);

// Sample-point preprocessor shared by the optimizer and the extractor:
// optional extrusion (a zeroed coordinate) followed by the Fourier
// projection, or raw pass-through for coordinate nets.
struct InputMap {
  const net::FrequencyBank* bank = nullptr;
  int zero_axis = -1;

  Eigen::MatrixXd operator()(Eigen::MatrixXd points) const;
};

}  // namespace fourtop::opt

#include "core/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "core/problems.hpp"

namespace fourtop::opt {

void OptConfig::validate() const {
  if (m_star <= 0.0 && !(v_star > 0.0 && v_star <= 1.0))
    throw std::invalid_argument("opt: v_star must lie in (0, 1]");
  if (m_star > 0.0 && !(m_star <= 1.0))
    throw std::invalid_argument("opt: m_star must lie in (0, 1]");
  if (!(alpha0 > 0.0))
    throw std::invalid_argument("opt: alpha0 must be positive");
  if (!(p0 >= 1.0 && p_max >= p0))
    throw std::invalid_argument("opt: require 1 <= p0 <= p_max");
  if (!(lr > 0.0)) throw std::invalid_argument("opt: lr must be positive");
  if (!(eps_g_star > 0.0 && eps_g_star < 1.0))
    throw std::invalid_argument("opt: eps_g_star must lie in (0, 1)");
  if (min_epochs > max_epochs)
    throw std::invalid_argument("opt: min_epochs must not exceed max_epochs");
}

AdamState AdamState::zeros(Eigen::Index n) {
  AdamState s;
  s.m = Eigen::VectorXd::Zero(n);
  s.v = Eigen::VectorXd::Zero(n);
  return s;
}

void adam_step(Eigen::VectorXd& params, const Eigen::VectorXd& grad,
               AdamState& state, double lr, double beta1, double beta2,
               double eps) {
  if (grad.size() != params.size() || state.m.size() != params.size())
    throw std::invalid_argument("adam_step: shape mismatch");
  if (!grad.allFinite())
    throw NumericError("adam_step: non-finite gradient");

  state.t += 1;
  state.m = beta1 * state.m + (1.0 - beta1) * grad;
  state.v = beta2 * state.v + (1.0 - beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(beta1, double(state.t));
  const double c2 = 1.0 - std::pow(beta2, double(state.t));
  params -= (lr * (state.m / c1).array() /
             ((state.v / c2).array().sqrt() + eps))
                .matrix();
}

double compute_J0(fea::GridSolver& solver, double v_star, double p0) {
  const Eigen::Index ne = solver.mesh().element_count();
  const Eigen::VectorXd rho = Eigen::VectorXd::Constant(ne, v_star);
  const Eigen::VectorXd young = mat::simp_modulus(rho, p0, 1.0);
  const fea::SolveResult res = solver.solve(young);
  const double J0 = std::pow(v_star, p0) * res.element_compliance.sum();
  if (!(J0 > 0.0))
    throw std::invalid_argument(
        "compute_J0: zero reference compliance; the problem has no effective "
        "load");
  return J0;
}

double compute_J0_mm(fea::GridSolver& solver,
                     const mat::MaterialCatalog& catalog, double p0) {
  const Eigen::Index ne = solver.mesh().element_count();
  const double share = 1.0 / catalog.size();
  const Eigen::MatrixXd rho_rows =
      Eigen::MatrixXd::Constant(ne, catalog.size(), share);
  const Eigen::VectorXd young = mat::mm_modulus(rho_rows, p0, catalog);
  const fea::SolveResult res = solver.solve(young);
  const double J0 = young.dot(res.element_compliance);
  if (!(J0 > 0.0))
    throw std::invalid_argument(
        "compute_J0: zero reference compliance; the problem has no effective "
        "load");
  return J0;
}

double loss(const Eigen::VectorXd& rho,
            const Eigen::VectorXd& element_compliance, double p, double alpha,
            double J0, const VolumeConstraint& c) {
  if (rho.size() != element_compliance.size())
    throw std::invalid_argument("loss: shape mismatch");
  if (!(J0 > 0.0)) throw std::invalid_argument("loss: J0 must be positive");
  const double J = fea::total_compliance(rho, p, element_compliance);
  const double vf = mat::volume_fraction(rho, c.v_e, c.V_domain);
  const double r = vf / c.v_star - 1.0;
  return J / J0 + alpha * r * r;
}

Eigen::VectorXd loss_grad_wrt_density(
    const Eigen::VectorXd& rho, const Eigen::VectorXd& element_compliance,
    double p, double alpha, double J0, const VolumeConstraint& c) {
  if (rho.size() != element_compliance.size())
    throw std::invalid_argument("loss_grad: shape mismatch");
  const double vf = mat::volume_fraction(rho, c.v_e, c.V_domain);
  const double r = vf / c.v_star - 1.0;
  // self-adjoint compliance term plus the quadratic penalty
  Eigen::VectorXd g =
      (-p / J0) *
      (rho.array().pow(p - 1.0) * element_compliance.array()).matrix();
  g.array() += 2.0 * alpha * r * c.v_e / (c.V_domain * c.v_star);
  return g;
}

double loss_mm(const Eigen::MatrixXd& rho_rows,
               const Eigen::VectorXd& element_compliance, double p,
               double alpha, double J0, const MassConstraint& c) {
  if (rho_rows.rows() != element_compliance.size())
    throw std::invalid_argument("loss_mm: shape mismatch");
  if (!(J0 > 0.0)) throw std::invalid_argument("loss_mm: J0 must be positive");
  const Eigen::VectorXd young = mat::mm_modulus(rho_rows, p, *c.catalog);
  const double J = young.dot(element_compliance);
  const double mf =
      mat::mass_fraction(rho_rows, *c.catalog, c.v_e, c.V_domain);
  const double r = mf / c.m_star - 1.0;
  return J / J0 + alpha * r * r;
}

Eigen::MatrixXd loss_grad_wrt_density_mm(
    const Eigen::MatrixXd& rho_rows, const Eigen::VectorXd& element_compliance,
    double p, double alpha, double J0, const MassConstraint& c) {
  const mat::MaterialCatalog& cat = *c.catalog;
  const double mf = mat::mass_fraction(rho_rows, cat, c.v_e, c.V_domain);
  const double r = mf / c.m_star - 1.0;
  const double lam_max = cat.max_density();

  Eigen::MatrixXd g(rho_rows.rows(), rho_rows.cols());
  for (int i = 0; i < cat.size(); ++i) {
    // compliance routed through dE/drho^(i), plus the mass penalty column
    g.col(i) =
        (-p / J0) * cat.entries[i].young *
        (rho_rows.col(i).array().pow(p - 1.0) * element_compliance.array())
            .matrix();
    g.col(i).array() += 2.0 * alpha * r * cat.entries[i].density * c.v_e /
                        (c.V_domain * lam_max * c.m_star);
  }
  return g;
}

double gray_fraction(const Eigen::VectorXd& rho) {
  const Eigen::Index n = rho.size();
  if (n == 0) return 0.0;
  Eigen::Index gray = 0;
  for (Eigen::Index e = 0; e < n; ++e)
    if (rho[e] > 0.05 && rho[e] < 0.95) ++gray;
  return double(gray) / double(n);
}

double gray_fraction_mm(const Eigen::MatrixXd& rho_rows) {
  return gray_fraction((1.0 - rho_rows.col(0).array()).matrix());
}

Eigen::MatrixXd InputMap::operator()(Eigen::MatrixXd points) const {
  if (zero_axis >= 0 && zero_axis < points.cols())
    points.col(zero_axis).setZero();
  if (bank) return net::fourier_project(points, *bank);
  return points;
}

namespace {

// rho forced to 1 on retained elements and to ~0 on void ones; the
// corresponding upstream gradients are cut so the net never sees them.
void apply_passive_single(const fea::GridMesh& mesh, Eigen::VectorXd& rho) {
  for (int e : mesh.passive_solid) rho[e] = 1.0;
  for (int e : mesh.passive_void) rho[e] = 1e-3;
}

void apply_passive_mm(const fea::GridMesh& mesh,
                      const mat::MaterialCatalog& catalog,
                      Eigen::MatrixXd& rho_rows) {
  int strongest = 1;
  for (int i = 2; i < catalog.size(); ++i)
    if (catalog.entries[i].young > catalog.entries[strongest].young)
      strongest = i;
  for (int e : mesh.passive_void) {
    rho_rows.row(e).setZero();
    rho_rows(e, 0) = 1.0;
  }
  for (int e : mesh.passive_solid) {
    rho_rows.row(e).setZero();
    rho_rows(e, strongest) = 1.0;
  }
}

void zero_passive_rows(const fea::GridMesh& mesh, Eigen::MatrixXd& upstream) {
  for (int e : mesh.passive_solid) upstream.row(e).setZero();
  for (int e : mesh.passive_void) upstream.row(e).setZero();
}

}  // namespace

RunResult run(const prob::Problem& problem, net::Network& network,
              const net::FrequencyBank* bank,
              const mat::MaterialCatalog* catalog, const OptConfig& cfg) {
  const fea::GridMesh& mesh = problem.mesh;
  const bool multi = catalog != nullptr;
  if (multi && network.arch().n_o != catalog->size())
    throw std::invalid_argument(
        "run: network outputs must match the material catalog size");
  if (!multi && network.arch().n_o != 1)
    throw std::invalid_argument(
        "run: single-material run needs a single-output network");

  InputMap input_map;
  input_map.bank = bank;
  input_map.zero_axis = problem.extrude == prob::Extrude::kX   ? 0
                        : problem.extrude == prob::Extrude::kY ? 1
                                                               : -1;
  const Eigen::MatrixXd features = input_map(mesh.element_centers);

  fea::GridSolver solver(mesh, problem.nu);
  RunResult result;
  result.J0 = multi ? compute_J0_mm(solver, *catalog, cfg.p0)
                    : compute_J0(solver, cfg.v_star, cfg.p0);

  const VolumeConstraint vc{cfg.v_star, mesh.element_volume(),
                            mesh.domain_volume()};
  const MassConstraint mc{cfg.m_star, mesh.element_volume(),
                          mesh.domain_volume(), catalog};

  AdamState adam = AdamState::zeros(network.params().size());
  double alpha = cfg.alpha0;
  double p = cfg.p0;

  try {
    for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
      Eigen::MatrixXd rho = network.forward(features, net::Mode::kTrain);

      double loss_value, compliance, fraction, eg;
      Eigen::MatrixXd upstream;
      if (multi) {
        apply_passive_mm(mesh, *catalog, rho);
        const Eigen::VectorXd young = mat::mm_modulus(rho, p, *catalog);
        const fea::SolveResult sol = solver.solve(young);
        compliance = young.dot(sol.element_compliance);
        loss_value = loss_mm(rho, sol.element_compliance, p, alpha, result.J0, mc);
        fraction = mat::mass_fraction(rho, *catalog, mc.v_e, mc.V_domain);
        upstream = loss_grad_wrt_density_mm(rho, sol.element_compliance, p,
                                            alpha, result.J0, mc);
        eg = gray_fraction_mm(rho);
      } else {
        Eigen::VectorXd rho_col = rho.col(0);
        apply_passive_single(mesh, rho_col);
        const Eigen::VectorXd young = mat::simp_modulus(rho_col, p, 1.0);
        const fea::SolveResult sol = solver.solve(young);
        compliance = fea::total_compliance(rho_col, p, sol.element_compliance);
        loss_value = loss(rho_col, sol.element_compliance, p, alpha, result.J0, vc);
        fraction = mat::volume_fraction(rho_col, vc.v_e, vc.V_domain);
        upstream = loss_grad_wrt_density(rho_col, sol.element_compliance, p,
                                         alpha, result.J0, vc);
        eg = gray_fraction(rho_col);
      }
      zero_passive_rows(mesh, upstream);

      const Eigen::VectorXd grad = network.backward(upstream);
      if (!grad.allFinite()) {
        Eigen::Index bad = 0;
        for (Eigen::Index i = 0; i < grad.size(); ++i)
          if (!std::isfinite(grad[i])) {
            bad = i;
            break;
          }
        throw NumericError("non-finite gradient in " +
                           network.param_block_name(bad));
      }
      adam_step(network.params(), grad, adam, cfg.lr, cfg.beta1, cfg.beta2,
                cfg.eps_adam);

      alpha = std::min(cfg.alpha_max, alpha + cfg.d_alpha);
      p = std::min(cfg.p_max, p + cfg.d_p);

      result.history.push_back(
          {epoch, loss_value, compliance, fraction, eg, alpha, p});

      if (epoch >= cfg.min_epochs && eg < cfg.eps_g_star) {
        result.status = RunStatus::kConverged;
        break;
      }
      if (epoch == cfg.max_epochs) result.status = RunStatus::kMaxEpochs;
    }
  } catch (const SolverError& err) {
    result.status = RunStatus::kError;
    result.message = err.what();
  }

  // final field for extraction / export, batch-independent
  Eigen::MatrixXd rho = network.forward(features, net::Mode::kEval);
  if (multi) {
    apply_passive_mm(mesh, *catalog, rho);
  } else {
    Eigen::VectorXd col = rho.col(0);
    apply_passive_single(mesh, col);
    rho.col(0) = col;
  }
  result.densities = rho;
  return result;
}

}  // namespace fourtop::opt

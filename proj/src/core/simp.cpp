#include "core/simp.hpp"

#include <algorithm>
#include <cmath>

namespace fourtop::simp {

namespace {
constexpr double kRhoMin = 1e-3;
constexpr double kOcDamping = 0.5;
}  // namespace

FilterKernel FilterKernel::build(const fea::GridMesh& mesh, double r_min) {
  if (!(r_min > 0.0))
    throw std::invalid_argument("filter: r_min must be positive");
  FilterKernel k;
  k.radius = r_min;
  const int ne = mesh.element_count();
  const int reach = std::max(0, static_cast<int>(std::ceil(r_min)) - 1);
  k.offsets.assign(1, 0);
  for (int j = 0; j < mesh.nely; ++j) {
    for (int i = 0; i < mesh.nelx; ++i) {
      const int j0 = std::max(0, j - reach), j1 = std::min(mesh.nely - 1, j + reach);
      const int i0 = std::max(0, i - reach), i1 = std::min(mesh.nelx - 1, i + reach);
      double sum = 0.0;
      const std::size_t begin = k.cols.size();
      for (int jj = j0; jj <= j1; ++jj)
        for (int ii = i0; ii <= i1; ++ii) {
          const double dist = std::hypot(double(ii - i), double(jj - j));
          const double w = r_min - dist;
          if (w > 0.0) {
            k.cols.push_back(mesh.element_id(ii, jj));
            k.weights.push_back(w);
            sum += w;
          }
        }
      for (std::size_t s = begin; s < k.cols.size(); ++s) k.weights[s] /= sum;
      k.offsets.push_back(static_cast<int>(k.cols.size()));
    }
  }
  (void)ne;
  return k;
}

Eigen::VectorXd FilterKernel::apply(const Eigen::VectorXd& x) const {
  const int ne = static_cast<int>(offsets.size()) - 1;
  if (x.size() != ne) throw std::invalid_argument("filter: length mismatch");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(ne);
  for (int e = 0; e < ne; ++e)
    for (int s = offsets[e]; s < offsets[e + 1]; ++s)
      y[e] += weights[s] * x[cols[s]];
  return y;
}

Eigen::VectorXd FilterKernel::apply_transpose(const Eigen::VectorXd& x) const {
  const int ne = static_cast<int>(offsets.size()) - 1;
  if (x.size() != ne) throw std::invalid_argument("filter: length mismatch");
  Eigen::VectorXd y = Eigen::VectorXd::Zero(ne);
  for (int e = 0; e < ne; ++e)
    for (int s = offsets[e]; s < offsets[e + 1]; ++s)
      y[cols[s]] += weights[s] * x[e];
  return y;
}

Eigen::VectorXd density_filter(const Eigen::VectorXd& rho,
                               const FilterKernel& kernel) {
  return kernel.apply(rho);
}

Eigen::VectorXd oc_update(const Eigen::VectorXd& rho,
                          const Eigen::VectorXd& sensitivities, double v_star,
                          double move_limit, const FilterKernel& kernel,
                          const fea::GridMesh& mesh,
                          const Eigen::VectorXd* lower_bound,
                          const Eigen::VectorXd* upper_bound) {
  const Eigen::Index ne = rho.size();
  if (sensitivities.size() != ne)
    throw std::invalid_argument("oc_update: length mismatch");
  if (!(move_limit > 0.0 && move_limit <= 1.0))
    throw std::invalid_argument("oc_update: move limit must lie in (0, 1]");
  if ((sensitivities.array() > 1e-12).any())
    throw std::invalid_argument(
        "oc_update: compliance sensitivities must be non-positive");

  const double target = v_star * mesh.domain_volume();
  const Eigen::VectorXd dv =
      kernel.apply_transpose(Eigen::VectorXd::Constant(ne, mesh.element_volume()));

  auto clamp_bounds = [&](Eigen::VectorXd v) {
    for (Eigen::Index e = 0; e < ne; ++e) {
      double lo = lower_bound ? (*lower_bound)[e] : kRhoMin;
      double hi = upper_bound ? (*upper_bound)[e] : 1.0;
      v[e] = std::clamp(v[e], lo, hi);
    }
    return v;
  };
  auto phys_volume = [&](const Eigen::VectorXd& design) {
    return kernel.apply(design).sum() * mesh.element_volume();
  };

  // Degenerate all-zero sensitivities: plain volume correction by uniform
  // scaling, bisected on the scale factor.
  if (sensitivities.lpNorm<Eigen::Infinity>() <= 1e-300) {
    double lo = 0.0, hi = 1.0 / std::max(kRhoMin, rho.maxCoeff());
    Eigen::VectorXd out = clamp_bounds(rho);
    if (phys_volume(out) <= target) return out;
    for (int it = 0; it < 200; ++it) {
      const double c = 0.5 * (lo + hi);
      out = clamp_bounds(c * rho);
      const double vol = phys_volume(out);
      if (std::abs(vol / target - 1.0) <= 1e-4) return out;
      (vol > target ? hi : lo) = c;
    }
    throw NumericError("oc_update: volume-correction bisection failed");
  }

  auto candidate = [&](double lam) {
    Eigen::VectorXd next(ne);
    for (Eigen::Index e = 0; e < ne; ++e) {
      const double be = std::max(0.0, -sensitivities[e]) / (lam * dv[e]);
      double v = rho[e] * std::pow(be, kOcDamping);
      v = std::clamp(v, rho[e] - move_limit, rho[e] + move_limit);
      next[e] = v;
    }
    return clamp_bounds(std::move(next));
  };

  // volume(lam) is monotone decreasing; expand the bracket, then bisect
  double lam_lo = 1e-12, lam_hi = 1e12;
  if (phys_volume(candidate(lam_lo)) < target) return candidate(lam_lo);
  if (phys_volume(candidate(lam_hi)) > target) return candidate(lam_hi);
  for (int it = 0; it < 100; ++it) {
    const double lam = std::sqrt(lam_lo * lam_hi);
    const Eigen::VectorXd next = candidate(lam);
    const double vol = phys_volume(next);
    if (std::abs(vol / target - 1.0) <= 1e-4) return next;
    (vol > target ? lam_lo : lam_hi) = lam;
  }
  throw NumericError("oc_update: multiplier bisection did not converge in 100 iterations");
}

SimpResult run_simp(const prob::Problem& problem, double v_star, double p,
                    double r_min, int max_iters) {
  const fea::GridMesh& mesh = problem.mesh;
  const Eigen::Index ne = mesh.element_count();
  const FilterKernel kernel = FilterKernel::build(mesh, r_min);
  fea::GridSolver solver(mesh, problem.nu);

  Eigen::VectorXd lb = Eigen::VectorXd::Constant(ne, kRhoMin);
  Eigen::VectorXd ub = Eigen::VectorXd::Ones(ne);
  for (int e : mesh.passive_solid) lb[e] = 1.0;
  for (int e : mesh.passive_void) ub[e] = kRhoMin;

  SimpResult result;
  Eigen::VectorXd rho = Eigen::VectorXd::Constant(ne, v_star);
  for (Eigen::Index e = 0; e < ne; ++e) rho[e] = std::clamp(rho[e], lb[e], ub[e]);

  for (int iter = 1; iter <= max_iters; ++iter) {
    Eigen::VectorXd rho_phys = kernel.apply(rho);
    for (int e : mesh.passive_solid) rho_phys[e] = 1.0;
    for (int e : mesh.passive_void) rho_phys[e] = kRhoMin;

    const Eigen::VectorXd young = mat::simp_modulus(rho_phys, p, 1.0);
    const fea::SolveResult sol = solver.solve(young);
    const double compliance = young.dot(sol.element_compliance);
    if (result.J0 <= 0.0) result.J0 = compliance;

    Eigen::VectorXd dc_phys =
        (-p * (1.0 - mat::kVoidModulus)) *
        (rho_phys.array().pow(p - 1.0) * sol.element_compliance.array())
            .matrix();
    const Eigen::VectorXd dc = kernel.apply_transpose(dc_phys);

    const Eigen::VectorXd rho_new =
        oc_update(rho, dc, v_star, 0.2, kernel, mesh, &lb, &ub);
    const double change = (rho_new - rho).lpNorm<Eigen::Infinity>();
    rho = rho_new;

    result.rho_phys = kernel.apply(rho);
    for (int e : mesh.passive_solid) result.rho_phys[e] = 1.0;
    for (int e : mesh.passive_void) result.rho_phys[e] = kRhoMin;

    result.history.push_back(
        {iter, compliance / result.J0, compliance,
         mat::volume_fraction(result.rho_phys, mesh.element_volume(),
                              mesh.domain_volume()),
         opt::gray_fraction(result.rho_phys), 0.0, p});

    if (change < 0.01) {
      result.status = opt::RunStatus::kConverged;
      break;
    }
    if (iter == max_iters) result.status = opt::RunStatus::kMaxEpochs;
  }
  return result;
}

}  // namespace fourtop::simp

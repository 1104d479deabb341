#include "core/runner.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "core/simp.hpp"

namespace fourtop::runner {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

opt::InputMap make_input_map(const prob::Problem& problem,
                             const net::FrequencyBank* bank) {
  opt::InputMap m;
  m.bank = bank;
  m.zero_axis = problem.extrude == prob::Extrude::kX   ? 0
                : problem.extrude == prob::Extrude::kY ? 1
                                                       : -1;
  return m;
}

Eigen::MatrixXd coarse_grid(const fea::GridMesh& mesh,
                            const Eigen::VectorXd& indicator) {
  Eigen::MatrixXd grid(mesh.nely, mesh.nelx);
  for (int j = 0; j < mesh.nely; ++j)
    for (int i = 0; i < mesh.nelx; ++i)
      grid(j, i) = indicator[mesh.element_id(i, j)];
  return grid;
}

}  // namespace

std::string echo_config(const RunConfig& cfg, const prob::Problem& problem) {
  std::ostringstream os;
  os << "# fourtop effective configuration\n";
  os << "solver = " << to_string(cfg.solver) << "\n";
  os << "problem = " << cfg.problem << "\n";
  os << "problem.nelx = " << problem.mesh.nelx << "\n";
  os << "problem.nely = " << problem.mesh.nely << "\n";
  os << "problem.h = " << fmt(problem.mesh.h) << "\n";
  if (cfg.materials.empty()) {
    os << "problem.v_star = "
       << fmt(cfg.v_star.value_or(problem.v_star_default)) << "\n";
  } else {
    os << "problem.m_star = " << fmt(cfg.m_star.value_or(0.0)) << "\n";
    os << "materials = ";
    for (std::size_t i = 0; i < cfg.materials.size(); ++i) {
      if (i) os << ';';
      os << cfg.materials[i].label << ':' << fmt(cfg.materials[i].young) << ':'
         << fmt(cfg.materials[i].density);
    }
    os << "\n";
  }
  if (cfg.solver == Solver::kSimp) {
    os << "simp.r_min = " << fmt(cfg.simp_r_min) << "\n";
    os << "simp.p = " << fmt(cfg.simp_p) << "\n";
    os << "simp.max_iters = " << cfg.simp_max_iters << "\n";
  } else {
    if (cfg.solver == Solver::kFourier) {
      os << "lengths.l_min = " << fmt(cfg.l_min.value_or(problem.l_min_default))
         << "\n";
      os << "lengths.l_max = " << fmt(cfg.l_max.value_or(problem.l_max_default))
         << "\n";
      os << "net.n_f = " << cfg.eff_n_f() << "\n";
      os << "net.freq_sampling = " << (cfg.freq_grid ? "grid" : "uniform")
         << "\n";
    }
    os << "net.n_h = " << cfg.eff_n_h() << "\n";
    os << "net.n_l = " << cfg.eff_n_L() << "\n";
    os << "net.leaky_slope = " << fmt(cfg.leaky_slope) << "\n";
    if (cfg.checkpoint) os << "net.checkpoint = " << *cfg.checkpoint << "\n";
    os << "opt.alpha0 = " << fmt(cfg.opt.alpha0) << "\n";
    os << "opt.d_alpha = " << fmt(cfg.opt.d_alpha) << "\n";
    os << "opt.alpha_max = " << fmt(cfg.opt.alpha_max) << "\n";
    os << "opt.p0 = " << fmt(cfg.opt.p0) << "\n";
    os << "opt.d_p = " << fmt(cfg.opt.d_p) << "\n";
    os << "opt.p_max = " << fmt(cfg.opt.p_max) << "\n";
    os << "opt.lr = " << fmt(cfg.opt.lr) << "\n";
    os << "opt.beta1 = " << fmt(cfg.opt.beta1) << "\n";
    os << "opt.beta2 = " << fmt(cfg.opt.beta2) << "\n";
    os << "opt.eps_adam = " << fmt(cfg.opt.eps_adam) << "\n";
    os << "opt.eps_g_star = " << fmt(cfg.opt.eps_g_star) << "\n";
    os << "opt.min_epochs = " << cfg.opt.min_epochs << "\n";
    os << "opt.max_epochs = " << cfg.opt.max_epochs << "\n";
  }
  os << "extract.s = " << cfg.extract_s << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "out_dir = " << cfg.out_dir << "\n";
  return os.str();
}

ExperimentResult run_experiment(const RunConfig& config) {
  RunConfig cfg = config;
  cfg.validate();

  prob::ProblemOverrides ov;
  ov.nelx = cfg.nelx;
  ov.nely = cfg.nely;
  ov.h = cfg.h;
  const prob::Problem problem = prob::make_problem(cfg.problem, ov);

  const double v_star = cfg.v_star.value_or(problem.v_star_default);
  const double l_min = cfg.l_min.value_or(problem.l_min_default);
  const double l_max = cfg.l_max.value_or(problem.l_max_default);
  if (l_min > l_max)
    throw std::invalid_argument(
        "config: lengths.l_min must not exceed lengths.l_max");

  opt::OptConfig oc = cfg.opt;
  oc.v_star = v_star;
  oc.m_star = cfg.m_star.value_or(0.0);
  oc.seed = cfg.seed;

  const fs::path dir = cfg.out_dir;
  fs::create_directories(dir);
  {
    std::ofstream os(dir / "config.txt");
    if (!os) throw IoError("cannot write " + (dir / "config.txt").string());
    os << echo_config(cfg, problem);
  }

  std::optional<mat::MaterialCatalog> catalog;
  if (!cfg.materials.empty())
    catalog = mat::MaterialCatalog::with_void(cfg.materials);
  const mat::MaterialCatalog* cat_ptr = catalog ? &*catalog : nullptr;
  const int n_o = catalog ? catalog->size() : 1;

  ExperimentResult ex;
  ex.dir = dir;
  ex.warnings = cfg.warnings;

  post::FineField fine;
  if (cfg.solver == Solver::kSimp) {
    auto res = simp::run_simp(problem, v_star, cfg.simp_p, cfg.simp_r_min,
                              cfg.simp_max_iters);
    ex.status = res.status;
    ex.history = std::move(res.history);
    fine = post::fine_from_elements(problem.mesh, res.rho_phys);
  } else {
    net::FrequencyBank bank;
    const net::FrequencyBank* bank_ptr = nullptr;
    net::NetArch arch;
    if (cfg.solver == Solver::kFourier) {
      bank = cfg.freq_grid
                 ? net::grid_frequencies(l_min, l_max, problem.mesh.h,
                                         cfg.eff_n_f(), 2)
                 : net::sample_frequencies(l_min, l_max, problem.mesh.h,
                                           cfg.eff_n_f(), 2, cfg.seed);
      bank_ptr = &bank;
      arch = net::fourier_arch(cfg.eff_n_f(), cfg.eff_n_h(), cfg.eff_n_L(),
                               n_o, cfg.leaky_slope);
    } else {
      bank.h = problem.mesh.h;
      bank.freqs.resize(2, 0);
      arch = net::coordinate_arch(2, cfg.eff_n_h(), cfg.eff_n_L(), n_o,
                                  cfg.leaky_slope);
    }
    // distinct stream from the frequency draw
    net::Network network = net::Network::glorot_init(arch, cfg.seed + 1);

    auto res = opt::run(problem, network, bank_ptr, cat_ptr, oc);
    ex.status = res.status;
    ex.history = std::move(res.history);
    if (res.status == opt::RunStatus::kError) {
      post::write_history_csv(dir / "history.csv", ex.history);
      throw SolverError(res.message);
    }

    const opt::InputMap imap = make_input_map(problem, bank_ptr);
    fine = post::extract_highres(network, imap, problem.mesh, cat_ptr,
                                 cfg.extract_s);
    if (cfg.checkpoint)
      net::save_checkpoint((dir / *cfg.checkpoint).string(), network, bank);
  }

  if (ex.history.empty())
    throw NumericError("run produced no history rows");
  const opt::HistoryRow& last = ex.history.back();
  ex.epochs = last.epoch;
  ex.final_loss = last.loss;
  ex.final_compliance = last.compliance;
  ex.final_fraction = last.vol_or_mass_fraction;
  ex.final_gray = last.gray_fraction;
  ex.exit_code = ex.status == opt::RunStatus::kConverged ? 0 : 2;

  post::write_history_csv(dir / "history.csv", ex.history);
  post::write_density_csv(dir / "density.csv", fine);
  post::write_png(dir / "topology.png", post::render_pixels(fine, cat_ptr));

  // spectrum of the optimization-resolution field
  {
    post::FineField coarse;
    if (fine.s == 1) {
      coarse = fine;
    } else {
      coarse.nx = problem.mesh.nelx;
      coarse.ny = problem.mesh.nely;
      coarse.s = 1;
      coarse.h = problem.mesh.h;
      // subsample the fine grid at parent-element centers
      coarse.values.resize(
          static_cast<Eigen::Index>(coarse.nx) * coarse.ny, fine.channels());
      for (int j = 0; j < coarse.ny; ++j)
        for (int i = 0; i < coarse.nx; ++i)
          coarse.values.row(static_cast<Eigen::Index>(j) * coarse.nx + i) =
              fine.values.row(
                  static_cast<Eigen::Index>(j * fine.s + fine.s / 2) * fine.nx +
                  (i * fine.s + fine.s / 2));
    }
    const auto spectrum = post::density_spectrum(
        coarse_grid(problem.mesh, coarse.solid_indicator()), problem.mesh.h,
        problem.mesh.h);
    post::write_spectrum_csv(dir / "spectrum.csv", spectrum);
  }

  ex.features = post::feature_size(fine);
  post::write_features_csv(dir / "features.csv", ex.features);
  return ex;
}

}  // namespace fourtop::runner

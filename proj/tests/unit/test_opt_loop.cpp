#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "core/optimizer.hpp"
#include "core/problems.hpp"
#include "test_support.hpp"

using namespace fourtop;

namespace {

prob::Problem small_cantilever(int nx = 6, int ny = 3) {
  prob::ProblemOverrides ov;
  ov.nelx = nx;
  ov.nely = ny;
  return prob::make_problem("mid_cantilever", ov);
}

}  // namespace

TEST_CASE("compute_J0 and the normalization identity") {
  auto problem = small_cantilever(8, 4);
  fea::GridSolver solver(problem.mesh, problem.nu);
  const double v_star = 0.5, p0 = 1.0;
  const double J0 = opt::compute_J0(solver, v_star, p0);
  CHECK(J0 > 0.0);

  // loss of the uniform-gray field with the same solve equals 1 exactly
  const Eigen::VectorXd rho =
      Eigen::VectorXd::Constant(problem.mesh.element_count(), v_star);
  const auto sol = solver.solve(mat::simp_modulus(rho, p0, 1.0));
  const opt::VolumeConstraint vc{v_star, 1.0,
                                 double(problem.mesh.element_count())};
  const double l =
      opt::loss(rho, sol.element_compliance, p0, 7.3, J0, vc);
  CHECK(l == doctest::Approx(1.0).epsilon(1e-12));

  SUBCASE("doubling loads quadruples J0") {
    auto scaled = problem;
    scaled.mesh.load_vector *= 2.0;
    fea::GridSolver s2(scaled.mesh, scaled.nu);
    CHECK(testsup::rel_err(opt::compute_J0(s2, v_star, p0), 4.0 * J0) < 1e-12);
  }

  SUBCASE("zero loads are rejected") {
    auto empty = problem;
    empty.mesh.load_vector.setZero();
    fea::GridSolver s2(empty.mesh, empty.nu);
    CHECK_THROWS_AS(opt::compute_J0(s2, v_star, p0), std::invalid_argument);
  }
}

TEST_CASE("loss arithmetic") {
  Eigen::VectorXd rho(2), je(2);
  rho << 1.0, 1.0;
  je << 1.0, 1.0;
  const opt::VolumeConstraint vc{0.5, 1.0, 2.0};
  // J/J0 = 2/2 = 1; vf = 1, ratio = 2, penalty = 0.2 * 1
  CHECK(opt::loss(rho, je, 1.0, 0.2, 2.0, vc) == doctest::Approx(1.2));
  CHECK(opt::loss(rho, je, 1.0, 0.0, 2.0, vc) == doctest::Approx(1.0));
  CHECK_THROWS_AS(opt::loss(rho, je, 1.0, 0.2, 0.0, vc),
                  std::invalid_argument);
}

TEST_CASE("loss gradient pieces") {
  const opt::VolumeConstraint vc{0.5, 1.0, 4.0};
  Eigen::VectorXd je(4);
  je << 1.0, 2.0, 0.5, 0.0;

  SUBCASE("constraint part vanishes at the target volume") {
    Eigen::VectorXd rho = Eigen::VectorXd::Constant(4, 0.5);
    const auto g = opt::loss_grad_wrt_density(rho, je, 1.0, 5.0, 1.0, vc);
    for (int e = 0; e < 4; ++e)
      CHECK(g[e] == doctest::Approx(-je[e]).epsilon(1e-12));
  }

  SUBCASE("rho = 1 gives -p Je / J0 plus the penalty term") {
    Eigen::VectorXd rho = Eigen::VectorXd::Ones(4);
    const double p = 3.0, alpha = 0.0, J0 = 2.0;
    const auto g = opt::loss_grad_wrt_density(rho, je, p, alpha, J0, vc);
    for (int e = 0; e < 4; ++e)
      CHECK(g[e] == doctest::Approx(-p * je[e] / J0).epsilon(1e-12));
  }
}

TEST_CASE("density gradient matches finite differences of the FEA loss") {
  auto problem = small_cantilever(4, 4);
  fea::GridSolver solver(problem.mesh, problem.nu);
  const int ne = problem.mesh.element_count();
  const double p = 3.0, alpha = 0.7, v_star = 0.4;
  const opt::VolumeConstraint vc{v_star, 1.0, double(ne)};
  const double J0 = opt::compute_J0(solver, v_star, 1.0);

  Eigen::VectorXd rho(ne);
  Rng rng(123);
  for (int e = 0; e < ne; ++e) rho[e] = rng.uniform(0.2, 0.9);

  auto loss_at = [&](const Eigen::VectorXd& r) {
    const auto sol = solver.solve(mat::simp_modulus(r, p, 1.0));
    return opt::loss(r, sol.element_compliance, p, alpha, J0, vc);
  };

  const auto sol = solver.solve(mat::simp_modulus(rho, p, 1.0));
  const auto g =
      opt::loss_grad_wrt_density(rho, sol.element_compliance, p, alpha, J0, vc);

  const double step = 1e-5;
  for (int e = 0; e < ne; ++e) {
    Eigen::VectorXd hi = rho, lo = rho;
    hi[e] += step;
    lo[e] -= step;
    const double fd = (loss_at(hi) - loss_at(lo)) / (2.0 * step);
    CHECK(testsup::rel_err(g[e], fd, 1e-10) < 1e-4);
  }
}

TEST_CASE("multi-material density gradient matches finite differences") {
  auto problem = small_cantilever(4, 3);
  fea::GridSolver solver(problem.mesh, problem.nu);
  const int ne = problem.mesh.element_count();
  const auto cat = mat::MaterialCatalog::with_void(
      {{"black", 1.0, 1.0, {}}, {"red", 0.8, 0.7, {}}});
  const double p = 2.0, alpha = 0.9, m_star = 0.3;
  const opt::MassConstraint mc{m_star, 1.0, double(ne), &cat};
  const double J0 = opt::compute_J0_mm(solver, cat, 1.0);

  // softmax-style rows strictly inside the simplex
  Rng rng(7);
  Eigen::MatrixXd rows(ne, 3);
  for (int e = 0; e < ne; ++e) {
    double sum = 0.0;
    for (int c = 0; c < 3; ++c) {
      rows(e, c) = rng.uniform(0.1, 1.0);
      sum += rows(e, c);
    }
    rows.row(e) /= sum;
  }

  auto loss_at = [&](const Eigen::MatrixXd& r) {
    const auto sol = solver.solve(mat::mm_modulus(r, p, cat));
    return opt::loss_mm(r, sol.element_compliance, p, alpha, J0, mc);
  };

  const auto sol = solver.solve(mat::mm_modulus(rows, p, cat));
  const auto g =
      opt::loss_grad_wrt_density_mm(rows, sol.element_compliance, p, alpha, J0, mc);

  // partial derivatives hold each other column fixed, so perturb around the
  // partition-of-unity tolerance
  const double step = 1e-6;
  for (int e = 0; e < ne; ++e)
    for (int c = 0; c < 3; ++c) {
      Eigen::MatrixXd hi = rows, lo = rows;
      hi(e, c) += step;
      lo(e, c) -= step;
      const double fd = (loss_at(hi) - loss_at(lo)) / (2.0 * step);
      CHECK(testsup::grad_close(g(e, c), fd, 1e-4));
    }
}

TEST_CASE("adam_step") {
  SUBCASE("zero gradient leaves parameters unchanged") {
    Eigen::VectorXd w = Eigen::VectorXd::Constant(5, 1.5);
    auto st = opt::AdamState::zeros(5);
    opt::adam_step(w, Eigen::VectorXd::Zero(5), st, 0.01, 0.9, 0.999, 1e-8);
    CHECK((w.array() == 1.5).all());
    CHECK(st.t == 1);
  }

  SUBCASE("first step moves by about -lr * sign(g)") {
    // bias-corrected first step: m-hat = g, v-hat = g^2
    Eigen::VectorXd w = Eigen::VectorXd::Zero(3);
    Eigen::VectorXd g(3);
    g << 4.0, -0.3, 1e-3;
    auto st = opt::AdamState::zeros(3);
    opt::adam_step(w, g, st, 0.01, 0.9, 0.999, 1e-8);
    for (int i = 0; i < 3; ++i) {
      const double expect = -0.01 * g[i] / (std::abs(g[i]) + 1e-8);
      CHECK(w[i] == doctest::Approx(expect).epsilon(1e-9));
    }
  }

  SUBCASE("identical runs are identical") {
    Eigen::VectorXd w1 = Eigen::VectorXd::Zero(4), w2 = w1;
    auto s1 = opt::AdamState::zeros(4), s2 = opt::AdamState::zeros(4);
    Eigen::VectorXd g(4);
    g << 1.0, -2.0, 0.5, 3.0;
    for (int it = 0; it < 50; ++it) {
      opt::adam_step(w1, g, s1, 0.01, 0.9, 0.999, 1e-8);
      opt::adam_step(w2, g, s2, 0.01, 0.9, 0.999, 1e-8);
    }
    CHECK((w1 - w2).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("non-finite gradients are rejected") {
    Eigen::VectorXd w = Eigen::VectorXd::Zero(2);
    Eigen::VectorXd g(2);
    g << 1.0, std::nan("");
    auto st = opt::AdamState::zeros(2);
    CHECK_THROWS_AS(opt::adam_step(w, g, st, 0.01, 0.9, 0.999, 1e-8),
                    NumericError);
  }
}

TEST_CASE("gray_fraction") {
  Eigen::VectorXd v(4);
  v << 0.04, 0.5, 0.96, 0.2;
  CHECK(opt::gray_fraction(v) == doctest::Approx(0.5));
  CHECK(opt::gray_fraction(Eigen::VectorXd::Ones(9)) == 0.0);
  CHECK(opt::gray_fraction(Eigen::VectorXd::Constant(9, 0.5)) == 1.0);
  // boundary values are not gray (strict inequalities)
  Eigen::VectorXd edges(2);
  edges << 0.05, 0.95;
  CHECK(opt::gray_fraction(edges) == 0.0);

  Eigen::MatrixXd rows(2, 3);
  rows << 0.5, 0.25, 0.25,  // solid indicator 0.5 -> gray
      0.01, 0.5, 0.49;      // solid indicator 0.99 -> not gray
  CHECK(opt::gray_fraction_mm(rows) == doctest::Approx(0.5));
}

TEST_CASE("input map: extrusion zeroes a coordinate before projection") {
  const auto bank = net::sample_frequencies(4.0, 10.0, 1.0, 8, 2, 31);
  opt::InputMap im;
  im.bank = &bank;
  im.zero_axis = 0;
  Eigen::MatrixXd pts(2, 2);
  pts << 3.0, 1.25, -7.0, 1.25;  // same y, different x
  const auto f = im(pts);
  CHECK((f.row(0) - f.row(1)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("run: schedules, determinism, unconstrained collapse") {
  auto problem = small_cantilever(12, 6);
  opt::OptConfig cfg;
  cfg.v_star = 0.5;
  cfg.min_epochs = 10;
  cfg.max_epochs = 40;
  cfg.seed = 3;

  const auto bank =
      net::sample_frequencies(3.0, 8.0, 1.0, 24, 2, cfg.seed);
  auto n1 = net::Network::glorot_init(net::fourier_arch(24, 10, 1, 1), 4);
  auto n2 = net::Network::glorot_init(net::fourier_arch(24, 10, 1, 1), 4);

  const auto r1 = opt::run(problem, n1, &bank, nullptr, cfg);
  const auto r2 = opt::run(problem, n2, &bank, nullptr, cfg);

  SUBCASE("bit-identical history under identical seeds") {
    REQUIRE(r1.history.size() == r2.history.size());
    for (std::size_t i = 0; i < r1.history.size(); ++i) {
      CHECK(r1.history[i].loss == r2.history[i].loss);
      CHECK(r1.history[i].compliance == r2.history[i].compliance);
      CHECK(r1.history[i].gray_fraction == r2.history[i].gray_fraction);
    }
    CHECK((r1.densities - r2.densities).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("alpha and p are nondecreasing and capped") {
    double last_a = 0.0, last_p = 0.0;
    for (const auto& row : r1.history) {
      CHECK(row.alpha >= last_a);
      CHECK(row.p >= last_p);
      CHECK(row.alpha <= cfg.alpha_max);
      CHECK(row.p <= cfg.p_max);
      last_a = row.alpha;
      last_p = row.p;
    }
  }

  SUBCASE("alpha frozen at zero ignores the volume constraint") {
    opt::OptConfig free_cfg = cfg;
    free_cfg.alpha0 = 0.0;
    free_cfg.d_alpha = 0.0;
    free_cfg.min_epochs = 200;
    free_cfg.max_epochs = 200;
    auto n3 = net::Network::glorot_init(net::fourier_arch(24, 10, 1, 1), 4);
    const auto r3 = opt::run(problem, n3, &bank, nullptr, free_cfg);
    CHECK(r3.history.back().vol_or_mass_fraction > 0.9);
    CHECK(r3.history.back().vol_or_mass_fraction >
          r3.history.front().vol_or_mass_fraction);
  }
}

TEST_CASE("run: solver failure preserves history") {
  // no boundary conditions at all -> singular reduced system
  prob::Problem loose;
  loose.name = "loose";
  loose.mesh = fea::build_grid(4, 4, 1.0);
  loose.mesh.add_load(4, 4, 0.0, -1.0);

  opt::OptConfig cfg;
  cfg.max_epochs = 5;
  cfg.min_epochs = 1;
  const auto bank = net::sample_frequencies(2.0, 6.0, 1.0, 8, 2, 1);
  auto n = net::Network::glorot_init(net::fourier_arch(8, 4, 1, 1), 1);
  // compute_J0 hits the singular system before the loop
  CHECK_THROWS_AS(opt::run(loose, n, &bank, nullptr, cfg), SolverError);
}

TEST_CASE("gradient path: dL/dw chain matches loss finite differences") {
  auto problem = small_cantilever(6, 3);
  fea::GridSolver solver(problem.mesh, problem.nu);
  const int ne = problem.mesh.element_count();
  const double v_star = 0.45;
  const opt::VolumeConstraint vc{v_star, 1.0, double(ne)};
  const double J0 = opt::compute_J0(solver, v_star, 1.0);
  const double p = 2.5, alpha = 1.3;

  const auto bank = net::sample_frequencies(2.0, 8.0, 1.0, 12, 2, 51);
  auto network = net::Network::glorot_init(net::fourier_arch(12, 6, 1, 1), 52);
  const Eigen::MatrixXd feats =
      net::fourier_project(problem.mesh.element_centers, bank);

  auto loss_of_weights = [&]() {
    const Eigen::MatrixXd rho = network.forward(feats, net::Mode::kTrain);
    const auto sol = solver.solve(mat::simp_modulus(rho.col(0), p, 1.0));
    return opt::loss(rho.col(0), sol.element_compliance, p, alpha, J0, vc);
  };

  // analytic: density-side gradient chained through the network backward
  const Eigen::MatrixXd rho = network.forward(feats, net::Mode::kTrain);
  const auto sol = solver.solve(mat::simp_modulus(rho.col(0), p, 1.0));
  const Eigen::VectorXd dLdrho = opt::loss_grad_wrt_density(
      rho.col(0), sol.element_compliance, p, alpha, J0, vc);
  const Eigen::VectorXd g = network.backward(dLdrho);

  Rng rng(999);
  const double step = 1e-6;
  for (int probe = 0; probe < 20; ++probe) {
    const auto k = static_cast<Eigen::Index>(
        rng.uniform01() * double(network.num_params()));
    const double saved = network.params()[k];
    network.params()[k] = saved + step;
    const double hi = loss_of_weights();
    network.params()[k] = saved - step;
    const double lo = loss_of_weights();
    network.params()[k] = saved;
    const double fd = (hi - lo) / (2.0 * step);
    CHECK(testsup::rel_err(g[k], fd, 1e-6) < 1e-3);
  }
}

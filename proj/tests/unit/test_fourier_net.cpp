#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "core/fourier_net.hpp"
#include "core/optimizer.hpp"
#include "core/postproc.hpp"
#include "test_support.hpp"

using namespace fourtop;
using net::Mode;

TEST_CASE("sample_frequencies stays in the band and is deterministic") {
  const auto bank = net::sample_frequencies(6.0, 30.0, 1.0, 150, 2, 17);
  CHECK(bank.freqs.rows() == 2);
  CHECK(bank.freqs.cols() == 150);
  for (int i = 0; i < 150; ++i)
    for (int c = 0; c < 2; ++c) {
      const double a = std::abs(bank.freqs(c, i));
      CHECK(a >= 1.0 / 30.0);
      CHECK(a <= 1.0 / 6.0);
    }

  const auto again = net::sample_frequencies(6.0, 30.0, 1.0, 150, 2, 17);
  CHECK((bank.freqs - again.freqs).cwiseAbs().maxCoeff() == 0.0);

  const auto other = net::sample_frequencies(6.0, 30.0, 1.0, 150, 2, 18);
  CHECK((bank.freqs - other.freqs).cwiseAbs().maxCoeff() > 0.0);

  SUBCASE("degenerate band pins every magnitude") {
    const auto one = net::sample_frequencies(8.0, 8.0, 2.0, 40, 2, 3);
    for (int i = 0; i < 40; ++i)
      for (int c = 0; c < 2; ++c)
        CHECK(std::abs(one.freqs(c, i)) == doctest::Approx(0.25));
  }

  SUBCASE("both signs occur") {
    CHECK((bank.freqs.array() > 0.0).any());
    CHECK((bank.freqs.array() < 0.0).any());
  }

  CHECK_THROWS_AS(net::sample_frequencies(10.0, 5.0, 1.0, 4, 2, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(net::sample_frequencies(0.0, 5.0, 1.0, 4, 2, 0),
                  std::invalid_argument);
  CHECK_THROWS_AS(net::sample_frequencies(1.0, 5.0, 1.0, 0, 2, 0),
                  std::invalid_argument);
}

TEST_CASE("grid_frequencies covers the band deterministically") {
  const auto a = net::grid_frequencies(4.0, 20.0, 1.0, 50, 2);
  const auto b = net::grid_frequencies(4.0, 20.0, 1.0, 50, 2);
  CHECK((a.freqs - b.freqs).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < 50; ++i)
    for (int c = 0; c < 2; ++c) {
      const double m = std::abs(a.freqs(c, i));
      CHECK(m >= 1.0 / 20.0 - 1e-15);
      CHECK(m <= 1.0 / 4.0 + 1e-15);
    }
}

TEST_CASE("fourier_project") {
  const auto bank = net::sample_frequencies(6.0, 30.0, 1.0, 150, 2, 5);

  SUBCASE("origin maps to ones and zeros") {
    Eigen::MatrixXd pt = Eigen::MatrixXd::Zero(1, 2);
    const auto f = net::fourier_project(pt, bank);
    CHECK(f.cols() == 300);
    CHECK((f.leftCols(150).array() - 1.0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(f.rightCols(150).cwiseAbs().maxCoeff() == 0.0);
  }

  SUBCASE("element-center batch has the documented shape") {
    Eigen::MatrixXd pts(1800, 2);
    for (int i = 0; i < 1800; ++i) {
      pts(i, 0) = (i % 60) + 0.5;
      pts(i, 1) = (i / 60) + 0.5;
    }
    const auto f = net::fourier_project(pts, bank);
    CHECK(f.rows() == 1800);
    CHECK(f.cols() == 300);
  }

  SUBCASE("1-D evaluation") {
    net::FrequencyBank b1;
    b1.h = 1.0;
    b1.l_min = 1.0;
    b1.l_max = 1.0;
    b1.freqs.resize(1, 1);
    b1.freqs(0, 0) = 1.0;
    Eigen::MatrixXd x(1, 1);
    x(0, 0) = 1.0;
    const auto f = net::fourier_project(x, b1);
    CHECK(f(0, 0) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(std::abs(f(0, 1)) < 1e-14);
  }

  SUBCASE("dimension mismatch") {
    Eigen::MatrixXd bad(3, 1);
    bad.setZero();
    CHECK_THROWS_AS(net::fourier_project(bad, bank), std::invalid_argument);
  }
}

TEST_CASE("param_count matches the architecture arithmetic") {
  CHECK(net::param_count(net::fourier_arch(150, 20, 1, 1)) == 6040);
  CHECK(net::param_count(net::fourier_arch(150, 20, 1, 3)) == 6083);
  CHECK(net::param_count(net::fourier_arch(150, 20, 1, 4)) == 6104);
  CHECK(net::param_count(net::fourier_arch(1, 1, 1, 1)) == 4);
  CHECK(net::param_count(net::fourier_arch(150, 20, 2, 1)) == 6460);
  // raw-coordinate ablation net: 4 layers of 20 with an output bias
  CHECK(net::param_count(net::coordinate_arch(2, 20, 4, 1)) == 1341);
}

TEST_CASE("glorot init: deterministic, zero biases, unit running stats") {
  const auto arch = net::fourier_arch(8, 5, 2, 3);
  auto a = net::Network::glorot_init(arch, 42);
  auto b = net::Network::glorot_init(arch, 42);
  CHECK(a.num_params() == net::param_count(arch));
  CHECK((a.params() - b.params()).cwiseAbs().maxCoeff() == 0.0);

  // batch-norm layers start with unit gains; plain layers with zero biases
  CHECK((a.layer_gain(0).array() - 1.0).abs().maxCoeff() == 0.0);
  CHECK((a.layer_gain(1).array() - 1.0).abs().maxCoeff() == 0.0);
  CHECK(a.output_bias().cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.bn_running_mean(0).cwiseAbs().maxCoeff() == 0.0);
  CHECK((a.bn_running_var(0).array() - 1.0).abs().maxCoeff() == 0.0);

  auto plain_arch = net::fourier_arch(8, 5, 1, 1);
  plain_arch.batch_norm = false;
  auto plain = net::Network::glorot_init(plain_arch, 42);
  CHECK(plain.layer_gain(0).cwiseAbs().maxCoeff() == 0.0);

  const double lim0 = std::sqrt(6.0 / (16 + 5));
  CHECK(a.layer_weights(0).cwiseAbs().maxCoeff() <= lim0);
  CHECK(a.layer_weights(0).cwiseAbs().maxCoeff() > 0.1 * lim0);

  auto c = net::Network::glorot_init(arch, 43);
  CHECK((a.params() - c.params()).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("forward basics") {
  SUBCASE("zero output weights give rho = 0.5") {
    auto n = net::Network(net::fourier_arch(4, 3, 1, 1));
    n.layer_weights(0).setConstant(0.3);
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(10, 8);
    const auto rho = n.forward(x, Mode::kTrain);
    CHECK(rho.rows() == 10);
    for (int i = 0; i < 10; ++i) CHECK(rho(i, 0) == doctest::Approx(0.5));
  }

  SUBCASE("sigmoid outputs stay strictly inside (0,1)") {
    auto n = net::Network::glorot_init(net::fourier_arch(16, 8, 1, 1), 7);
    n.output_weights().setConstant(50.0);  // extreme logits
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(64, 32);
    const auto rho = n.forward(x, Mode::kTrain);
    CHECK(rho.minCoeff() > 0.0);
    CHECK(rho.maxCoeff() < 1.0);
  }

  SUBCASE("softmax rows sum to one") {
    auto n = net::Network::glorot_init(net::fourier_arch(6, 4, 1, 3), 11);
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(32, 12);
    const auto rho = n.forward(x, Mode::kTrain);
    for (int i = 0; i < 32; ++i) {
      CHECK(std::abs(rho.row(i).sum() - 1.0) < 1e-6);
      for (int c = 0; c < 3; ++c) {
        CHECK(rho(i, c) > 0.0);
        CHECK(rho(i, c) < 1.0);
      }
    }
  }

  SUBCASE("train batch of one is rejected") {
    auto n = net::Network::glorot_init(net::fourier_arch(4, 3, 1, 1), 1);
    Eigen::MatrixXd x = Eigen::MatrixXd::Random(1, 8);
    CHECK_THROWS_AS(n.forward(x, Mode::kTrain), std::invalid_argument);
    CHECK_NOTHROW(n.forward(x, Mode::kEval));
  }

  SUBCASE("eval mode is batch independent") {
    auto n = net::Network::glorot_init(net::fourier_arch(4, 3, 1, 1), 2);
    // move the running stats off their init values first
    Eigen::MatrixXd warm = Eigen::MatrixXd::Random(32, 8);
    n.forward(warm, Mode::kTrain);
    Eigen::MatrixXd big = Eigen::MatrixXd::Random(16, 8);
    const auto full = n.forward(big, Mode::kEval);
    const auto head = n.forward(big.topRows(4), Mode::kEval);
    CHECK((full.topRows(4) - head).cwiseAbs().maxCoeff() == 0.0);
  }
}

namespace {

// closed-form single-neuron density: sigmoid(w3 * LR(w1 cos(pi f1 x) +
// w2 cos(pi f2 x))), the simplified 1-D scenario
double simplified_density(double x, double w1, double w2, double w3,
                          double f1, double f2, double slope) {
  const double z = w1 * std::cos(M_PI * f1 * x) + w2 * std::cos(M_PI * f2 * x);
  const double lr = std::max(0.0, z) + slope * std::min(0.0, z);
  return 1.0 / (1.0 + std::exp(-w3 * lr));
}

net::FrequencyBank bank_1d(std::initializer_list<double> freqs) {
  net::FrequencyBank b;
  b.h = 1.0;
  b.l_min = 1.0;
  b.l_max = 1.0;
  b.freqs.resize(1, static_cast<Eigen::Index>(freqs.size()));
  int i = 0;
  for (double f : freqs) b.freqs(0, i++) = f;
  return b;
}

}  // namespace

TEST_CASE("simplified 1-D scenario reproduces the closed form to 1e-12") {
  const auto bank = bank_1d({1.0, 6.0});
  net::NetArch arch = net::fourier_arch(2, 1, 1, 1);
  arch.batch_norm = false;
  net::Network n(arch);
  n.layer_weights(0) << 8.0, 10.0, 0.0, 0.0;  // cos f1, cos f2; sines unused
  n.output_weights() << 4.0;

  const int samples = 512;
  Eigen::MatrixXd x(samples, 1);
  for (int i = 0; i < samples; ++i) x(i, 0) = 2.0 * i / samples;

  const auto rho = n.forward(net::fourier_project(x, bank), Mode::kEval);
  for (int i = 0; i < samples; ++i) {
    const double expected =
        simplified_density(x(i, 0), 8.0, 10.0, 4.0, 1.0, 6.0, 0.01);
    CHECK(std::abs(rho(i, 0) - expected) < 1e-12);
  }
}

TEST_CASE("backward: zero upstream, missing forward, shape checks") {
  auto n = net::Network::glorot_init(net::fourier_arch(4, 3, 1, 1), 3);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(8, 8);

  CHECK_THROWS_AS(n.backward(Eigen::MatrixXd::Zero(8, 1)), std::logic_error);

  n.forward(x, Mode::kTrain);
  const auto g = n.backward(Eigen::MatrixXd::Zero(8, 1));
  CHECK(g.size() == static_cast<Eigen::Index>(n.num_params()));
  CHECK(g.cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(n.backward(Eigen::MatrixXd::Zero(4, 1)),
                  std::invalid_argument);
}

TEST_CASE("backward matches the symbolic single-neuron derivative") {
  // no batch norm, one hidden neuron, hand-derived chain rule
  const auto bank = bank_1d({1.0, 6.0});
  net::NetArch arch = net::fourier_arch(2, 1, 1, 1);
  arch.batch_norm = false;
  net::Network n(arch);
  const double w1 = 0.8, w2 = -1.1, w3 = 1.7, b = 0.25, slope = 0.01;
  n.layer_weights(0) << w1, w2, 0.4, -0.6;
  n.layer_gain(0) << b;  // plain bias when batch norm is off
  n.output_weights() << w3;

  Eigen::MatrixXd x(5, 1);
  x << 0.1, 0.35, 0.52, 0.7, 1.3;
  const Eigen::MatrixXd feats = net::fourier_project(x, bank);
  const auto rho = n.forward(feats, Mode::kTrain);

  Eigen::MatrixXd upstream(5, 1);
  upstream << 1.0, -0.5, 2.0, 0.3, -1.2;
  const auto g = n.backward(upstream);

  // symbolic: rho = sigmoid(w3 * LR(z)), z = f . w_hidden + b
  Eigen::VectorXd dw_hidden = Eigen::VectorXd::Zero(4);
  double db = 0.0, dw_out = 0.0;
  for (int i = 0; i < 5; ++i) {
    const double z = feats.row(i).dot(n.layer_weights(0).col(0)) + b;
    const double lr = std::max(0.0, z) + slope * std::min(0.0, z);
    const double dlr = z > 0.0 ? 1.0 : slope;
    const double r = rho(i, 0);
    const double dsig = r * (1.0 - r);
    dw_out += upstream(i, 0) * dsig * lr;
    const double common = upstream(i, 0) * dsig * w3 * dlr;
    db += common;
    dw_hidden += common * feats.row(i).transpose();
  }
  for (int k = 0; k < 4; ++k)
    CHECK(testsup::rel_err(g[k], dw_hidden[k]) < 1e-12);
  CHECK(testsup::rel_err(g[4], db) < 1e-12);
  CHECK(testsup::rel_err(g[5], dw_out) < 1e-12);
}

namespace {

// scalar objective sum(upstream .* forward) for finite differencing
double objective(net::Network& n, const Eigen::MatrixXd& x,
                 const Eigen::MatrixXd& upstream) {
  return (n.forward(x, Mode::kTrain).array() * upstream.array()).sum();
}

void check_grad_fd(const net::NetArch& arch, std::uint64_t seed, int rows) {
  auto n = net::Network::glorot_init(arch, seed);
  Rng rng(seed * 7919 + 13);
  Eigen::MatrixXd x(rows, arch.input_width);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < arch.input_width; ++j)
      x(i, j) = rng.uniform(-1.0, 1.0);
  Eigen::MatrixXd upstream(rows, arch.n_o);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < arch.n_o; ++j) upstream(i, j) = rng.uniform(-2.0, 2.0);

  n.forward(x, Mode::kTrain);
  const Eigen::VectorXd g = n.backward(upstream);
  const double step = 1e-6;
  for (Eigen::Index k = 0; k < g.size(); ++k) {
    const double saved = n.params()[k];
    n.params()[k] = saved + step;
    const double hi = objective(n, x, upstream);
    n.params()[k] = saved - step;
    const double lo = objective(n, x, upstream);
    n.params()[k] = saved;
    const double fd = (hi - lo) / (2.0 * step);
    CHECK(testsup::grad_close(g[k], fd, 1e-5));
  }
}

}  // namespace

TEST_CASE("backward vs finite differences: single layer, three seeds") {
  check_grad_fd(net::fourier_arch(8, 5, 1, 1), 1, 64);
  check_grad_fd(net::fourier_arch(8, 5, 1, 1), 2, 64);
  check_grad_fd(net::fourier_arch(8, 5, 1, 1), 3, 64);
}

TEST_CASE("backward vs finite differences: two hidden layers") {
  check_grad_fd(net::fourier_arch(6, 4, 2, 1), 4, 48);
}

TEST_CASE("backward vs finite differences: softmax outputs") {
  check_grad_fd(net::fourier_arch(6, 4, 1, 3), 5, 48);
}

TEST_CASE("backward vs finite differences: raw-coordinate deep net") {
  check_grad_fd(net::coordinate_arch(2, 6, 3, 1), 6, 48);
}

TEST_CASE("pre-activation spectra stay inside the sampled frequency set") {
  // lattice-aligned bank so the DFT bins are exact: h/l = 2 with h=1
  net::FrequencyBank bank;
  bank.h = 1.0;
  bank.l_min = 0.5;
  bank.l_max = 0.5;
  bank.freqs.resize(2, 4);
  bank.freqs << 2, -2, 2, -2, 2, 2, -2, -2;

  net::NetArch arch = net::fourier_arch(4, 1, 1, 1);
  auto n = net::Network::glorot_init(arch, 9);

  const int grid = 32;  // samples per axis over one period [0, 2)
  Eigen::MatrixXd pts(grid * grid, 2);
  for (int j = 0; j < grid; ++j)
    for (int i = 0; i < grid; ++i) {
      pts(j * grid + i, 0) = 2.0 * i / grid;
      pts(j * grid + i, 1) = 2.0 * j / grid;
    }
  const Eigen::MatrixXd feats = net::fourier_project(pts, bank);

  // hidden-layer input: linear combination of the features plus the bias
  Eigen::VectorXd z = feats * n.layer_weights(0).col(0);
  z.array() += 0.37;
  Eigen::MatrixXd zgrid(grid, grid);
  for (int j = 0; j < grid; ++j)
    for (int i = 0; i < grid; ++i) zgrid(j, i) = z[j * grid + i];

  const auto sp = post::density_spectrum(zgrid, 2.0 / grid, 1.0);
  double inside = 0.0, outside = 0.0;
  for (int ky = 0; ky < grid; ++ky)
    for (int kx = 0; kx < grid; ++kx) {
      const double fx = std::abs(sp.fx[kx]);
      const double fy = std::abs(sp.fy[ky]);
      const double e = sp.mag(ky, kx) * sp.mag(ky, kx);
      const bool dc = fx == 0.0 && fy == 0.0;
      if (dc || (fx == 2.0 && fy == 2.0))
        inside += e;
      else
        outside += e;
    }
  CHECK(outside < 1e-10 * (inside + outside));
}

TEST_CASE("checkpoint round trip preserves weights, bank and outputs") {
  const auto bank = net::sample_frequencies(4.0, 20.0, 1.0, 12, 2, 21);
  auto n = net::Network::glorot_init(net::fourier_arch(12, 6, 1, 1), 22);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(32, 2);
  const Eigen::MatrixXd feats = net::fourier_project(x, bank);
  n.forward(feats, Mode::kTrain);  // move the running stats
  const Eigen::MatrixXd before = n.forward(feats, Mode::kEval);

  const auto path = std::filesystem::temp_directory_path() / "ftop_ckpt.bin";
  net::save_checkpoint(path.string(), n, bank);
  auto cp = net::load_checkpoint(path.string());

  CHECK((cp.network.params() - n.params()).cwiseAbs().maxCoeff() == 0.0);
  CHECK((cp.bank.freqs - bank.freqs).cwiseAbs().maxCoeff() == 0.0);
  CHECK(cp.bank.seed == bank.seed);
  CHECK(cp.bank.l_min == bank.l_min);

  const Eigen::MatrixXd after =
      cp.network.forward(net::fourier_project(x, cp.bank), Mode::kEval);
  CHECK((before - after).cwiseAbs().maxCoeff() == 0.0);

  std::filesystem::remove(path);
  CHECK_THROWS_AS(net::load_checkpoint(path.string()), IoError);
}

TEST_CASE("every trainable scalar moves under one adam step") {
  for (const auto& arch :
       {net::fourier_arch(150, 20, 1, 1), net::fourier_arch(150, 20, 1, 3),
        net::fourier_arch(150, 20, 1, 4)}) {
    auto n = net::Network::glorot_init(arch, 5);
    const Eigen::VectorXd before = n.params();
    auto adam = opt::AdamState::zeros(before.size());
    const Eigen::VectorXd grad = Eigen::VectorXd::Constant(before.size(), 0.5);
    opt::adam_step(n.params(), grad, adam, 0.01, 0.9, 0.999, 1e-8);
    Eigen::Index moved = 0;
    for (Eigen::Index i = 0; i < before.size(); ++i)
      if (n.params()[i] != before[i]) ++moved;
    CHECK(static_cast<std::size_t>(moved) == net::param_count(arch));
  }
}

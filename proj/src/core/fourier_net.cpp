#include "core/fourier_net.hpp"

#include <cmath>
#include <cstring>
#include <fstream>

namespace fourtop::net {

namespace {

constexpr double kBnEps = 1e-5;
constexpr double kBnMomentum = 0.1;
constexpr double kPi = 3.14159265358979323846;

void check_band(double l_min, double l_max, double h, int n_f, int d) {
  if (!(l_min > 0.0))
    throw std::invalid_argument("frequency band: l_min must be positive");
  if (l_min > l_max)
    throw std::invalid_argument("frequency band: l_min must not exceed l_max");
  if (n_f < 1) throw std::invalid_argument("frequency band: n_f must be >= 1");
  if (d != 1 && d != 2)
    throw std::invalid_argument("frequency band: dimension must be 1 or 2");
  if (!(h > 0.0))
    throw std::invalid_argument("frequency band: h must be positive");
}

}  // namespace

FrequencyBank sample_frequencies(double l_min, double l_max, double h, int n_f,
                                 int d, std::uint64_t seed) {
  check_band(l_min, l_max, h, n_f, d);

  const double lo = h / l_max;
  const double hi = h / l_min;
  FrequencyBank bank;
  bank.l_min = l_min;
  bank.l_max = l_max;
  bank.h = h;
  bank.seed = seed;
  bank.freqs.resize(d, n_f);
  Rng rng(seed);
  for (int i = 0; i < n_f; ++i)
    for (int c = 0; c < d; ++c) {
      double v = rng.uniform(lo, hi);
      if (rng.coin_flip()) v = -v;
      bank.freqs(c, i) = v;
    }
  return bank;
}

FrequencyBank grid_frequencies(double l_min, double l_max, double h, int n_f,
                               int d) {
  check_band(l_min, l_max, h, n_f, d);

  const double lo = h / l_max;
  const double hi = h / l_min;
  FrequencyBank bank;
  bank.l_min = l_min;
  bank.l_max = l_max;
  bank.h = h;
  bank.freqs.resize(d, n_f);

  auto lattice = [&](int idx, int count) {
    return count > 1 ? lo + (hi - lo) * idx / (count - 1) : 0.5 * (lo + hi);
  };

  if (d == 1) {
    for (int i = 0; i < n_f; ++i) bank.freqs(0, i) = lattice(i, n_f);
    return bank;
  }
  const int k = static_cast<int>(std::ceil(std::sqrt(double(n_f))));
  for (int i = 0; i < n_f; ++i) {
    bank.freqs(0, i) = lattice(i / k, k);
    bank.freqs(1, i) = (i % 2 == 0 ? 1.0 : -1.0) * lattice(i % k, k);
  }
  return bank;
}

Eigen::MatrixXd fourier_project(const Eigen::MatrixXd& points,
                                const FrequencyBank& bank) {
  if (points.cols() != bank.dim())
    throw std::invalid_argument(
        "fourier_project: point dimension does not match the frequency bank");
  if (!points.allFinite())
    throw std::invalid_argument("fourier_project: points must be finite");

  const Eigen::MatrixXd phase = (kPi / bank.h) * (points * bank.freqs);
  Eigen::MatrixXd features(points.rows(), 2 * bank.count());
  features.leftCols(bank.count()) = phase.array().cos().matrix();
  features.rightCols(bank.count()) = phase.array().sin().matrix();
  return features;
}

void NetArch::validate() const {
  if (input_width < 1 || n_h < 1 || n_L < 1 || n_o < 1)
    throw std::invalid_argument("network architecture: sizes must be >= 1");
  if (!(leaky_slope >= 0.0 && leaky_slope < 1.0))
    throw std::invalid_argument(
        "network architecture: leaky slope must lie in [0, 1)");
}

NetArch fourier_arch(int n_f, int n_h, int n_L, int n_o, double leaky_slope) {
  NetArch a;
  a.input_width = 2 * n_f;
  a.n_h = n_h;
  a.n_L = n_L;
  a.n_o = n_o;
  a.leaky_slope = leaky_slope;
  a.output_bias = n_o > 1;
  a.validate();
  return a;
}

NetArch coordinate_arch(int d, int n_h, int n_L, int n_o, double leaky_slope) {
  NetArch a;
  a.input_width = d;
  a.n_h = n_h;
  a.n_L = n_L;
  a.n_o = n_o;
  a.leaky_slope = leaky_slope;
  a.output_bias = true;
  a.validate();
  return a;
}

std::size_t param_count(const NetArch& arch) {
  arch.validate();
  std::size_t n =
      static_cast<std::size_t>(arch.input_width) * arch.n_h + arch.n_h;
  n += static_cast<std::size_t>(arch.n_L - 1) *
       (static_cast<std::size_t>(arch.n_h) * arch.n_h + arch.n_h);
  n += static_cast<std::size_t>(arch.n_h) * arch.n_o;
  if (arch.output_bias) n += arch.n_o;
  return n;
}

int Network::layer_fan_in(int layer) const {
  return layer == 0 ? arch_.input_width : arch_.n_h;
}

Network::Network(const NetArch& arch) : arch_(arch) {
  arch_.validate();
  Eigen::Index off = 0;
  for (int l = 0; l < arch_.n_L; ++l) {
    w_off_.push_back(off);
    off += static_cast<Eigen::Index>(layer_fan_in(l)) * arch_.n_h;
    b_off_.push_back(off);
    off += arch_.n_h;
  }
  wout_off_ = off;
  off += static_cast<Eigen::Index>(arch_.n_h) * arch_.n_o;
  bout_off_ = off;
  if (arch_.output_bias) off += arch_.n_o;
  params_ = Eigen::VectorXd::Zero(off);
  run_mean_.assign(arch_.n_L, Eigen::VectorXd::Zero(arch_.n_h));
  run_var_.assign(arch_.n_L, Eigen::VectorXd::Ones(arch_.n_h));
}

Network Network::glorot_init(const NetArch& arch, std::uint64_t seed) {
  Network net(arch);
  Rng rng(seed);
  auto fill = [&](double* data, Eigen::Index n, int fan_in, int fan_out) {
    const double limit = std::sqrt(6.0 / (fan_in + fan_out));
    for (Eigen::Index i = 0; i < n; ++i) data[i] = rng.uniform(-limit, limit);
  };
  for (int l = 0; l < net.arch_.n_L; ++l) {
    auto w = net.layer_weights(l);
    fill(w.data(), w.size(), net.layer_fan_in(l), net.arch_.n_h);
    if (net.arch_.batch_norm) net.layer_gain(l).setOnes();
  }
  auto w = net.output_weights();
  fill(w.data(), w.size(), net.arch_.n_h, net.arch_.n_o);
  // biases stay zero, batch-norm running stats at (0, 1)
  return net;
}

Network::MatView Network::layer_weights(int layer) {
  return MatView(params_.data() + w_off_[layer], layer_fan_in(layer),
                 arch_.n_h);
}

Network::ConstMatView Network::layer_weights(int layer) const {
  return ConstMatView(params_.data() + w_off_[layer], layer_fan_in(layer),
                      arch_.n_h);
}

Network::VecView Network::layer_gain(int layer) {
  return VecView(params_.data() + b_off_[layer], arch_.n_h);
}

Network::ConstVecView Network::layer_gain(int layer) const {
  return ConstVecView(params_.data() + b_off_[layer], arch_.n_h);
}

Network::MatView Network::output_weights() {
  return MatView(params_.data() + wout_off_, arch_.n_h, arch_.n_o);
}

Network::ConstMatView Network::output_weights() const {
  return ConstMatView(params_.data() + wout_off_, arch_.n_h, arch_.n_o);
}

Network::VecView Network::output_bias() {
  if (!arch_.output_bias) throw std::logic_error("network has no output bias");
  return VecView(params_.data() + bout_off_, arch_.n_o);
}

std::string Network::param_block_name(Eigen::Index flat_index) const {
  const std::string unit = arch_.batch_norm ? "hidden_gain[" : "hidden_bias[";
  for (int l = arch_.n_L - 1; l >= 0; --l) {
    if (flat_index >= b_off_[l] && flat_index < b_off_[l] + arch_.n_h)
      return unit + std::to_string(l) + "]";
    if (flat_index >= w_off_[l] && flat_index < b_off_[l])
      return "hidden_weights[" + std::to_string(l) + "]";
  }
  if (arch_.output_bias && flat_index >= bout_off_) return "output_bias";
  if (flat_index >= wout_off_ && flat_index < bout_off_)
    return "output_weights";
  return "unknown";
}

Eigen::MatrixXd Network::forward(const Eigen::MatrixXd& input, Mode mode) {
  if (input.cols() != arch_.input_width)
    throw std::invalid_argument("forward: input width must be " +
                                std::to_string(arch_.input_width));
  const Eigen::Index n = input.rows();
  const bool train = mode == Mode::kTrain;
  if (train && arch_.batch_norm && n < 2)
    throw std::invalid_argument(
        "forward: train-mode batch must have at least 2 rows (batch variance "
        "is undefined)");

  Cache cache;
  cache.valid = train;
  if (train) cache.input = input;

  Eigen::MatrixXd a = input;
  for (int l = 0; l < arch_.n_L; ++l) {
    Eigen::MatrixXd z = a * layer_weights(l);

    Eigen::RowVectorXd inv_std = Eigen::RowVectorXd::Ones(arch_.n_h);
    if (arch_.batch_norm) {
      if (train) {
        const Eigen::RowVectorXd mu = z.colwise().mean();
        z.rowwise() -= mu;
        const Eigen::RowVectorXd var = z.cwiseProduct(z).colwise().mean();
        inv_std = (var.array() + kBnEps).rsqrt().matrix();
        z.array().rowwise() *= inv_std.array();
        const double unbias = double(n) / double(n - 1);
        run_mean_[l] =
            (1.0 - kBnMomentum) * run_mean_[l] + kBnMomentum * mu.transpose();
        run_var_[l] = (1.0 - kBnMomentum) * run_var_[l] +
                      kBnMomentum * (unbias * var.transpose());
      } else {
        const Eigen::RowVectorXd rs =
            (run_var_[l].array() + kBnEps).rsqrt().matrix().transpose();
        z.rowwise() -= run_mean_[l].transpose();
        z.array().rowwise() *= rs.array();
      }
    } else {
      z.rowwise() += layer_gain(l).transpose();  // plain bias, no norm
    }

    if (train) {
      cache.xhat.push_back(z);
      cache.inv_std.push_back(inv_std);
    }
    if (arch_.batch_norm)
      z.array().rowwise() *= layer_gain(l).transpose().array();
    a = z.array().max(0.0).matrix() +
        arch_.leaky_slope * z.array().min(0.0).matrix();
    if (train) cache.act.push_back(a);
  }

  Eigen::MatrixXd o = a * output_weights();
  if (arch_.output_bias) o.rowwise() += output_bias().transpose();

  Eigen::MatrixXd probs;
  if (arch_.n_o == 1) {
    probs = (1.0 + (-o.array()).exp()).inverse().matrix();
  } else {
    const Eigen::VectorXd row_max = o.rowwise().maxCoeff();
    const Eigen::MatrixXd e = (o.colwise() - row_max).array().exp().matrix();
    const Eigen::VectorXd denom = e.rowwise().sum();
    probs = (e.array().colwise() / denom.array()).matrix();
  }
  if (!probs.allFinite())
    throw NumericError("forward: non-finite network output");
  // saturated logits would otherwise round to exactly 0 or 1
  probs = probs.cwiseMax(1e-13).cwiseMin(1.0 - 1e-13);

  if (train) {
    cache.probs = probs;
    cache_ = std::move(cache);
  }
  return probs;
}

Eigen::VectorXd Network::backward(const Eigen::MatrixXd& upstream) const {
  if (!cache_.valid)
    throw std::logic_error(
        "backward requires a preceding train-mode forward pass");
  if (upstream.rows() != cache_.probs.rows() ||
      upstream.cols() != cache_.probs.cols())
    throw std::invalid_argument("backward: upstream shape mismatch");

  const Eigen::Index n = upstream.rows();
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(params_.size());

  Eigen::MatrixXd d_out;
  if (arch_.n_o == 1) {
    d_out = (upstream.array() * cache_.probs.array() *
             (1.0 - cache_.probs.array()))
                .matrix();
  } else {
    const Eigen::VectorXd dot =
        (upstream.array() * cache_.probs.array()).rowwise().sum().matrix();
    d_out = (cache_.probs.array() * (upstream.colwise() - dot).array())
                .matrix();
  }

  const Eigen::MatrixXd& last_act = cache_.act.back();
  MatView(grad.data() + wout_off_, arch_.n_h, arch_.n_o) =
      last_act.transpose() * d_out;
  if (arch_.output_bias)
    VecView(grad.data() + bout_off_, arch_.n_o) =
        d_out.colwise().sum().transpose();

  Eigen::MatrixXd d_act = d_out * output_weights().transpose();

  for (int l = arch_.n_L - 1; l >= 0; --l) {
    const Eigen::MatrixXd& xh = cache_.xhat[l];  // pre-gain when batch norm
    // LeakyReLU has positive slopes, so the activation sign carries the mask
    const Eigen::ArrayXXd lr_deriv =
        (cache_.act[l].array() > 0.0).cast<double>() *
            (1.0 - arch_.leaky_slope) +
        arch_.leaky_slope;
    Eigen::MatrixXd d_pre = (d_act.array() * lr_deriv).matrix();

    Eigen::MatrixXd d_z;
    if (arch_.batch_norm) {
      VecView(grad.data() + b_off_[l], arch_.n_h) =
          d_pre.cwiseProduct(xh).colwise().sum().transpose();
      Eigen::MatrixXd d_xhat =
          (d_pre.array().rowwise() * layer_gain(l).transpose().array())
              .matrix();
      // through the batch statistics
      const Eigen::RowVectorXd sum_d = d_xhat.colwise().sum();
      const Eigen::RowVectorXd sum_dx =
          d_xhat.cwiseProduct(xh).colwise().sum();
      d_z = double(n) * d_xhat;
      d_z.rowwise() -= sum_d;
      d_z -= (xh.array().rowwise() * sum_dx.array()).matrix();
      d_z.array().rowwise() *= (cache_.inv_std[l] / double(n)).array();
    } else {
      VecView(grad.data() + b_off_[l], arch_.n_h) =
          d_pre.colwise().sum().transpose();
      d_z = std::move(d_pre);
    }

    const Eigen::MatrixXd& prev = l == 0 ? cache_.input : cache_.act[l - 1];
    MatView(grad.data() + w_off_[l], layer_fan_in(l), arch_.n_h) =
        prev.transpose() * d_z;
    if (l > 0) d_act = d_z * layer_weights(l).transpose();
  }
  return grad;
}

namespace {

constexpr char kMagic[8] = {'F', 'T', 'O', 'P', 'N', 'E', 'T', '1'};

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Network& network,
                     const FrequencyBank& bank) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot open checkpoint for writing: " + path);
  os.write(kMagic, sizeof(kMagic));
  const NetArch& a = network.arch();
  write_pod<std::int32_t>(os, a.input_width);
  write_pod<std::int32_t>(os, a.n_h);
  write_pod<std::int32_t>(os, a.n_L);
  write_pod<std::int32_t>(os, a.n_o);
  write_pod<std::uint8_t>(os, a.batch_norm ? 1 : 0);
  write_pod<std::uint8_t>(os, a.output_bias ? 1 : 0);
  write_pod<double>(os, a.leaky_slope);
  write_pod<std::uint64_t>(os, bank.seed);
  write_pod<double>(os, bank.l_min);
  write_pod<double>(os, bank.l_max);
  write_pod<double>(os, bank.h);
  write_pod<std::int32_t>(os, bank.dim());
  write_pod<std::int32_t>(os, bank.count());
  for (int r = 0; r < bank.dim(); ++r)
    for (int c = 0; c < bank.count(); ++c)
      write_pod<double>(os, bank.freqs(r, c));
  os.write(reinterpret_cast<const char*>(network.params().data()),
           static_cast<std::streamsize>(sizeof(double) * network.num_params()));
  for (int l = 0; l < a.n_L; ++l) {
    os.write(reinterpret_cast<const char*>(network.bn_running_mean(l).data()),
             sizeof(double) * a.n_h);
    os.write(reinterpret_cast<const char*>(network.bn_running_var(l).data()),
             sizeof(double) * a.n_h);
  }
  if (!os) throw IoError("failed while writing checkpoint: " + path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open checkpoint: " + path);
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw IoError("not a network checkpoint: " + path);

  NetArch a;
  a.input_width = read_pod<std::int32_t>(is);
  a.n_h = read_pod<std::int32_t>(is);
  a.n_L = read_pod<std::int32_t>(is);
  a.n_o = read_pod<std::int32_t>(is);
  a.batch_norm = read_pod<std::uint8_t>(is) != 0;
  a.output_bias = read_pod<std::uint8_t>(is) != 0;
  a.leaky_slope = read_pod<double>(is);

  FrequencyBank bank;
  bank.seed = read_pod<std::uint64_t>(is);
  bank.l_min = read_pod<double>(is);
  bank.l_max = read_pod<double>(is);
  bank.h = read_pod<double>(is);
  const int d = read_pod<std::int32_t>(is);
  const int n_f = read_pod<std::int32_t>(is);
  if (!is || d < 0 || n_f < 0 || d > 3)
    throw IoError("corrupt checkpoint header: " + path);
  bank.freqs.resize(d, n_f);
  for (int r = 0; r < d; ++r)
    for (int c = 0; c < n_f; ++c) bank.freqs(r, c) = read_pod<double>(is);

  Checkpoint cp{Network(a), bank};
  is.read(reinterpret_cast<char*>(cp.network.params().data()),
          static_cast<std::streamsize>(sizeof(double) * cp.network.num_params()));
  for (int l = 0; l < a.n_L; ++l) {
    is.read(reinterpret_cast<char*>(cp.network.bn_running_mean(l).data()),
            sizeof(double) * a.n_h);
    is.read(reinterpret_cast<char*>(cp.network.bn_running_var(l).data()),
            sizeof(double) * a.n_h);
  }
  if (!is) throw IoError("checkpoint truncated: " + path);
  return cp;
}

}  // namespace fourtop::net

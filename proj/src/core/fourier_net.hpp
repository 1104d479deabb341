#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "core/common.hpp"

namespace fourtop::net {

// Fixed (non-trainable) frequency matrix of the projection layer.
// Component magnitudes live in [h/l_max, h/l_min]; signs are randomized so
// wave orientations cover the full circle.
struct FrequencyBank {
  Eigen::MatrixXd freqs;  // d x n_f
  double l_min = 0.0;
  double l_max = 0.0;
  double h = 1.0;
  std::uint64_t seed = 0;

  int dim() const { return static_cast<int>(freqs.rows()); }
  int count() const { return static_cast<int>(freqs.cols()); }
};

// f ~ U(h/l_max, h/l_min) per component, each sign flipped with
// probability 1/2; deterministic under the seed.
FrequencyBank sample_frequencies(double l_min, double l_max, double h, int n_f,
                                 int d, std::uint64_t seed);

// Deterministic alternative: component values on an evenly spaced lattice
// over the band, second-component sign alternating to cover orientations.
FrequencyBank grid_frequencies(double l_min, double l_max, double h, int n_f,
                               int d);

// points (n x d) -> [cos(pi/h f_i.x) | sin(pi/h f_i.x)]  (n x 2 n_f)
Eigen::MatrixXd fourier_project(const Eigen::MatrixXd& points,
                                const FrequencyBank& bank);

struct NetArch {
  int input_width = 2;  // 2 n_f for projected nets, coordinate dim otherwise
  int n_h = 20;
  int n_L = 1;
  int n_o = 1;
  double leaky_slope = 0.01;
  bool batch_norm = true;
  bool output_bias = false;

  void validate() const;
};

// Standard architecture behind a frequency projection. The single-material
// net carries no output bias; multi-output nets do.
NetArch fourier_arch(int n_f, int n_h, int n_L, int n_o,
                     double leaky_slope = 0.01);

// Raw-coordinate net (no projection); output bias present.
NetArch coordinate_arch(int d, int n_h, int n_L, int n_o,
                        double leaky_slope = 0.01);

std::size_t param_count(const NetArch& arch);

enum class Mode { kTrain, kEval };

// Coordinates -> densities. One or more LeakyReLU hidden layers, each with
// batch normalization followed by a trainable per-unit gain, sigmoid output
// for a single channel, row softmax otherwise. forward in train mode caches
// the activations that backward consumes.
class Network {
 public:
  explicit Network(const NetArch& arch);

  static Network glorot_init(const NetArch& arch, std::uint64_t seed);

  const NetArch& arch() const { return arch_; }
  std::size_t num_params() const { return static_cast<std::size_t>(params_.size()); }
  Eigen::VectorXd& params() { return params_; }
  const Eigen::VectorXd& params() const { return params_; }

  std::string param_block_name(Eigen::Index flat_index) const;

  using MatView =
      Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                               Eigen::RowMajor>>;
  using ConstMatView =
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                     Eigen::RowMajor>>;
  using VecView = Eigen::Map<Eigen::VectorXd>;
  using ConstVecView = Eigen::Map<const Eigen::VectorXd>;

  MatView layer_weights(int layer);
  ConstMatView layer_weights(int layer) const;
  // Per-unit scalar of a hidden layer: the post-normalization gain when
  // batch norm is on (a pre-normalization bias would be absorbed by the mean
  // subtraction and never train), a plain pre-activation bias otherwise.
  VecView layer_gain(int layer);
  ConstVecView layer_gain(int layer) const;
  MatView output_weights();
  ConstMatView output_weights() const;
  VecView output_bias();  // only when arch().output_bias

  Eigen::VectorXd& bn_running_mean(int layer) { return run_mean_[layer]; }
  Eigen::VectorXd& bn_running_var(int layer) { return run_var_[layer]; }
  const Eigen::VectorXd& bn_running_mean(int layer) const { return run_mean_[layer]; }
  const Eigen::VectorXd& bn_running_var(int layer) const { return run_var_[layer]; }

  // input: n x input_width. Returns n x n_o densities.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, Mode mode);

  // Gradient of sum_{rows} upstream . rho w.r.t. every trainable scalar,
  // in flat parameter order. Requires a preceding train-mode forward.
  Eigen::VectorXd backward(const Eigen::MatrixXd& upstream) const;

 private:
  NetArch arch_;
  Eigen::VectorXd params_;
  std::vector<Eigen::VectorXd> run_mean_, run_var_;
  std::vector<Eigen::Index> w_off_, b_off_;
  Eigen::Index wout_off_ = 0, bout_off_ = 0;

  struct Cache {
    bool valid = false;
    Eigen::MatrixXd input;
    std::vector<Eigen::MatrixXd> xhat;      // normalized pre-activations
    std::vector<Eigen::RowVectorXd> inv_std;
    std::vector<Eigen::MatrixXd> act;       // post-activations
    Eigen::MatrixXd probs;
  };
  Cache cache_;

  int layer_fan_in(int layer) const;
};

// Checkpoint: small header (architecture + frequency bank, including the
// realized matrix) followed by the flat trainable parameters and the
// batch-norm running statistics, all as 64-bit little-endian floats.
void save_checkpoint(const std::string& path, const Network& network,
                     const FrequencyBank& bank);

struct Checkpoint {
  Network network;
  FrequencyBank bank;  // count() == 0 for raw-coordinate nets
};

Checkpoint load_checkpoint(const std::string& path);

}  // namespace fourtop::net

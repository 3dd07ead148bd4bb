#ifndef ISING_NN_HPP
#define ISING_NN_HPP

#include <cstdint>
#include <filesystem>
#include <vector>

#include <Eigen/Dense>

#include "ising/rng.hpp"

namespace ising::nn {

enum class Activation : std::uint8_t { identity = 0, tanh = 1 };

// Fully connected network; weights[l] is out x in, batches are column-major
// (one sample per column).
struct Mlp {
  std::vector<Eigen::MatrixXd> weights;
  std::vector<Eigen::VectorXd> biases;
  std::vector<Activation> activations;

  int layer_count() const { return static_cast<int>(weights.size()); }
  int input_dim() const { return static_cast<int>(weights.front().cols()); }
  int output_dim() const { return static_cast<int>(weights.back().rows()); }
  std::size_t parameter_count() const;
};

// Weights uniform in +/- sqrt(6 / (fan_in + fan_out)), biases zero.
Mlp make_mlp(const std::vector<int>& dims, const std::vector<Activation>& acts,
             RngStream& rng);

struct ForwardCache {
  Eigen::MatrixXd input;
  std::vector<Eigen::MatrixXd> post;  // activation output per layer
};

Eigen::MatrixXd forward(const Mlp& m, const Eigen::MatrixXd& x,
                        ForwardCache* cache = nullptr);
Eigen::VectorXd forward(const Mlp& m, const Eigen::VectorXd& x);

struct Gradients {
  std::vector<Eigen::MatrixXd> dw;
  std::vector<Eigen::VectorXd> db;
  Eigen::MatrixXd dx;
};

// Exact reverse-mode gradients of the scalar loss whose output gradient is
// grad_out (columns matching the cached batch); parameter gradients are
// summed over the batch.
Gradients backward(const Mlp& m, const ForwardCache& cache,
                   const Eigen::MatrixXd& grad_out);

struct OptimState {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long step = 0;
  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;
};

OptimState make_optim_state(const Mlp& m, double lr = 1e-3);

// Adaptive-moment update with bias correction; deterministic given state.
void opt_step(Mlp& m, const Gradients& g, OptimState& s);

// Model file: magic "IFM1", u32 format version, u32 layer count, u32 dims,
// u8 activation tags, then little-endian f64 weights (row-major) and biases
// in layer order.
void save_mlp(const Mlp& m, const std::filesystem::path& path);
Mlp load_mlp(const std::filesystem::path& path);

}  // namespace ising::nn

#endif  // ISING_NN_HPP

#ifndef ISING_FLOW_HPP
#define ISING_FLOW_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ising/dataset.hpp"
#include "ising/nn.hpp"
#include "ising/rng.hpp"
#include "ising/trajectory.hpp"

namespace ising::flow {

struct FlowHyper {
  int latent_dim = 0;     // 0 = auto: min(n^2, 1024)
  double sigma = 1.0;     // KDE bandwidth; rescales the field loss only
  double lambda = 0.1;    // weight of the energy-consistency term
  double lr = 1e-3;
  int epochs = 30;        // encoder/projector passes; the field stage runs
                          // 40x this over its much smaller pair set
  int batch = 64;
  int field_hidden = 256;
  std::uint64_t seed = 1;
};

int resolve_latent_dim(int n, const FlowHyper& hyper);

struct LatentVector {
  Eigen::VectorXd values;
  double beta = 0.0;  // inverse temperature this latent is associated with
};

// Trained components. encoder: n^2 -> L (tanh). inverse_map: L -> n^2 (tanh),
// kept after encoder training because its linear readout seeds the MH
// decoders. field: (L+1) -> hidden -> L. projector: (L+1) -> n^2 (tanh).
struct ModelBundle {
  int n = 0;
  FlowHyper hyper;
  nn::Mlp encoder;
  nn::Mlp inverse_map;
  nn::Mlp field;
  nn::Mlp projector;

  bool has_encoder() const { return !encoder.weights.empty(); }
  bool has_field() const { return !field.weights.empty(); }
  bool has_projector() const { return !projector.weights.empty(); }
};

// Freshly initialized encoder and inverse map; field and projector are
// created by their training stages. Each component draws from its own
// fixed substream of hyper.seed.
ModelBundle make_bundle(int n, const FlowHyper& hyper);

struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TrainStats {
  std::vector<double> loss_history;  // per-epoch mean loss
  double final_loss = 0.0;
};

Eigen::VectorXd grid_to_vector(const SpinGrid& g);
// Binarizes by sign; an exact zero maps to +1.
SpinGrid vector_to_grid(const Eigen::VectorXd& v, int n);

LatentVector encode(const ModelBundle& b, const SpinGrid& g, double beta = 0.0);

// Mean of the per-sample finite-difference slopes
//   (1/K) sum_k (z_next[k] - z_j) / (beta_next - beta_j).
Eigen::VectorXd target_field(const LatentVector& z_j, std::span<const LatentVector> next,
                             double beta_j, double beta_next);

// (1 / 2 sigma^2) ||v_hat - v_target||^2.
double kde_loss(const Eigen::VectorXd& v_hat, const Eigen::VectorXd& v_target, double sigma);

// Single explicit Euler update z + (beta_next - beta_j) * v(z, beta_j);
// the result is tagged with beta_next.
LatentVector euler_step(const nn::Mlp& field, const LatentVector& z, double beta_j,
                        double beta_next);

// Joint reconstruction training of encoder and inverse map over every grid
// in the dataset (trajectory grids and conditional samples alike); loss is
// the mean over samples of the squared reconstruction norm.
TrainStats train_encoder(ModelBundle& b, const Dataset& data);

// Fits the vector field to the averaged transition slopes under the KDE
// loss; inputs are (z, beta) concatenations.
TrainStats train_field(ModelBundle& b, const Dataset& data);

// Lower-level fit on explicit (input, slope-target) pairs, one per column.
nn::Mlp fit_field(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& targets,
                  const FlowHyper& hyper, TrainStats* stats = nullptr);

// Trains the projector on (encoded latent, beta) -> grid pairs with loss
// ||x_hat - x||^2 + lambda |H(x_hat) - H(x)|, the Hamiltonian evaluated on
// the tanh-relaxed output so gradients flow through it; binarization happens
// only at decode time.
TrainStats train_projector(ModelBundle& b, const Dataset& data);

// Fraction of sites whose sign survives the inverse_map(encoder(x)) round
// trip, over a pool of grids.
double autoencoder_sign_accuracy(const ModelBundle& b, std::span<const SpinGrid> grids);

SpinGrid decode_learned(const ModelBundle& b, const LatentVector& z, double beta);

// Binarizes through the inverse map's linear readout, then applies `steps`
// Metropolis sweeps at the target beta.
SpinGrid decode_mh(const ModelBundle& b, const LatentVector& z, double beta, int steps,
                   RngStream& rng);

enum class Decoder { ptheta, mh10, mh15 };
Decoder decoder_from_string(const std::string& name);
std::string decoder_name(Decoder d);

// Autoregressive generation: encode -> Euler step -> decode for each
// consecutive beta pair, re-encoding the decoded grid each step.
Trajectory generate_trajectory(const ModelBundle& b, const SpinGrid& x0,
                               const CoolingSchedule& schedule, Decoder decoder,
                               RngStream& rng);

// Lockstep batched variant; trajectory t draws from rng.substream(t).
std::vector<Trajectory> generate_trajectories(const ModelBundle& b,
                                              std::span<const SpinGrid> starts,
                                              const CoolingSchedule& schedule,
                                              Decoder decoder, RngStream& rng);

// One model file per trained component plus a JSON sidecar carrying the
// hyperparameters, dataset fingerprint, and per-stage final losses.
void save_bundle(const ModelBundle& b, const std::filesystem::path& dir,
                 const std::string& dataset_fingerprint,
                 const std::map<std::string, double>& stage_losses);
ModelBundle load_bundle(const std::filesystem::path& dir);

}  // namespace ising::flow

#endif  // ISING_FLOW_HPP

#ifndef ISING_DATASET_HPP
#define ISING_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ising/lattice.hpp"
#include "ising/montecarlo.hpp"
#include "ising/trajectory.hpp"

namespace ising {

// Per-temperature observables over a pool of samples (population variances):
//   E = <H>/N^2, m = <|M|>/N^2, C_v = beta^2 Var(H)/N^2, chi = beta Var(M)/N^2.
struct ObservableRecord {
  double temperature = 0.0;
  double e = 0.0;
  double m = 0.0;
  std::optional<double> cv;   // absent when fewer than 2 samples
  std::optional<double> chi;  // absent when fewer than 2 samples
  int n_samples = 0;
};

ObservableRecord compute_observables(std::span<const SpinGrid> samples, double beta,
                                     const CouplingParams& cp = {});

struct ConditionalSamples {
  std::vector<SpinGrid> grids;
  std::vector<bool> converged;  // per-sample flag
};

// k_count independent sign-constrained Wolff equilibrations of copies of g
// at beta_next, each drawing from its own substream of base.
ConditionalSamples conditional_samples(const SpinGrid& g, double beta_next, int k_count,
                                       const EquilibrationConfig& cfg,
                                       const CouplingParams& cp, const RngStream& base);

struct DatasetManifest {
  int n = 32;
  double t_max = 5.0;
  double t_min = 1.0;
  int d = 20;
  int k = 40;       // conditional samples per transition
  int n_traj = 0;   // 0 = default by size (64 below n = 64, else 32)
  std::uint64_t seed = 0;
  int format_version = 1;
};

struct BuildSummary {
  int equilibrations = 0;
  int non_converged = 0;
};

// Generates n_traj annealing trajectories with conditional samples, writes
// the directory tree (trajectories/traj_<i>/grid_<j>.bin and cond_<j>/k_<k>.bin),
// the pooled per-temperature observables.csv, and manifest.json last as a
// commit marker. Deterministic under (manifest.seed); parallel across
// trajectories when threads > 1.
BuildSummary build_dataset(const std::filesystem::path& dir, const DatasetManifest& m,
                           const EquilibrationConfig& cfg, int threads = 1);

struct Dataset {
  DatasetManifest manifest;
  CoolingSchedule schedule;
  std::vector<Trajectory> trajectories;
};

Dataset load_dataset(const std::filesystem::path& dir);
DatasetManifest load_manifest(const std::filesystem::path& dir);

// Pooled records, one per schedule point. Samples at temperature index jj
// are the trajectory grids at jj plus, when requested, the conditional
// samples targeting jj (i.e. conditional[jj-1]).
std::vector<ObservableRecord> observables_over_trajectories(
    std::span<const Trajectory> trajectories, const CoolingSchedule& schedule,
    bool include_conditional, const CouplingParams& cp = {});

std::vector<ObservableRecord> dataset_observables(const Dataset& data);

// CSV with header T,E,m,Cv,chi,n_samples; floats at 10 significant digits.
void write_observables_csv(const std::filesystem::path& path,
                           std::span<const ObservableRecord> records);

// Writes a trajectory tree without generating anything (used for predicted
// trajectories; conditional samples are written only when manifest.k > 0).
void write_trajectory_tree(const std::filesystem::path& dir, const DatasetManifest& m,
                           std::span<const Trajectory> trajectories);

// FNV-1a fingerprint of a file's bytes as fixed-width hex.
std::string file_fingerprint(const std::filesystem::path& path);

}  // namespace ising

#endif  // ISING_DATASET_HPP

#ifndef ISING_MONTECARLO_HPP
#define ISING_MONTECARLO_HPP

#include "ising/lattice.hpp"
#include "ising/rng.hpp"
#include "ising/trajectory.hpp"

namespace ising {

struct EquilibrationConfig {
  double epsilon = 0.05;  // relative tolerance on the windowed energy
  int window = 16;        // trailing samples averaged for the estimate
  int max_steps = 50000;  // hard cap on cluster updates
};

struct WolffInfo {
  int cluster_size = 0;
  bool flipped = false;
  double delta_h = 0.0;   // energy change actually applied (J = 1 units)
  long long delta_m = 0;  // magnetization change actually applied
};

// One Metropolis pass: every site visited exactly once in a fresh random
// order; a flip is accepted when dE <= 0, otherwise with prob exp(-beta dE).
void metropolis_sweep(SpinGrid& g, double beta, RngStream& rng);

// Single Wolff update: seed a cluster at a uniform random site, grow it
// across aligned bonds with probability 1 - exp(-2 beta), flip it whole.
WolffInfo wolff_step(SpinGrid& g, double beta, RngStream& rng);

// Wolff update that rejects flips inverting the sign of the total
// magnetization (nonzero to opposite nonzero); M = 0 accepts any outcome.
WolffInfo wolff_step_sign_constrained(SpinGrid& g, double beta, RngStream& rng);

struct EquilibrateResult {
  bool converged = false;
  int steps = 0;
  double windowed_energy = 0.0;  // trailing-window mean of H per site
};

// Sign-constrained Wolff until the trailing-window mean of H/N^2 is within
// cfg.epsilon relative of the exact internal energy at beta, or until
// cfg.max_steps. Non-convergence is reported through the flag, never silent.
EquilibrateResult equilibrate(SpinGrid& g, double beta, const EquilibrationConfig& cfg,
                              const CouplingParams& cp, RngStream& rng);

// Sequential equilibration along a hot-to-cold schedule starting from a
// uniform random grid; records one grid per schedule point. Conditional
// samples are not filled here.
Trajectory anneal_trajectory(const CoolingSchedule& schedule, int n,
                             const EquilibrationConfig& cfg, const CouplingParams& cp,
                             RngStream& rng);

}  // namespace ising

#endif  // ISING_MONTECARLO_HPP

#include "ising/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "ising/onsager.hpp"

namespace ising {

namespace {

inline int wrap_up(int i, int n) { return i < n ? i + n * (n - 1) : i - n; }
inline int wrap_down(int i, int n) { return i >= n * (n - 1) ? i - n * (n - 1) : i + n; }
inline int wrap_left(int i, int n) { return i % n == 0 ? i + n - 1 : i - 1; }
inline int wrap_right(int i, int n) { return (i + 1) % n == 0 ? i - n + 1 : i + 1; }

struct Cluster {
  std::vector<int> sites;
  long long boundary_bond_sum = 0;  // sum of x_i x_j over bonds leaving the cluster
};

// Grows a Wolff cluster from a random seed without flipping it.
Cluster grow_cluster(const SpinGrid& g, double beta, RngStream& rng) {
  const int n = g.n;
  const int nsites = n * n;
  const double p_add = 1.0 - std::exp(-2.0 * beta);

  std::vector<std::uint8_t> in_cluster(static_cast<std::size_t>(nsites), 0);
  Cluster c;
  c.sites.reserve(64);

  const int seed = rng.next_below(nsites);
  const std::int8_t cluster_spin = g.spins[static_cast<std::size_t>(seed)];
  in_cluster[static_cast<std::size_t>(seed)] = 1;
  c.sites.push_back(seed);

  std::vector<int> stack;
  stack.push_back(seed);
  int nb[4];
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    nb[0] = wrap_up(i, n);
    nb[1] = wrap_down(i, n);
    nb[2] = wrap_left(i, n);
    nb[3] = wrap_right(i, n);
    for (int d = 0; d < 4; ++d) {
      const int k = nb[d];
      if (in_cluster[static_cast<std::size_t>(k)]) continue;
      if (g.spins[static_cast<std::size_t>(k)] != cluster_spin) continue;
      if (rng.next_double() < p_add) {
        in_cluster[static_cast<std::size_t>(k)] = 1;
        c.sites.push_back(k);
        stack.push_back(k);
      }
    }
  }

  // Energy change of flipping the cluster comes from bonds crossing its
  // boundary; internal bonds are unaffected.
  for (int i : c.sites) {
    nb[0] = wrap_up(i, n);
    nb[1] = wrap_down(i, n);
    nb[2] = wrap_left(i, n);
    nb[3] = wrap_right(i, n);
    for (int d = 0; d < 4; ++d) {
      const int k = nb[d];
      if (!in_cluster[static_cast<std::size_t>(k)])
        c.boundary_bond_sum += static_cast<long long>(g.spins[static_cast<std::size_t>(i)]) *
                               g.spins[static_cast<std::size_t>(k)];
    }
  }
  return c;
}

void flip_cluster(SpinGrid& g, const Cluster& c) {
  for (int i : c.sites)
    g.spins[static_cast<std::size_t>(i)] =
        static_cast<std::int8_t>(-g.spins[static_cast<std::size_t>(i)]);
}

void check_sampler_args(const SpinGrid& g, double beta) {
  if (!is_valid(g)) throw std::invalid_argument("sampler: invalid grid");
  if (!(beta >= 0.0)) throw std::invalid_argument("sampler: beta must be >= 0");
}

}  // namespace

void metropolis_sweep(SpinGrid& g, double beta, RngStream& rng) {
  check_sampler_args(g, beta);
  const int n = g.n;
  const int nsites = n * n;

  // fresh uniform permutation so each site is visited exactly once
  std::vector<int> order(static_cast<std::size_t>(nsites));
  std::iota(order.begin(), order.end(), 0);
  for (int i = nsites - 1; i > 0; --i)
    std::swap(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(rng.next_below(i + 1))]);

  for (int idx = 0; idx < nsites; ++idx) {
    const int i = order[static_cast<std::size_t>(idx)];
    const int local = g.spins[static_cast<std::size_t>(wrap_up(i, n))] +
                      g.spins[static_cast<std::size_t>(wrap_down(i, n))] +
                      g.spins[static_cast<std::size_t>(wrap_left(i, n))] +
                      g.spins[static_cast<std::size_t>(wrap_right(i, n))];
    const double de = 2.0 * static_cast<double>(g.spins[static_cast<std::size_t>(i)]) * local;
    if (de <= 0.0 || rng.next_double() < std::exp(-beta * de))
      g.spins[static_cast<std::size_t>(i)] =
          static_cast<std::int8_t>(-g.spins[static_cast<std::size_t>(i)]);
  }
}

WolffInfo wolff_step(SpinGrid& g, double beta, RngStream& rng) {
  check_sampler_args(g, beta);
  const Cluster c = grow_cluster(g, beta, rng);
  long long cluster_mag = 0;
  for (int i : c.sites) cluster_mag += g.spins[static_cast<std::size_t>(i)];
  flip_cluster(g, c);
  WolffInfo info;
  info.cluster_size = static_cast<int>(c.sites.size());
  info.flipped = true;
  info.delta_h = 2.0 * static_cast<double>(c.boundary_bond_sum);
  info.delta_m = -2 * cluster_mag;
  return info;
}

WolffInfo wolff_step_sign_constrained(SpinGrid& g, double beta, RngStream& rng) {
  check_sampler_args(g, beta);
  const Cluster c = grow_cluster(g, beta, rng);
  const long long m_before = magnetization(g);
  long long cluster_mag = 0;
  for (int i : c.sites) cluster_mag += g.spins[static_cast<std::size_t>(i)];
  const long long m_after = m_before - 2 * cluster_mag;

  WolffInfo info;
  info.cluster_size = static_cast<int>(c.sites.size());
  const bool inverts_sign = m_before != 0 && m_after != 0 &&
                            ((m_before > 0) != (m_after > 0));
  if (inverts_sign) return info;  // rejected, grid unchanged

  flip_cluster(g, c);
  info.flipped = true;
  info.delta_h = 2.0 * static_cast<double>(c.boundary_bond_sum);
  info.delta_m = m_after - m_before;
  return info;
}

EquilibrateResult equilibrate(SpinGrid& g, double beta, const EquilibrationConfig& cfg,
                              const CouplingParams& cp, RngStream& rng) {
  if (!(beta > 0.0)) throw std::invalid_argument("equilibrate: beta must be > 0");
  if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0))
    throw std::invalid_argument("equilibrate: epsilon must be in (0, 1)");
  if (cfg.window < 1) throw std::invalid_argument("equilibrate: window must be >= 1");
  if (cfg.max_steps < cfg.window)
    throw std::invalid_argument("equilibrate: max_steps must be >= window");
  if (cp.j != 1.0 || cp.h != 0.0)
    throw std::invalid_argument("equilibrate: requires isotropic J = 1, h = 0");

  const double u_exact = internal_energy_exact(beta, cp.j);
  const double inv_sites = 1.0 / static_cast<double>(g.sites());

  double energy = hamiltonian(g, cp);
  std::vector<double> ring(static_cast<std::size_t>(cfg.window), 0.0);

  EquilibrateResult res;
  for (int step = 0; step < cfg.max_steps; ++step) {
    const WolffInfo info = wolff_step_sign_constrained(g, beta, rng);
    energy += info.delta_h;
    ring[static_cast<std::size_t>(step % cfg.window)] = energy * inv_sites;
    res.steps = step + 1;
    if (step + 1 < cfg.window) continue;
    double mean = 0.0;
    for (double e : ring) mean += e;
    mean /= static_cast<double>(cfg.window);
    res.windowed_energy = mean;
    if (std::abs(mean - u_exact) / std::abs(u_exact) < cfg.epsilon) {
      res.converged = true;
      return res;
    }
  }
  return res;
}

Trajectory anneal_trajectory(const CoolingSchedule& schedule, int n,
                             const EquilibrationConfig& cfg, const CouplingParams& cp,
                             RngStream& rng) {
  if (schedule.points() < 1) throw std::invalid_argument("anneal_trajectory: empty schedule");
  Trajectory traj;
  traj.grids.reserve(static_cast<std::size_t>(schedule.points()));
  SpinGrid g = make_random_grid(n, rng);
  for (double beta : schedule.betas) {
    const EquilibrateResult r = equilibrate(g, beta, cfg, cp, rng);
    traj.grids.push_back(g);
    traj.converged.push_back(r.converged);
  }
  return traj;
}

}  // namespace ising

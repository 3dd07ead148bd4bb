#ifndef ISING_TRAJECTORY_HPP
#define ISING_TRAJECTORY_HPP

#include <vector>

#include "ising/lattice.hpp"

namespace ising {

// Temperatures descending linearly from t_max to t_min over d+1 points
// (both endpoints included); betas are the elementwise reciprocals, k_B = 1.
struct CoolingSchedule {
  std::vector<double> temperatures;
  std::vector<double> betas;

  int steps() const { return static_cast<int>(temperatures.size()) - 1; }
  int points() const { return static_cast<int>(temperatures.size()); }
  double spacing() const {
    return temperatures.size() > 1 ? temperatures[0] - temperatures[1] : 0.0;
  }
};

CoolingSchedule make_schedule(double t_max, double t_min, int d);

// One cooling run: a grid per schedule point, plus (when filled by the
// dataset builder) K conditional samples per transition. conditional[j]
// holds grids cooled from grids[j] to beta_{j+1}.
struct Trajectory {
  std::vector<SpinGrid> grids;
  std::vector<std::vector<SpinGrid>> conditional;
  std::vector<bool> converged;  // one flag per schedule point
};

}  // namespace ising

#endif  // ISING_TRAJECTORY_HPP

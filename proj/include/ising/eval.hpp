#ifndef ISING_EVAL_HPP
#define ISING_EVAL_HPP

#include <filesystem>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ising/dataset.hpp"
#include "ising/flow.hpp"
#include "ising/trajectory.hpp"

namespace ising::eval {

struct DeltaStat {
  double mean = 0.0;
  double stdev = 0.0;
};

// Signed per-temperature deltas (predicted - ground truth), aggregated as
// mean +/- population std across schedule points.
struct MethodReport {
  std::string method;
  int n = 0;
  DeltaStat de, dm, dcv, dchi;
  double time_mean = std::numeric_limits<double>::quiet_NaN();
  double time_std = std::numeric_limits<double>::quiet_NaN();
};

// Autoregressive Metropolis baseline: at every schedule point applies
// exactly steps_per_temp sweeps to the previous grid, no equilibration
// criterion. steps_per_temp = 0 repeats the initial grid.
Trajectory baseline_mc15(const SpinGrid& x0, const CoolingSchedule& schedule,
                         int steps_per_temp, RngStream& rng);

// Per-temperature observable curves from predicted trajectories (grids only).
std::vector<ObservableRecord> trajectories_observables(std::span<const Trajectory> trajectories,
                                                       const CoolingSchedule& schedule);

// Deltas between two observable curves on the same schedule; throws on a
// schedule mismatch. cv/chi deltas skip points where either side lacks them.
MethodReport compare_observables(const std::string& method,
                                 std::span<const ObservableRecord> predicted,
                                 std::span<const ObservableRecord> ground_truth);

struct TcEstimate {
  double t_c = 0.0;
  double uncertainty = 0.0;  // one schedule spacing
  bool has_peak = false;
};

// Temperature of the susceptibility maximum; requires chi on at least five
// points. A flat curve or an endpoint maximum reports has_peak = false.
TcEstimate estimate_tc(std::span<const ObservableRecord> observables);

struct TimingResult {
  double mean_s = 0.0;
  double std_s = 0.0;
  int reps = 0;
};

// Wall-clock per cooling trajectory, model loading and I/O excluded.
// Ground truth is the full sequential equilibration under the epsilon
// criterion; the flow pipeline is timed over lockstep batched generation
// (mean per trajectory), mirroring how it runs in practice.
TimingResult time_gt_trajectory(int n, const CoolingSchedule& schedule,
                                const EquilibrationConfig& cfg, std::uint64_t seed, int reps);
TimingResult time_mc_trajectory(int n, const CoolingSchedule& schedule, int steps_per_temp,
                                std::uint64_t seed, int reps);
TimingResult time_flow_trajectories(const flow::ModelBundle& bundle,
                                    const CoolingSchedule& schedule,
                                    std::span<const SpinGrid> starts, flow::Decoder decoder,
                                    std::uint64_t seed, int reps);

// CSV with header method,n,dE_mean,dE_std,dm_mean,dm_std,dcv_mean,dcv_std,
// dchi_mean,dchi_std,time_mean,time_std.
void write_report_csv(const std::filesystem::path& path, std::span<const MethodReport> rows);
void print_report(std::span<const MethodReport> rows);

}  // namespace ising::eval

#endif  // ISING_EVAL_HPP

#include "ising/eval.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "ising/montecarlo.hpp"

namespace ising::eval {

namespace {

DeltaStat aggregate(const std::vector<double>& deltas) {
  DeltaStat s;
  if (deltas.empty()) {
    s.mean = std::numeric_limits<double>::quiet_NaN();
    s.stdev = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  for (double d : deltas) s.mean += d;
  s.mean /= static_cast<double>(deltas.size());
  for (double d : deltas) s.stdev += (d - s.mean) * (d - s.mean);
  s.stdev = std::sqrt(s.stdev / static_cast<double>(deltas.size()));
  return s;
}

TimingResult summarize_times(const std::vector<double>& seconds) {
  TimingResult r;
  r.reps = static_cast<int>(seconds.size());
  for (double t : seconds) r.mean_s += t;
  r.mean_s /= static_cast<double>(seconds.size());
  for (double t : seconds) r.std_s += (t - r.mean_s) * (t - r.mean_s);
  r.std_s = std::sqrt(r.std_s / static_cast<double>(seconds.size()));
  return r;
}

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string fmt10(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

}  // namespace

Trajectory baseline_mc15(const SpinGrid& x0, const CoolingSchedule& schedule,
                         int steps_per_temp, RngStream& rng) {
  if (steps_per_temp < 0)
    throw std::invalid_argument("baseline_mc15: steps_per_temp must be >= 0");
  Trajectory traj;
  SpinGrid g = x0;
  for (double beta : schedule.betas) {
    for (int s = 0; s < steps_per_temp; ++s) metropolis_sweep(g, beta, rng);
    traj.grids.push_back(g);
  }
  return traj;
}

std::vector<ObservableRecord> trajectories_observables(std::span<const Trajectory> trajectories,
                                                       const CoolingSchedule& schedule) {
  return observables_over_trajectories(trajectories, schedule, false);
}

MethodReport compare_observables(const std::string& method,
                                 std::span<const ObservableRecord> predicted,
                                 std::span<const ObservableRecord> ground_truth) {
  if (predicted.size() != ground_truth.size() || predicted.empty())
    throw std::invalid_argument("compare_observables: schedule size mismatch");
  std::vector<double> de, dm, dcv, dchi;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (std::abs(predicted[i].temperature - ground_truth[i].temperature) > 1e-9)
      throw std::invalid_argument("compare_observables: schedules do not match");
    de.push_back(predicted[i].e - ground_truth[i].e);
    dm.push_back(predicted[i].m - ground_truth[i].m);
    if (predicted[i].cv && ground_truth[i].cv)
      dcv.push_back(*predicted[i].cv - *ground_truth[i].cv);
    if (predicted[i].chi && ground_truth[i].chi)
      dchi.push_back(*predicted[i].chi - *ground_truth[i].chi);
  }
  MethodReport rep;
  rep.method = method;
  rep.de = aggregate(de);
  rep.dm = aggregate(dm);
  rep.dcv = aggregate(dcv);
  rep.dchi = aggregate(dchi);
  return rep;
}

TcEstimate estimate_tc(std::span<const ObservableRecord> observables) {
  std::vector<std::pair<double, double>> chi_points;  // (T, chi)
  for (const auto& r : observables)
    if (r.chi) chi_points.emplace_back(r.temperature, *r.chi);
  if (chi_points.size() < 5)
    throw std::invalid_argument("estimate_tc: need chi on at least 5 schedule points");

  std::size_t peak = 0;
  double chi_min = chi_points[0].second, chi_max = chi_points[0].second;
  for (std::size_t i = 1; i < chi_points.size(); ++i) {
    if (chi_points[i].second > chi_points[peak].second) peak = i;
    chi_min = std::min(chi_min, chi_points[i].second);
    chi_max = std::max(chi_max, chi_points[i].second);
  }

  TcEstimate est;
  est.t_c = chi_points[peak].first;
  est.uncertainty = std::abs(chi_points[0].first - chi_points[1].first);
  const bool flat = chi_max - chi_min <= 1e-12 * std::max(1.0, std::abs(chi_max));
  const bool interior = peak > 0 && peak + 1 < chi_points.size();
  est.has_peak = interior && !flat;
  return est;
}

TimingResult time_gt_trajectory(int n, const CoolingSchedule& schedule,
                                const EquilibrationConfig& cfg, std::uint64_t seed, int reps) {
  if (reps < 3) throw std::invalid_argument("timing: reps must be >= 3");
  const CouplingParams cp{};
  std::vector<double> times;
  for (int r = 0; r < reps; ++r) {
    RngStream rng(seed, static_cast<std::uint64_t>(r));
    const double t0 = now_seconds();
    volatile double sink = hamiltonian(
        anneal_trajectory(schedule, n, cfg, cp, rng).grids.back());
    (void)sink;
    times.push_back(now_seconds() - t0);
  }
  return summarize_times(times);
}

TimingResult time_mc_trajectory(int n, const CoolingSchedule& schedule, int steps_per_temp,
                                std::uint64_t seed, int reps) {
  if (reps < 3) throw std::invalid_argument("timing: reps must be >= 3");
  std::vector<double> times;
  for (int r = 0; r < reps; ++r) {
    RngStream rng(seed, static_cast<std::uint64_t>(r));
    SpinGrid x0 = make_random_grid(n, rng);
    const double t0 = now_seconds();
    volatile double sink =
        hamiltonian(baseline_mc15(x0, schedule, steps_per_temp, rng).grids.back());
    (void)sink;
    times.push_back(now_seconds() - t0);
  }
  return summarize_times(times);
}

TimingResult time_flow_trajectories(const flow::ModelBundle& bundle,
                                    const CoolingSchedule& schedule,
                                    std::span<const SpinGrid> starts, flow::Decoder decoder,
                                    std::uint64_t seed, int reps) {
  if (reps < 3) throw std::invalid_argument("timing: reps must be >= 3");
  if (starts.empty()) throw std::invalid_argument("timing: need start grids");
  std::vector<double> per_traj;
  for (int r = 0; r < reps; ++r) {
    RngStream rng(seed, static_cast<std::uint64_t>(r));
    const double t0 = now_seconds();
    const auto out = flow::generate_trajectories(bundle, starts, schedule, decoder, rng);
    const double elapsed = now_seconds() - t0;
    volatile double sink = hamiltonian(out.back().grids.back());
    (void)sink;
    per_traj.push_back(elapsed / static_cast<double>(starts.size()));
  }
  return summarize_times(per_traj);
}

void write_report_csv(const std::filesystem::path& path, std::span<const MethodReport> rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("write_report_csv: cannot open " + path.string());
  out << "method,n,dE_mean,dE_std,dm_mean,dm_std,dcv_mean,dcv_std,"
         "dchi_mean,dchi_std,time_mean,time_std\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.n << ',' << fmt10(r.de.mean) << ',' << fmt10(r.de.stdev)
        << ',' << fmt10(r.dm.mean) << ',' << fmt10(r.dm.stdev) << ',' << fmt10(r.dcv.mean)
        << ',' << fmt10(r.dcv.stdev) << ',' << fmt10(r.dchi.mean) << ','
        << fmt10(r.dchi.stdev) << ',' << fmt10(r.time_mean) << ',' << fmt10(r.time_std)
        << '\n';
  }
}

void print_report(std::span<const MethodReport> rows) {
  std::printf("%-8s %4s %22s %22s %22s %22s %18s\n", "method", "n", "dE", "dm", "dCv",
              "dchi", "time [s]");
  for (const auto& r : rows) {
    std::printf("%-8s %4d %10.4g +/- %-8.4g %10.4g +/- %-8.4g %10.4g +/- %-8.4g "
                "%10.4g +/- %-8.4g %8.4g +/- %-6.4g\n",
                r.method.c_str(), r.n, r.de.mean, r.de.stdev, r.dm.mean, r.dm.stdev,
                r.dcv.mean, r.dcv.stdev, r.dchi.mean, r.dchi.stdev, r.time_mean,
                r.time_std);
  }
}

}  // namespace ising::eval

#include "ising/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

namespace ising {

namespace {

using ordered_json = nlohmann::ordered_json;

// stream-id layout: trajectory i anneals on stream i << 20; the conditional
// block for transition j uses base stream (i << 20) | (j + 1) << 10
std::uint64_t traj_stream(int i) { return static_cast<std::uint64_t>(i) << 20; }
std::uint64_t cond_stream(int i, int j) {
  return (static_cast<std::uint64_t>(i) << 20) | (static_cast<std::uint64_t>(j + 1) << 10);
}

std::string fmt10(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

int resolved_n_traj(const DatasetManifest& m) {
  if (m.n_traj > 0) return m.n_traj;
  return m.n >= 64 ? 32 : 64;
}

void validate_manifest(const DatasetManifest& m) {
  if (m.n < 8 || m.n % 2 != 0)
    throw std::invalid_argument("dataset: n must be even and >= 8");
  if (!(m.t_max > m.t_min) || !(m.t_min > 0.0))
    throw std::invalid_argument("dataset: need t_max > t_min > 0");
  if (m.d < 1) throw std::invalid_argument("dataset: d must be >= 1");
  if (m.k < 0) throw std::invalid_argument("dataset: k must be >= 0");
}

}  // namespace

CoolingSchedule make_schedule(double t_max, double t_min, int d) {
  if (!(t_max > t_min) || !(t_min > 0.0))
    throw std::invalid_argument("make_schedule: need t_max > t_min > 0");
  if (d < 1) throw std::invalid_argument("make_schedule: d must be >= 1");
  CoolingSchedule s;
  s.temperatures.resize(static_cast<std::size_t>(d) + 1);
  s.betas.resize(static_cast<std::size_t>(d) + 1);
  for (int i = 0; i <= d; ++i) {
    const double t = t_max + (t_min - t_max) * (static_cast<double>(i) / d);
    s.temperatures[static_cast<std::size_t>(i)] = t;
    s.betas[static_cast<std::size_t>(i)] = 1.0 / t;
  }
  s.temperatures.back() = t_min;  // exact endpoint
  s.betas.back() = 1.0 / t_min;
  return s;
}

ObservableRecord compute_observables(std::span<const SpinGrid> samples, double beta,
                                     const CouplingParams& cp) {
  if (samples.empty())
    throw std::invalid_argument("compute_observables: need at least one sample");
  if (!(beta > 0.0)) throw std::invalid_argument("compute_observables: beta must be > 0");
  const double sites = static_cast<double>(samples[0].sites());
  const auto count = static_cast<double>(samples.size());

  double mean_h = 0.0, mean_abs_m = 0.0, mean_m = 0.0;
  std::vector<double> hs(samples.size());
  std::vector<double> ms(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].n != samples[0].n)
      throw std::invalid_argument("compute_observables: mixed lattice sizes");
    hs[i] = hamiltonian(samples[i], cp);
    ms[i] = static_cast<double>(magnetization(samples[i]));
    mean_h += hs[i];
    mean_abs_m += std::abs(ms[i]);
    mean_m += ms[i];
  }
  mean_h /= count;
  mean_abs_m /= count;
  mean_m /= count;

  ObservableRecord rec;
  rec.temperature = 1.0 / beta;
  rec.e = mean_h / sites;
  rec.m = mean_abs_m / sites;
  rec.n_samples = static_cast<int>(samples.size());
  if (samples.size() >= 2) {
    double var_h = 0.0, var_m = 0.0;  // population variance, two-pass
    for (std::size_t i = 0; i < samples.size(); ++i) {
      var_h += (hs[i] - mean_h) * (hs[i] - mean_h);
      var_m += (ms[i] - mean_m) * (ms[i] - mean_m);
    }
    var_h /= count;
    var_m /= count;
    rec.cv = beta * beta * var_h / sites;
    rec.chi = beta * var_m / sites;
  }
  return rec;
}

ConditionalSamples conditional_samples(const SpinGrid& g, double beta_next, int k_count,
                                       const EquilibrationConfig& cfg,
                                       const CouplingParams& cp, const RngStream& base) {
  if (k_count < 1) throw std::invalid_argument("conditional_samples: k_count must be >= 1");
  ConditionalSamples out;
  out.grids.reserve(static_cast<std::size_t>(k_count));
  out.converged.reserve(static_cast<std::size_t>(k_count));
  for (int k = 0; k < k_count; ++k) {
    SpinGrid sample = g;
    RngStream rng = base.substream(static_cast<std::uint64_t>(k));
    const EquilibrateResult r = equilibrate(sample, beta_next, cfg, cp, rng);
    out.grids.push_back(std::move(sample));
    out.converged.push_back(r.converged);
  }
  return out;
}

std::vector<ObservableRecord> observables_over_trajectories(
    std::span<const Trajectory> trajectories, const CoolingSchedule& schedule,
    bool include_conditional, const CouplingParams& cp) {
  if (trajectories.empty())
    throw std::invalid_argument("observables_over_trajectories: no trajectories");
  std::vector<ObservableRecord> records;
  records.reserve(static_cast<std::size_t>(schedule.points()));
  for (int jj = 0; jj < schedule.points(); ++jj) {
    std::vector<SpinGrid> pool;
    for (const Trajectory& t : trajectories) {
      pool.push_back(t.grids.at(static_cast<std::size_t>(jj)));
      if (include_conditional && jj > 0 &&
          static_cast<std::size_t>(jj - 1) < t.conditional.size()) {
        for (const SpinGrid& s : t.conditional[static_cast<std::size_t>(jj - 1)])
          pool.push_back(s);
      }
    }
    records.push_back(
        compute_observables(pool, schedule.betas[static_cast<std::size_t>(jj)], cp));
  }
  return records;
}

std::vector<ObservableRecord> dataset_observables(const Dataset& data) {
  return observables_over_trajectories(data.trajectories, data.schedule, true);
}

void write_observables_csv(const std::filesystem::path& path,
                           std::span<const ObservableRecord> records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("write_observables_csv: cannot open " + path.string());
  out << "T,E,m,Cv,chi,n_samples\n";
  for (const auto& r : records) {
    out << fmt10(r.temperature) << ',' << fmt10(r.e) << ',' << fmt10(r.m) << ','
        << fmt10(r.cv.value_or(std::nan(""))) << ',' << fmt10(r.chi.value_or(std::nan("")))
        << ',' << r.n_samples << '\n';
  }
  if (!out) throw std::runtime_error("write_observables_csv: write failed");
}

namespace {

ordered_json manifest_json(const DatasetManifest& m) {
  ordered_json j;
  j["n"] = m.n;
  j["schedule"] = {{"t_max", m.t_max}, {"t_min", m.t_min}, {"d", m.d}};
  j["K"] = m.k;
  j["n_traj"] = m.n_traj;
  j["seed"] = m.seed;
  j["format_version"] = m.format_version;
  return j;
}

void write_one_trajectory(const std::filesystem::path& tdir, const Trajectory& t, int k) {
  std::filesystem::create_directories(tdir);
  for (std::size_t j = 0; j < t.grids.size(); ++j)
    write_grid(t.grids[j], tdir / ("grid_" + std::to_string(j) + ".bin"));
  if (k > 0) {
    for (std::size_t j = 0; j < t.conditional.size(); ++j) {
      const auto cdir = tdir / ("cond_" + std::to_string(j));
      std::filesystem::create_directories(cdir);
      for (std::size_t kk = 0; kk < t.conditional[j].size(); ++kk)
        write_grid(t.conditional[j][kk], cdir / ("k_" + std::to_string(kk) + ".bin"));
    }
  }
}

}  // namespace

void write_trajectory_tree(const std::filesystem::path& dir, const DatasetManifest& m,
                           std::span<const Trajectory> trajectories) {
  std::filesystem::create_directories(dir / "trajectories");
  for (std::size_t i = 0; i < trajectories.size(); ++i)
    write_one_trajectory(dir / "trajectories" / ("traj_" + std::to_string(i)),
                         trajectories[i], m.k);
  const CoolingSchedule schedule = make_schedule(m.t_max, m.t_min, m.d);
  write_observables_csv(dir / "observables.csv",
                        observables_over_trajectories(trajectories, schedule, m.k > 0));
  // manifest last: its presence marks a complete tree
  std::ofstream out(dir / "manifest.json", std::ios::trunc);
  if (!out) throw std::runtime_error("write_trajectory_tree: cannot write manifest");
  out << manifest_json(m).dump(2) << '\n';
}

BuildSummary build_dataset(const std::filesystem::path& dir, const DatasetManifest& m_in,
                           const EquilibrationConfig& cfg, int threads) {
  DatasetManifest m = m_in;
  validate_manifest(m);
  m.n_traj = resolved_n_traj(m);
  const CoolingSchedule schedule = make_schedule(m.t_max, m.t_min, m.d);
  const CouplingParams cp{};

  std::vector<Trajectory> trajectories(static_cast<std::size_t>(m.n_traj));
  std::vector<int> equil_count(static_cast<std::size_t>(m.n_traj), 0);
  std::vector<int> bad_count(static_cast<std::size_t>(m.n_traj), 0);
  const int nworkers = std::max(1, std::min(threads, m.n_traj));

  auto worker = [&](int first, int stride) {
    for (int i = first; i < m.n_traj; i += stride) {
      RngStream rng(m.seed, traj_stream(i));
      Trajectory t = anneal_trajectory(schedule, m.n, cfg, cp, rng);
      int& total = equil_count[static_cast<std::size_t>(i)];
      int& bad = bad_count[static_cast<std::size_t>(i)];
      for (bool ok : t.converged) {
        ++total;
        if (!ok) ++bad;
      }
      t.conditional.resize(static_cast<std::size_t>(schedule.steps()));
      for (int j = 0; j < schedule.steps() && m.k > 0; ++j) {
        ConditionalSamples cs = conditional_samples(
            t.grids[static_cast<std::size_t>(j)],
            schedule.betas[static_cast<std::size_t>(j + 1)], m.k, cfg, cp,
            RngStream(m.seed, cond_stream(i, j)));
        t.conditional[static_cast<std::size_t>(j)] = std::move(cs.grids);
        for (bool ok : cs.converged) {
          ++total;
          if (!ok) ++bad;
        }
      }
      trajectories[static_cast<std::size_t>(i)] = std::move(t);
    }
  };

  if (nworkers == 1) {
    worker(0, 1);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(nworkers));
    for (int w = 0; w < nworkers; ++w) pool.emplace_back(worker, w, nworkers);
    for (auto& th : pool) th.join();
  }

  BuildSummary summary;
  for (int i = 0; i < m.n_traj; ++i) {
    summary.equilibrations += equil_count[static_cast<std::size_t>(i)];
    summary.non_converged += bad_count[static_cast<std::size_t>(i)];
  }

  write_trajectory_tree(dir, m, trajectories);
  return summary;
}

DatasetManifest load_manifest(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw std::runtime_error("load_manifest: missing manifest in " + dir.string());
  ordered_json j = ordered_json::parse(in);
  DatasetManifest m;
  m.n = j.at("n").get<int>();
  m.t_max = j.at("schedule").at("t_max").get<double>();
  m.t_min = j.at("schedule").at("t_min").get<double>();
  m.d = j.at("schedule").at("d").get<int>();
  m.k = j.at("K").get<int>();
  m.n_traj = j.at("n_traj").get<int>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.format_version = j.at("format_version").get<int>();
  if (m.format_version != 1)
    throw std::runtime_error("load_manifest: unsupported format_version");
  return m;
}

Dataset load_dataset(const std::filesystem::path& dir) {
  Dataset data;
  data.manifest = load_manifest(dir);
  data.schedule = make_schedule(data.manifest.t_max, data.manifest.t_min, data.manifest.d);

  data.trajectories.resize(static_cast<std::size_t>(data.manifest.n_traj));
  for (int i = 0; i < data.manifest.n_traj; ++i) {
    const auto tdir = dir / "trajectories" / ("traj_" + std::to_string(i));
    Trajectory& t = data.trajectories[static_cast<std::size_t>(i)];
    for (int jj = 0; jj <= data.manifest.d; ++jj)
      t.grids.push_back(read_grid(tdir / ("grid_" + std::to_string(jj) + ".bin"),
                                  data.manifest.n));
    if (data.manifest.k > 0) {
      t.conditional.resize(static_cast<std::size_t>(data.manifest.d));
      for (int jj = 0; jj < data.manifest.d; ++jj) {
        const auto cdir = tdir / ("cond_" + std::to_string(jj));
        for (int kk = 0; kk < data.manifest.k; ++kk)
          t.conditional[static_cast<std::size_t>(jj)].push_back(
              read_grid(cdir / ("k_" + std::to_string(kk) + ".bin"), data.manifest.n));
      }
    }
  }
  return data;
}

std::string file_fingerprint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("file_fingerprint: cannot open " + path.string());
  std::uint64_t hash = 0xcbf29ce484222325ull;
  char c;
  while (in.get(c)) {
    hash ^= static_cast<std::uint8_t>(c);
    hash *= 0x100000001b3ull;
  }
  char buf[20];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

}  // namespace ising

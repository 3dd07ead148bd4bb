#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <fstream>

#include "ising/dataset.hpp"
#include "ising/onsager.hpp"

using namespace ising;

namespace {

std::filesystem::path temp_dir(const char* tag) {
  auto p = std::filesystem::temp_directory_path() / (std::string("ising_ds_") + tag);
  std::filesystem::remove_all(p);
  return p;
}

std::vector<char> slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// byte comparison of two directory trees
void check_trees_identical(const std::filesystem::path& a, const std::filesystem::path& b) {
  std::vector<std::filesystem::path> rel;
  for (const auto& e : std::filesystem::recursive_directory_iterator(a))
    if (e.is_regular_file()) rel.push_back(std::filesystem::relative(e.path(), a));
  std::sort(rel.begin(), rel.end());
  REQUIRE_FALSE(rel.empty());
  std::size_t b_files = 0;
  for (const auto& e : std::filesystem::recursive_directory_iterator(b))
    if (e.is_regular_file()) ++b_files;
  CHECK(b_files == rel.size());
  for (const auto& r : rel) CHECK(slurp(a / r) == slurp(b / r));
}

}  // namespace

TEST_CASE("make_schedule: exact arithmetic spacing and reciprocals") {
  const CoolingSchedule s = make_schedule(5.0, 1.0, 4);
  CHECK(s.temperatures == std::vector<double>{5.0, 4.0, 3.0, 2.0, 1.0});
  CHECK(s.betas[0] == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(s.betas[1] == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(s.betas[2] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  CHECK(s.betas[3] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(s.betas[4] == doctest::Approx(1.0).epsilon(1e-15));

  const CoolingSchedule paper = make_schedule(5.0, 1.0, 20);
  CHECK(paper.points() == 21);
  CHECK(paper.spacing() == doctest::Approx(0.2).epsilon(1e-12));
  for (int i = 1; i < paper.points(); ++i) {
    CHECK(paper.temperatures[i] < paper.temperatures[i - 1]);
    CHECK(paper.betas[i] > paper.betas[i - 1]);
  }
}

TEST_CASE("make_schedule: degenerate ranges are rejected") {
  CHECK_THROWS_AS(make_schedule(1.0, 1.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(make_schedule(1.0, 5.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(make_schedule(5.0, 0.0, 4), std::invalid_argument);
  CHECK_THROWS_AS(make_schedule(5.0, 1.0, 0), std::invalid_argument);
}

TEST_CASE("observables: identical samples have zero variance") {
  std::vector<SpinGrid> pool(5, make_uniform_grid(6));
  const ObservableRecord r = compute_observables(pool, 0.5);
  CHECK(r.e == doctest::Approx(-2.0));
  CHECK(r.m == doctest::Approx(1.0));
  CHECK(*r.cv == doctest::Approx(0.0));
  CHECK(*r.chi == doctest::Approx(0.0));
  CHECK(r.n_samples == 5);
}

TEST_CASE("observables: single sample leaves variance quantities absent") {
  std::vector<SpinGrid> pool(1, make_uniform_grid(6));
  const ObservableRecord r = compute_observables(pool, 0.5);
  CHECK(r.e == doctest::Approx(-2.0));
  CHECK(r.m == doctest::Approx(1.0));
  CHECK_FALSE(r.cv.has_value());
  CHECK_FALSE(r.chi.has_value());
  CHECK_THROWS_AS(compute_observables({}, 0.5), std::invalid_argument);
}

TEST_CASE("observables: Wolff pool at n=16, T=3 matches the exact energy within 5%") {
  const double beta = 1.0 / 3.0;
  RngStream rng(101, 0);
  SpinGrid g = make_random_grid(16, rng);
  const EquilibrationConfig cfg;
  equilibrate(g, beta, cfg, CouplingParams{}, rng);
  std::vector<SpinGrid> pool;
  for (int s = 0; s < 3000; ++s) {
    wolff_step_sign_constrained(g, beta, rng);
    if (s % 10 == 0) pool.push_back(g);
  }
  const ObservableRecord r = compute_observables(pool, beta);
  const double u = internal_energy_exact(beta);
  CHECK(std::abs(r.e - u) / std::abs(u) < 0.05);
  CHECK(*r.cv >= 0.0);
  CHECK(*r.chi >= 0.0);
  CHECK(r.m <= 1.0);
}

TEST_CASE("conditional samples: single sample, flags, self-consistency") {
  const double beta = 0.5;
  RngStream rng(103, 0);
  SpinGrid g = make_random_grid(12, rng);
  const EquilibrationConfig cfg;
  equilibrate(g, beta, cfg, CouplingParams{}, rng);

  const ConditionalSamples one =
      conditional_samples(g, beta, 1, cfg, CouplingParams{}, RngStream(103, 7));
  CHECK(one.grids.size() == 1);
  CHECK(one.converged.size() == 1);
  CHECK(one.converged[0]);

  // cooling to the same beta: sample energies match the parent distribution
  const ConditionalSamples many =
      conditional_samples(g, beta, 24, cfg, CouplingParams{}, RngStream(103, 8));
  const ObservableRecord r = compute_observables(many.grids, beta);
  const double u = internal_energy_exact(beta);
  CHECK(std::abs(r.e - u) / std::abs(u) < 0.05);
  CHECK_THROWS_AS(conditional_samples(g, beta, 0, cfg, CouplingParams{}, RngStream(1, 1)),
                  std::invalid_argument);
}

TEST_CASE("build_dataset: minimal tree validates and round-trips bit-exactly") {
  const auto dir = temp_dir("minimal");
  DatasetManifest m;
  m.n = 8;
  m.d = 1;
  m.k = 2;
  m.n_traj = 1;
  m.seed = 404;
  const BuildSummary s = build_dataset(dir, m, EquilibrationConfig{});
  CHECK(s.equilibrations == 2 + 2);  // 2 schedule points + 2 conditionals
  CHECK(s.non_converged == 0);
  CHECK(std::filesystem::exists(dir / "manifest.json"));
  CHECK(std::filesystem::exists(dir / "observables.csv"));
  CHECK(std::filesystem::exists(dir / "trajectories/traj_0/grid_0.bin"));
  CHECK(std::filesystem::exists(dir / "trajectories/traj_0/grid_1.bin"));
  CHECK(std::filesystem::exists(dir / "trajectories/traj_0/cond_0/k_1.bin"));

  const Dataset loaded = load_dataset(dir);
  CHECK(loaded.manifest.n == 8);
  CHECK(loaded.manifest.k == 2);
  CHECK(loaded.trajectories.size() == 1);

  // save the loaded dataset again: the grid bytes must be identical
  const auto dir2 = temp_dir("minimal_resave");
  write_trajectory_tree(dir2, loaded.manifest, loaded.trajectories);
  check_trees_identical(dir, dir2);
  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(dir2);
}

TEST_CASE("build_dataset: same seed reproduces the tree byte for byte") {
  DatasetManifest m;
  m.n = 10;
  m.d = 3;
  m.k = 3;
  m.n_traj = 3;
  m.seed = 777;
  const auto a = temp_dir("det_a");
  const auto b = temp_dir("det_b");
  build_dataset(a, m, EquilibrationConfig{}, 1);
  build_dataset(b, m, EquilibrationConfig{}, 2);  // thread count must not matter
  check_trees_identical(a, b);
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
}

TEST_CASE("build_dataset: stored grids respect physical bounds; phases separate") {
  DatasetManifest m;
  m.n = 16;
  m.d = 8;
  m.k = 4;
  m.n_traj = 4;
  m.seed = 2024;
  const auto dir = temp_dir("bounds");
  build_dataset(dir, m, EquilibrationConfig{});
  const Dataset data = load_dataset(dir);
  for (const Trajectory& t : data.trajectories) {
    for (const SpinGrid& g : t.grids) {
      const double e = hamiltonian(g) / g.sites();
      CHECK(e >= -2.0);
      CHECK(e <= 2.0);
      CHECK(std::abs(static_cast<double>(magnetization(g))) / g.sites() <= 1.0);
    }
  }
  const auto obs = dataset_observables(data);
  CHECK(obs.front().temperature == doctest::Approx(5.0));
  CHECK(obs.back().temperature == doctest::Approx(1.0));
  CHECK(obs.back().m > 0.9);   // deep ferromagnetic phase
  CHECK(obs.front().m < 0.3);  // disordered phase (small lattice, loose bound)
  for (const auto& r : obs) {
    CHECK(r.e >= -2.0);
    CHECK(r.e <= 2.0);
    if (r.cv) CHECK(*r.cv >= 0.0);
    if (r.chi) CHECK(*r.chi >= 0.0);
  }
  std::filesystem::remove_all(dir);
}

TEST_CASE("build_dataset: invalid sizes are rejected") {
  DatasetManifest m;
  m.n = 7;
  CHECK_THROWS_AS(build_dataset(temp_dir("bad"), m, EquilibrationConfig{}),
                  std::invalid_argument);
  m.n = 6;
  CHECK_THROWS_AS(build_dataset(temp_dir("bad"), m, EquilibrationConfig{}),
                  std::invalid_argument);
}

TEST_CASE("observables csv: header and 10-significant-digit values") {
  const auto path = std::filesystem::temp_directory_path() / "ising_obs_test.csv";
  ObservableRecord r;
  r.temperature = 2.2691853;
  r.e = -1.2345678901234;
  r.m = 0.5;
  r.cv = 1.0 / 3.0;
  r.chi = 0.125;
  r.n_samples = 12;
  write_observables_csv(path, std::vector<ObservableRecord>{r});
  std::ifstream in(path);
  std::string header, row;
  std::getline(in, header);
  std::getline(in, row);
  CHECK(header == "T,E,m,Cv,chi,n_samples");
  CHECK(row == "2.2691853,-1.23456789,0.5,0.3333333333,0.125,12");
  std::filesystem::remove(path);
}

TEST_CASE("file_fingerprint is stable and content-sensitive") {
  const auto p1 = std::filesystem::temp_directory_path() / "ising_fp_a";
  const auto p2 = std::filesystem::temp_directory_path() / "ising_fp_b";
  std::ofstream(p1) << "alpha";
  std::ofstream(p2) << "alphb";
  CHECK(file_fingerprint(p1) == file_fingerprint(p1));
  CHECK(file_fingerprint(p1) != file_fingerprint(p2));
  CHECK(file_fingerprint(p1).size() == 16);
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

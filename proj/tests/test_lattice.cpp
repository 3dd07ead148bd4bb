#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "ising/lattice.hpp"
#include "support/oracles.hpp"

using namespace ising;

namespace {

std::set<int> as_set(const std::array<int, 4>& a) { return {a.begin(), a.end()}; }

SpinGrid fixed_random_grid(int n, std::uint64_t seed) {
  RngStream rng(seed, 0);
  return make_random_grid(n, rng);
}

}  // namespace

TEST_CASE("neighbors: corner wraparound and interior site") {
  CHECK(as_set(neighbors(0, 4)) == std::set<int>{1, 3, 4, 12});
  CHECK(as_set(neighbors(5, 4)) == std::set<int>{4, 6, 1, 9});
}

TEST_CASE("neighbors: exhaustive Manhattan-distance oracle on n=3") {
  for (int i = 0; i < 9; ++i)
    CHECK(as_set(neighbors(i, 3)) == oracle::manhattan_neighbors(i, 3));
}

TEST_CASE("neighbors: symmetric relation") {
  for (int n : {3, 4, 5}) {
    for (int i = 0; i < n * n; ++i)
      for (int j : neighbors(i, n)) {
        const auto back = neighbors(j, n);
        CHECK(std::count(back.begin(), back.end(), i) == 1);
      }
  }
}

TEST_CASE("neighbors: out-of-range index is a usage error") {
  CHECK_THROWS_AS(neighbors(-1, 4), std::out_of_range);
  CHECK_THROWS_AS(neighbors(16, 4), std::out_of_range);
  CHECK_THROWS_AS(neighbors(0, 1), std::invalid_argument);
}

TEST_CASE("hamiltonian: aligned and checkerboard 4x4") {
  SpinGrid up = make_uniform_grid(4);
  CHECK(hamiltonian(up) == doctest::Approx(-32.0));

  SpinGrid checker = make_uniform_grid(4);
  for (int i = 0; i < 16; ++i)
    checker.spins[i] = ((i / 4 + i % 4) % 2 == 0) ? std::int8_t{+1} : std::int8_t{-1};
  CHECK(hamiltonian(checker) == doctest::Approx(32.0));
}

TEST_CASE("hamiltonian: bond-list oracle on a fixed random 3x3 grid") {
  const SpinGrid g = fixed_random_grid(3, 20240311);
  CHECK(hamiltonian(g) == doctest::Approx(oracle::bond_list_energy(g)).epsilon(1e-12));
  const CouplingParams cp{2.5, 0.7};
  CHECK(hamiltonian(g, cp) ==
        doctest::Approx(oracle::bond_list_energy(g, 2.5, 0.7)).epsilon(1e-12));
}

TEST_CASE("hamiltonian invariances: global flip, cyclic shifts, bounds") {
  const SpinGrid g = fixed_random_grid(6, 77);
  const double e0 = hamiltonian(g);

  SpinGrid flipped = g;
  for (auto& s : flipped.spins) s = static_cast<std::int8_t>(-s);
  CHECK(hamiltonian(flipped) == doctest::Approx(e0));

  SpinGrid shifted = g;  // shift rows down by one, columns right by one
  for (int r = 0; r < g.n; ++r)
    for (int c = 0; c < g.n; ++c)
      shifted.spins[((r + 1) % g.n) * g.n + (c + 1) % g.n] = g.spins[r * g.n + c];
  CHECK(hamiltonian(shifted) == doctest::Approx(e0));

  const double bound = 2.0 * g.sites();
  CHECK(e0 >= -bound);
  CHECK(e0 <= bound);
}

TEST_CASE("magnetization: aligned, balanced, and random sums") {
  CHECK(magnetization(make_uniform_grid(4)) == 16);

  SpinGrid half = make_uniform_grid(4);
  for (int i = 0; i < 8; ++i) half.spins[i] = -1;
  CHECK(magnetization(half) == 0);

  const SpinGrid g = fixed_random_grid(5, 99);
  long long sum = 0;
  for (auto s : g.spins) sum += s;
  CHECK(magnetization(g) == sum);
  CHECK(std::abs(magnetization(g)) <= g.sites());
  CHECK((magnetization(g) - g.sites()) % 2 == 0);
}

TEST_CASE("delta_e: aligned lattice and lone defect") {
  SpinGrid up = make_uniform_grid(4);
  CHECK(delta_e(up, 5) == doctest::Approx(8.0));
  SpinGrid defect = up;
  flip_site(defect, 5);
  CHECK(delta_e(defect, 5) == doctest::Approx(-8.0));
}

TEST_CASE("delta_e matches the global Hamiltonian difference everywhere") {
  const SpinGrid g = fixed_random_grid(4, 4242);
  for (int i = 0; i < g.sites(); ++i) {
    SpinGrid flipped = g;
    flip_site(flipped, i);
    const double direct = hamiltonian(flipped) - hamiltonian(g);
    CHECK(delta_e(g, i) == doctest::Approx(direct).epsilon(1e-9));
  }
}

TEST_CASE("delta_e: errors on bad index and nonzero field") {
  const SpinGrid g = make_uniform_grid(4);
  CHECK_THROWS_AS(delta_e(g, 16), std::out_of_range);
  CHECK_THROWS_AS(delta_e(g, 0, CouplingParams{1.0, 0.5}), std::invalid_argument);
}

TEST_CASE("grid binary files round-trip bit-exactly") {
  const SpinGrid g = fixed_random_grid(8, 5150);
  const auto path = std::filesystem::temp_directory_path() / "ising_grid_roundtrip.bin";
  write_grid(g, path);
  const SpinGrid back = read_grid(path, 8);
  CHECK(back.spins == g.spins);
  CHECK(std::filesystem::file_size(path) == 64);
  CHECK_THROWS(read_grid(path, 6));  // wrong size must not pass silently
  std::filesystem::remove(path);
}

TEST_CASE("is_valid rejects malformed grids") {
  SpinGrid bad;
  bad.n = 4;
  bad.spins.assign(16, 1);
  bad.spins[3] = 0;
  CHECK_FALSE(is_valid(bad));
  bad.spins[3] = 1;
  bad.spins.pop_back();
  CHECK_FALSE(is_valid(bad));
  CHECK(is_valid(make_uniform_grid(4)));
}

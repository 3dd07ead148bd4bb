#ifndef ISING_LATTICE_HPP
#define ISING_LATTICE_HPP

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "ising/rng.hpp"

namespace ising {

// Square lattice of +/-1 spins in row-major order, periodic in both
// directions. Spins are stored as signed bytes: the sampler does integer
// arithmetic on them directly.
struct SpinGrid {
  int n = 0;
  std::vector<std::int8_t> spins;

  int sites() const { return n * n; }
};

struct CouplingParams {
  double j = 1.0;  // ferromagnetic coupling, must be > 0
  double h = 0.0;  // external field
};

SpinGrid make_uniform_grid(int n, std::int8_t value = +1);
SpinGrid make_random_grid(int n, RngStream& rng);

// True when n >= 2, the buffer has n^2 entries and every entry is +/-1.
bool is_valid(const SpinGrid& g);

// Site indices at Manhattan distance 1 from i under periodic wraparound,
// ordered {up, down, left, right}. Throws std::out_of_range on a bad index.
std::array<int, 4> neighbors(int i, int n);

// Total energy  -J/2 sum_i sum_{j in U_i} x_i x_j - h sum_i x_i.
// The double sum visits each bond twice, so each bond contributes -J x_i x_j
// exactly once. Bond and spin sums are accumulated in integers and scaled
// once at the end.
double hamiltonian(const SpinGrid& g, const CouplingParams& cp = {});

// M = sum_i x_i.
long long magnetization(const SpinGrid& g);

// Energy change of flipping site i: 2 J x_i sum_{j in U_i} x_j, evaluated
// locally. Only the h = 0 case is supported; throws otherwise.
double delta_e(const SpinGrid& g, int i, const CouplingParams& cp = {});

void flip_site(SpinGrid& g, int i);

// Raw grid files: n^2 signed bytes (+1/-1), row-major, no header. The
// surrounding manifest carries n.
void write_grid(const SpinGrid& g, const std::filesystem::path& path);
SpinGrid read_grid(const std::filesystem::path& path, int n);

}  // namespace ising

#endif  // ISING_LATTICE_HPP

#include "ising/lattice.hpp"

#include <fstream>
#include <stdexcept>
#include <string>

namespace ising {

SpinGrid make_uniform_grid(int n, std::int8_t value) {
  if (n < 2) throw std::invalid_argument("make_uniform_grid: n must be >= 2");
  if (value != 1 && value != -1)
    throw std::invalid_argument("make_uniform_grid: spin value must be +/-1");
  SpinGrid g;
  g.n = n;
  g.spins.assign(static_cast<std::size_t>(n) * n, value);
  return g;
}

SpinGrid make_random_grid(int n, RngStream& rng) {
  if (n < 2) throw std::invalid_argument("make_random_grid: n must be >= 2");
  SpinGrid g;
  g.n = n;
  g.spins.resize(static_cast<std::size_t>(n) * n);
  for (auto& s : g.spins) s = rng.next_double() < 0.5 ? std::int8_t{-1} : std::int8_t{+1};
  return g;
}

bool is_valid(const SpinGrid& g) {
  if (g.n < 2) return false;
  if (g.spins.size() != static_cast<std::size_t>(g.n) * g.n) return false;
  for (auto s : g.spins)
    if (s != 1 && s != -1) return false;
  return true;
}

std::array<int, 4> neighbors(int i, int n) {
  if (n < 2) throw std::invalid_argument("neighbors: n must be >= 2");
  if (i < 0 || i >= n * n)
    throw std::out_of_range("neighbors: site index " + std::to_string(i) +
                            " outside lattice of " + std::to_string(n * n) + " sites");
  const int row = i / n;
  const int col = i % n;
  const int up = ((row + n - 1) % n) * n + col;
  const int down = ((row + 1) % n) * n + col;
  const int left = row * n + (col + n - 1) % n;
  const int right = row * n + (col + 1) % n;
  return {up, down, left, right};
}

double hamiltonian(const SpinGrid& g, const CouplingParams& cp) {
  if (!is_valid(g)) throw std::invalid_argument("hamiltonian: invalid grid");
  if (cp.j <= 0.0) throw std::invalid_argument("hamiltonian: coupling j must be > 0");
  const int n = g.n;
  long long bond_sum = 0;  // each bond counted once via right/down neighbors
  long long spin_sum = 0;
  for (int row = 0; row < n; ++row) {
    for (int col = 0; col < n; ++col) {
      const int i = row * n + col;
      const int right = row * n + (col + 1) % n;
      const int down = ((row + 1) % n) * n + col;
      bond_sum += static_cast<long long>(g.spins[i]) * (g.spins[right] + g.spins[down]);
      spin_sum += g.spins[i];
    }
  }
  return -cp.j * static_cast<double>(bond_sum) - cp.h * static_cast<double>(spin_sum);
}

long long magnetization(const SpinGrid& g) {
  long long m = 0;
  for (auto s : g.spins) m += s;
  return m;
}

double delta_e(const SpinGrid& g, int i, const CouplingParams& cp) {
  if (!is_valid(g)) throw std::invalid_argument("delta_e: invalid grid");
  if (cp.h != 0.0)
    throw std::invalid_argument("delta_e: only the h = 0 case is supported");
  const auto nb = neighbors(i, g.n);
  const int local = g.spins[nb[0]] + g.spins[nb[1]] + g.spins[nb[2]] + g.spins[nb[3]];
  return 2.0 * cp.j * static_cast<double>(g.spins[i]) * static_cast<double>(local);
}

void flip_site(SpinGrid& g, int i) {
  if (i < 0 || i >= g.sites()) throw std::out_of_range("flip_site: bad index");
  g.spins[static_cast<std::size_t>(i)] = static_cast<std::int8_t>(-g.spins[static_cast<std::size_t>(i)]);
}

void write_grid(const SpinGrid& g, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("write_grid: cannot open " + path.string());
  out.write(reinterpret_cast<const char*>(g.spins.data()),
            static_cast<std::streamsize>(g.spins.size()));
  if (!out) throw std::runtime_error("write_grid: write failed for " + path.string());
}

SpinGrid read_grid(const std::filesystem::path& path, int n) {
  if (n < 2) throw std::invalid_argument("read_grid: n must be >= 2");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_grid: cannot open " + path.string());
  SpinGrid g;
  g.n = n;
  g.spins.resize(static_cast<std::size_t>(n) * n);
  in.read(reinterpret_cast<char*>(g.spins.data()),
          static_cast<std::streamsize>(g.spins.size()));
  if (in.gcount() != static_cast<std::streamsize>(g.spins.size()))
    throw std::runtime_error("read_grid: short read from " + path.string());
  char extra;
  if (in.read(&extra, 1))
    throw std::runtime_error("read_grid: trailing bytes in " + path.string());
  for (auto s : g.spins)
    if (s != 1 && s != -1)
      throw std::runtime_error("read_grid: corrupt spin value in " + path.string());
  return g;
}

}  // namespace ising

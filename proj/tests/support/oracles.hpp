#ifndef ISING_TEST_ORACLES_HPP
#define ISING_TEST_ORACLES_HPP

// Independent reference implementations used only by the tests. Each one
// deliberately takes a different route from the library code it checks:
// neighbor sets come from a brute-force distance scan, energies from an
// explicit bond list, Gibbs expectations from full state enumeration, and
// integrals from adaptive Simpson instead of Gauss-Kronrod.

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <set>
#include <vector>

#include "ising/lattice.hpp"

namespace oracle {

// All sites within periodic Manhattan distance 1 of i, found by scanning.
inline std::set<int> manhattan_neighbors(int i, int n) {
  std::set<int> out;
  const int r0 = i / n, c0 = i % n;
  for (int j = 0; j < n * n; ++j) {
    if (j == i) continue;
    const int r1 = j / n, c1 = j % n;
    const int dr = std::min(std::abs(r0 - r1), n - std::abs(r0 - r1));
    const int dc = std::min(std::abs(c0 - c1), n - std::abs(c0 - c1));
    if (dr + dc == 1) out.insert(j);
  }
  return out;
}

// Energy from an explicit list of unordered bonds (i < j).
inline double bond_list_energy(const ising::SpinGrid& g, double j_coupling = 1.0,
                               double h = 0.0) {
  double e = 0.0;
  for (int i = 0; i < g.sites(); ++i)
    for (int k : manhattan_neighbors(i, g.n))
      if (i < k)
        e -= j_coupling * static_cast<double>(g.spins[static_cast<std::size_t>(i)]) *
             static_cast<double>(g.spins[static_cast<std::size_t>(k)]);
  for (auto s : g.spins) e -= h * static_cast<double>(s);
  return e;
}

// Exhaustive Gibbs distribution on the n x n lattice (n^2 <= ~20 spins).
struct GibbsTable {
  std::vector<double> prob;    // indexed by the bitmask state
  std::vector<double> energy;  // per state, via the bond-list oracle
  double mean_energy = 0.0;
};

inline ising::SpinGrid grid_from_bits(std::uint32_t bits, int n) {
  ising::SpinGrid g;
  g.n = n;
  g.spins.resize(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n * n; ++i)
    g.spins[static_cast<std::size_t>(i)] = (bits >> i) & 1u ? std::int8_t{+1} : std::int8_t{-1};
  return g;
}

inline std::uint32_t bits_from_grid(const ising::SpinGrid& g) {
  std::uint32_t bits = 0;
  for (int i = 0; i < g.sites(); ++i)
    if (g.spins[static_cast<std::size_t>(i)] > 0) bits |= 1u << i;
  return bits;
}

inline GibbsTable enumerate_gibbs(int n, double beta) {
  const std::uint32_t states = 1u << (n * n);
  GibbsTable t;
  t.prob.resize(states);
  t.energy.resize(states);
  double z = 0.0;
  for (std::uint32_t s = 0; s < states; ++s) {
    t.energy[s] = bond_list_energy(grid_from_bits(s, n));
    t.prob[s] = std::exp(-beta * t.energy[s]);
    z += t.prob[s];
  }
  for (std::uint32_t s = 0; s < states; ++s) {
    t.prob[s] /= z;
    t.mean_energy += t.prob[s] * t.energy[s];
  }
  return t;
}

inline double tv_distance(const std::vector<double>& counts, const std::vector<double>& prob) {
  double total = 0.0;
  for (double c : counts) total += c;
  double tv = 0.0;
  for (std::size_t s = 0; s < prob.size(); ++s)
    tv += std::abs(counts[s] / total - prob[s]);
  return 0.5 * tv;
}

// Adaptive Simpson integration (different scheme from the library's
// Gauss-Kronrod rule).
inline double simpson_adaptive(const std::function<double(double)>& f, double a, double b,
                               double tol, int depth = 0) {
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  auto simpson = [](double lo, double hi, double flo, double fmid, double fhi) {
    return (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
  };
  std::function<double(double, double, double, double, double, double, int)> rec =
      [&](double lo, double hi, double flo, double fmid, double fhi, double whole,
          int d) -> double {
    const double mid = 0.5 * (lo + hi);
    const double lm = 0.5 * (lo + mid), rm = 0.5 * (mid + hi);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(lo, mid, flo, flm, fmid);
    const double right = simpson(mid, hi, fmid, frm, fhi);
    if (d > 40 || std::abs(left + right - whole) < 15.0 * tol)
      return left + right + (left + right - whole) / 15.0;
    return rec(lo, mid, flo, flm, fmid, left, d + 1) +
           rec(mid, hi, fmid, frm, fhi, right, d + 1);
  };
  return rec(a, b, fa, fm, fb, simpson(a, b, fa, fm, fb), depth);
}

// Defining integral of the complete elliptic integral of the first kind.
inline double elliptic_k_quadrature(double k, double tol = 1e-12) {
  return simpson_adaptive(
      [k](double th) {
        const double s = std::sin(th);
        return 1.0 / std::sqrt(1.0 - k * k * s * s);
      },
      0.0, std::acos(-1.0) / 2.0, tol);
}

}  // namespace oracle

#endif  // ISING_TEST_ORACLES_HPP

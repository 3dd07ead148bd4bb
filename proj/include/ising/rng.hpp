#ifndef ISING_RNG_HPP
#define ISING_RNG_HPP

#include <cstdint>
#include <random>

namespace ising {

// Deterministic draw sequence keyed by (seed, stream). Distinct stream ids
// give statistically independent sequences, so trajectory-level workers can
// run in parallel without sharing generator state.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream), gen_(mix(seed, stream)) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1), 53-bit resolution. Derived from raw bits so the
  // sequence does not depend on the standard library's distribution code.
  double next_double() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  // Uniform integer in [0, bound), bound > 0 (multiply-shift reduction).
  int next_below(int bound) {
    const auto r = static_cast<unsigned __int128>(gen_());
    return static_cast<int>((r * static_cast<unsigned __int128>(bound)) >> 64);
  }

  // Child stream with an id nested under this stream's id.
  RngStream substream(std::uint64_t id) const {
    return RngStream(seed_, stream_ * 0x9E3779B97F4A7C15ull + id + 1);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  // splitmix64 finalizer over the (seed, stream) pair
  static std::uint64_t mix(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 gen_;
};

}  // namespace ising

#endif  // ISING_RNG_HPP

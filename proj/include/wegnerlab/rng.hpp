#pragma once

#include <cstdint>
#include <random>

namespace wegnerlab {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for the k-th realization stream. Streams depend only on
/// (master_seed, k), never on scheduling, so parallel runs reproduce
/// serial ones exactly.
inline std::uint64_t derive_stream_seed(std::uint64_t master_seed,
                                        std::uint64_t k) {
  std::uint64_t state = master_seed ^ (0x9e3779b97f4a7c15ULL * (k + 1));
  const std::uint64_t a = splitmix64(state);
  const std::uint64_t b = splitmix64(state);
  return a ^ (b >> 1);
}

/// Standard normal draws from a fixed 64-bit seed.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) : engine_(seed) {}
  double next() { return normal_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace wegnerlab

#pragma once

#include <cstdint>
#include <random>

namespace krc {

// splitmix64 step; used to derive independent deterministic streams
// (per episode, per seed-sweep entry) from one base seed.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  std::uint64_t s = base ^ (0x9e3779b97f4a7c15ULL * (stream + 1));
  return splitmix64(s);
}

// Uniform sampler on top of mt19937_64. The [0,1) mapping is done explicitly
// ((x >> 11) * 2^-53) because std::uniform_real_distribution is not bit-stable
// across standard library implementations; identical seeds must reproduce
// identical sequences everywhere.
class UniformSampler {
 public:
  explicit UniformSampler(std::uint64_t seed) : engine_(seed) {}

  // in [0, 1)
  double unit() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // in [lo, hi)
  double in_range(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // in [-bound, bound]
  double symmetric(double bound) { return bound * (2.0 * unit() - 1.0); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace krc

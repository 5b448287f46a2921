#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>

namespace mtrl {

// SplitMix64 step; used both as a seed deriver and as a stream splitter.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Deterministic child-seed derivation. Mixing the lane in twice keeps
// (seed, lane) collisions away from (seed, lane') for nearby lanes.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t lane) {
  std::uint64_t s = seed ^ (0x9E3779B97F4A7C15ULL * (lane + 1));
  std::uint64_t a = splitmix64(s);
  s ^= lane;
  return a ^ splitmix64(s);
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t lane_a,
                                 std::uint64_t lane_b) {
  return derive_seed(derive_seed(seed, lane_a), lane_b);
}

// Seeded random source. All sampling in the library goes through this class
// so runs are reproducible from a single master seed. Uniform doubles are
// built directly from the top 53 bits rather than through
// std::uniform_real_distribution, whose output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1).
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Index sampled proportionally to probs. Numeric residue (cumulative sum
  // falling fractionally short of 1) goes to the last positive entry.
  int categorical(std::span<const double> probs) {
    if (probs.empty()) throw std::invalid_argument("categorical: empty support");
    const double u = uniform();
    double acc = 0.0;
    int last_positive = -1;
    for (int i = 0; i < static_cast<int>(probs.size()); ++i) {
      if (probs[i] <= 0.0) continue;
      acc += probs[i];
      last_positive = i;
      if (u < acc) return i;
    }
    if (last_positive < 0) throw std::invalid_argument("categorical: zero mass");
    return last_positive;
  }

  Rng split() { return Rng(next_u64()); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace mtrl

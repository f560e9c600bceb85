#pragma once

#include <cstdint>
#include <vector>

namespace oodgauge {

// Deterministic 64-bit generator: xoshiro256** seeded by SplitMix64
// expansion of (seed, stream). The same (seed, stream) pair always yields
// the same sequence; distinct streams give unrelated sequences, which lets
// one experiment seed drive independent draw sources (data, init, shuffling,
// augmentation) without cross-talk.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t next_u64();

  // [0, 1)
  double uniform();
  double uniform_range(double lo, double hi);
  // [0, bound); bound must be > 0
  std::uint64_t uniform_below(std::uint64_t bound);

  // Standard normal via Box-Muller; pairs are generated together and the
  // second value is cached.
  double normal();
  double normal(double mean, double stddev);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  std::uint64_t state_[4];
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// n i.i.d. draws from N(mean, stddev^2); stddev must be >= 0.
std::vector<double> gaussian(Rng& rng, std::size_t n, double mean,
                             double stddev);

}  // namespace oodgauge

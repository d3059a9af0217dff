#pragma once

#include <cstdint>
#include <random>

namespace swarmgoal {

// Stream splitting: every stream is an mt19937_64 seeded with
// splitmix64(base ^ splitmix64(stream_id + 1)). Agent i uses stream i + 1;
// stream 0 is reserved for goal and start-position draws.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b);

inline constexpr std::uint64_t kGoalStream = 0;

class Rng {
 public:
  Rng() : Rng(0) {}
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t base, std::uint64_t stream)
      : engine_(derive_seed(base, stream)) {}

  double uniform(double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  double normal(double mean, double sd) {
    if (sd == 0.0) return mean;
    return std::normal_distribution<double>(mean, sd)(engine_);
  }
  std::uint64_t index(std::uint64_t n) {
    return std::uniform_int_distribution<std::uint64_t>(0, n - 1)(engine_);
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace swarmgoal

#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace vecsim {

// Stream seeds are derived from the master seed and a stream name so that
// adding draws to one subsystem never shifts the sequence seen by another.
std::uint64_t derive_seed(std::uint64_t master, std::string_view stream_name);

// mt19937_64 with hand-rolled distribution shapes.  std::uniform_real_distribution
// and friends are not bit-stable across standard libraries, and replay must be.
class Rng {
public:
  Rng() : gen_(0) {}
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // [0,1), 53-bit resolution
  double uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // [lo,hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // unbiased draw from [0,n), n >= 1 (Lemire's bounded method)
  std::uint64_t uniform_index(std::uint64_t n);

  double exponential(double mean = 1.0);
  double normal(double mean = 0.0, double stddev = 1.0);
  std::uint64_t poisson(double mean);

private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// One decorrelated stream per subsystem.
struct RngStreams {
  Rng topology;
  Rng services;
  Rng fading;
  Rng demand;
  Rng mobility;
  Rng policy;

  explicit RngStreams(std::uint64_t master)
      : topology(derive_seed(master, "topology")),
        services(derive_seed(master, "services")),
        fading(derive_seed(master, "fading")),
        demand(derive_seed(master, "demand")),
        mobility(derive_seed(master, "mobility")),
        policy(derive_seed(master, "policy")) {}
};

}  // namespace vecsim

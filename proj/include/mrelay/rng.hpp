#pragma once

#include <cstdint>
#include <limits>

namespace mrelay {

// xoshiro256** with SplitMix64 seeding. Each replication gets its own engine
// derived from (master seed, replication index), so a round's draws do not
// depend on which worker runs it.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);
  static Rng for_stream(std::uint64_t master_seed, std::uint64_t index);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()();

  // Uniform on the open interval (0, 1).
  double uniform();
  // Exp(rate) variate.
  double exponential(double rate);
  bool bernoulli(double p);

 private:
  std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t& state);

}  // namespace mrelay

#ifndef QTRAJ_RNG_HPP
#define QTRAJ_RNG_HPP

#include <cstdint>

namespace qtraj {

// Counter-based stream: the n-th output is a pure function of
// (seed, trajectory, channel, n), so streams can be created and consumed in
// any order across workers and always reproduce bit-for-bit.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t trajectory,
               std::uint64_t channel);

    std::uint64_t next_u64();

    /// Uniform in the open interval (0, 1).
    double next_uniform();

    /// Standard normal via Box-Muller (pairs cached).
    double next_normal();

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

// 64-bit avalanche mix (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t x);

/// Per-trajectory seed used by the ensemble harness: hash(seed, index).
std::uint64_t trajectory_seed(std::uint64_t seed, std::uint64_t index);

} // namespace qtraj

#endif

#include "qtraj/rng.hpp"

#include <cmath>
#include <numbers>

namespace qtraj {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::uint64_t trajectory_seed(std::uint64_t seed, std::uint64_t index) {
    return mix64(mix64(seed) ^ (index * 0xd1342543de82ef95ULL + 1));
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t trajectory,
                       std::uint64_t channel) {
    std::uint64_t k = trajectory_seed(seed, trajectory);
    key_ = mix64(k ^ (channel * 0x2545f4914f6cdd1dULL + 0x632be59bd9b4e019ULL));
}

std::uint64_t CounterRng::next_u64() {
    return mix64(key_ + counter_++ * 0x9e3779b97f4a7c15ULL);
}

double CounterRng::next_uniform() {
    // 53 significant bits, shifted into (0, 1).
    return (double((next_u64() >> 11)) + 0.5) * 0x1.0p-53;
}

double CounterRng::next_normal() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    const double u1 = next_uniform();
    const double u2 = next_uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
}

} // namespace qtraj

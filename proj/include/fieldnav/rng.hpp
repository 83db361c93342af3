#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>

#include "fieldnav/geometry.hpp"

namespace fieldnav {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

// Independent, reproducible seed streams: every consumer derives its own
// stream key from the scenario seed plus a label and indices instead of
// sharing one generator.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view label) {
    std::uint64_t s = base ^ fnv1a64(label);
    return splitmix64(s);
}

inline std::uint64_t derive_seed(std::uint64_t base, std::string_view label, std::uint64_t index) {
    std::uint64_t s = base ^ fnv1a64(label);
    s = splitmix64(s) ^ (index * 0x9e3779b97f4a7c15ULL);
    return splitmix64(s);
}

class Rng {
public:
    Rng() : Rng(0) {}
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // uniform in [0, 1)
    double uniform() { return (engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform in [0, n)
    std::uint64_t uniform_int(std::uint64_t n) { return n == 0 ? 0 : engine_() % n; }

    bool bernoulli(double p) { return uniform() < p; }

    // Box-Muller, no cached second sample so streams stay easy to reason about
    double normal() {
        double u1 = uniform();
        double u2 = uniform();
        if (u1 < 1e-300) u1 = 1e-300;
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    double normal(double mu, double sigma) { return mu + sigma * normal(); }

    Vec2 normal_vec2(double sigma) { return {normal(0.0, sigma), normal(0.0, sigma)}; }

private:
    std::mt19937_64 engine_;
};

}  // namespace fieldnav

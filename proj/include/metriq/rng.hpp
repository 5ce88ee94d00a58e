// Counter-based Gaussian stream for the Monte-Carlo modules.
//
// Contract: sample k of a run derives all of its randomness from (seed, k)
// alone, so the estimate is independent of how samples are distributed over
// threads. std:: engines are deliberately not used here — they are not
// splittable by counter. The generator is SplitMix64 (a 64-bit mix with
// provably equidistributed increments) feeding a standard Box–Muller
// transform.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace metriq {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Stream of standard normals for one (seed, stream_index) pair.
class GaussianStream {
public:
    GaussianStream(std::uint64_t seed, std::uint64_t stream_index)
        : state_(splitmix64(seed ^ splitmix64(stream_index * 0xD1B54A32D192ED03ULL + 1))) {}

    double next() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        // u1 in (0,1] so the logarithm is finite; u2 in [0,1).
        const double u1 = (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1p-53;
        const double u2 = static_cast<double>(next_u64() >> 11) * 0x1p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

private:
    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        std::uint64_t z = state_;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace metriq

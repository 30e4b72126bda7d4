#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace spdpower {

/// Counter-based pseudo-random generator (SplitMix64 core). Cheap to seed,
/// and independent substreams are derived arithmetically from
/// (seed, stream index), so parallel replications reproduce bit-identically
/// regardless of scheduling.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(mix(seed ^ 0x9E3779B97F4A7C15ULL)) {}

    /// Stream `index` of the generator family identified by `seed`.
    static Rng substream(std::uint64_t seed, std::uint64_t index) {
        Rng r(seed);
        r.state_ = mix(r.state_ + (index + 1) * 0xD1B54A32D192ED03ULL);
        return r;
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix(state_);
    }

    /// Uniform double strictly inside (0, 1).
    double next_unit() { return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; the paired draw is cached.
    double next_gaussian() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = next_unit();
        const double u2 = next_unit();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace spdpower

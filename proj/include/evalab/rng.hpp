#pragma once

#include <cstdint>

namespace evalab {

/// SplitMix64. Small, fast, and -- unlike the std distributions -- produces
/// the same stream on every platform, which the reproducibility contract
/// (byte-identical reports for a given master seed) depends on.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53 random bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform index in [0, n). n must be >= 1.
    std::uint64_t next_index(std::uint64_t n) {
        auto i = static_cast<std::uint64_t>(next_double() * static_cast<double>(n));
        return i >= n ? n - 1 : i;
    }

private:
    std::uint64_t state_;
};

/// Stateless seed derivation: one master seed plus (trial, stream) coordinates
/// give independent per-trial seeds no matter how trials are scheduled.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, std::uint64_t stream) {
    std::uint64_t z = master;
    z += 0x9E3779B97F4A7C15ULL * (trial + 1);
    z += 0xD1B54A32D192ED03ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

} // namespace evalab

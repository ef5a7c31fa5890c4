#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>

namespace por {

/// Randomness source. Unseeded instances draw from the OpenSSL CSPRNG;
/// seeded instances are a reproducible mt19937_64 stream for tests,
/// experiments and `--seed` runs.
class Rng {
public:
    Rng() = default;
    explicit Rng(std::uint64_t seed) : engine_(std::mt19937_64(seed)) {}

    /// Independent stream for sub-task `index` (e.g. one experiment trial).
    static Rng derive(std::uint64_t seed, std::uint64_t index);

    bool seeded() const { return engine_.has_value(); }

    void fill(std::span<std::uint8_t> out);
    std::uint64_t next_u64();
    /// Uniform in [0, bound). bound must be nonzero.
    std::uint64_t uniform(std::uint64_t bound);
    /// Uniform in [0, 1).
    double unit();

private:
    std::optional<std::mt19937_64> engine_;
};

}  // namespace por

#include "por/rng.hpp"

#include <openssl/rand.h>

#include "por/error.hpp"

namespace por {

Rng Rng::derive(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    Rng r;
    r.engine_.emplace(seq);
    return r;
}

void Rng::fill(std::span<std::uint8_t> out) {
    if (!engine_) {
        if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1) {
            throw Error("system randomness unavailable");
        }
        return;
    }
    std::size_t i = 0;
    while (i < out.size()) {
        auto word = (*engine_)();
        for (int b = 0; b < 8 && i < out.size(); ++b, ++i) {
            out[i] = static_cast<std::uint8_t>(word >> (8 * b));
        }
    }
}

std::uint64_t Rng::next_u64() {
    if (engine_) return (*engine_)();
    std::uint64_t v = 0;
    fill({reinterpret_cast<std::uint8_t*>(&v), sizeof v});
    return v;
}

std::uint64_t Rng::uniform(std::uint64_t bound) {
    if (bound == 0) throw UsageError("uniform: zero bound");
    // Rejection sampling removes modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    for (;;) {
        auto v = next_u64();
        if (v < limit) return v % bound;
    }
}

double Rng::unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

}  // namespace por

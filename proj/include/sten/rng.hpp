#pragma once

#include <cstdint>
#include <initializer_list>
#include <stdexcept>

namespace sten {

// Deterministic counter-mode generator used everywhere randomness is needed
// (challenge selection, simulation models, test data). The state advances by
// a fixed odd gamma and the output is a bijective mix of the counter, so a
// seed fully determines the stream on every platform.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform value in [0, bound) via rejection sampling; no modulo bias.
    std::uint64_t uniform_below(std::uint64_t bound) {
        if (bound == 0) throw std::invalid_argument("uniform_below: zero bound");
        // Accept only draws above 2^64 mod bound; the accepted range is an
        // exact multiple of bound.
        std::uint64_t reject_below = (0 - bound) % bound;
        for (;;) {
            std::uint64_t r = next();
            if (r >= reject_below) return r % bound;
        }
    }

private:
    std::uint64_t state_;
};

// Derives an independent seed from a tuple of values (model instance seeds,
// per-position guessing streams, ...).
inline std::uint64_t mix_seed(std::initializer_list<std::uint64_t> parts) {
    std::uint64_t acc = 0x5b4cf5b7u;
    for (std::uint64_t p : parts) {
        SplitMix64 h(acc ^ (p + 0x9e3779b97f4a7c15ULL));
        acc = h.next();
    }
    return acc;
}

} // namespace sten

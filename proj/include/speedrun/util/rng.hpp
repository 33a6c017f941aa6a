#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>

namespace speedrun::util {

// Seeded deterministic RNG.  All stochastic decisions in the search flow
// through one instance, and draw_count() makes the stream resumable: after a
// reload, constructing with the same seed and calling skip(count) reproduces
// the exact continuation.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform double in [0, 1).  53-bit mantissa construction.
    double unit() {
        return static_cast<double>(next() >> 11) * 0x1.0p-53;
    }

    // Uniform index in [0, n).  Rejection sampling, no modulo bias.
    std::size_t index(std::size_t n) {
        if (n == 0) throw std::invalid_argument("Rng::index: n must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = next();
        } while (v >= limit);
        return static_cast<std::size_t>(v % n);
    }

    std::uint64_t next() {
        ++draws_;
        return engine_();
    }

    std::uint64_t draw_count() const { return draws_; }

    void skip(std::uint64_t count) {
        engine_.discard(count);
        draws_ += count;
    }

private:
    std::mt19937_64 engine_;
    std::uint64_t draws_ = 0;
};

}  // namespace speedrun::util

#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace biomeval {

// Portable deterministic random number generator.
//
// All randomness in the library flows through this generator so that results
// are reproducible bit-for-bit across runs, platforms, and reimplementations.
// The algorithm is fully specified:
//
//   state advance:  state += 0x9E3779B97F4A7C15 (64-bit wraparound), output
//                   is mix64 of the new state (splitmix64).
//   mix64(z):       z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//                   z ^= z >> 27; z *= 0x94D049BB133111EB;
//                   z ^= z >> 31.
//   stream derivation: derive(seed, stream) seeds a generator with
//                   mix64(seed + 0x9E3779B97F4A7C15) ^ mix64(stream + 0xD1B54A32D192ED03),
//                   so sub-streams are independent of evaluation order.
//   next_double():  (next_u64() >> 11) * 2^-53, uniform in [0, 1).
//   next_below(n):  unbiased bounded uniform via rejection on the threshold
//                   (2^64 mod n); consumes one next_u64() per attempt.
//   next_normal():  Marsaglia polar method. Repeatedly draws
//                   u = 2*next_double() - 1 then v = 2*next_double() - 1,
//                   s = u*u + v*v, until 0 < s < 1; returns
//                   u * sqrt(-2 ln(s) / s). The companion value (from v) is
//                   discarded so the stream position is a pure function of
//                   the number of accepted draws.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    static std::uint64_t mix64(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    // Independent sub-stream keyed by (seed, stream).
    static Rng derive(std::uint64_t seed, std::uint64_t stream) {
        return Rng(mix64(seed + 0x9E3779B97F4A7C15ULL) ^ mix64(stream + 0xD1B54A32D192ED03ULL));
    }

    std::uint64_t next_u64() {
        state_ += 0x9E3779B97F4A7C15ULL;
        return mix64(state_);
    }

    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    // Uniform integer in [0, n), n > 0, free of modulo bias.
    std::uint64_t next_below(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    double next_normal() {
        for (;;) {
            const double u = 2.0 * next_double() - 1.0;
            const double v = 2.0 * next_double() - 1.0;
            const double s = u * u + v * v;
            if (s > 0.0 && s < 1.0) return u * std::sqrt(-2.0 * std::log(s) / s);
        }
    }

private:
    std::uint64_t state_;
};

// FNV-1a 64-bit hash; used to derive per-identity RNG sub-streams from
// identity labels so results do not depend on identity evaluation order.
inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (const char c : text) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001B3ULL;
    }
    return h;
}

} // namespace biomeval

#pragma once

#include <cmath>
#include <cstdint>

namespace mimgan {

// Splittable counter-based PRNG (splitmix64 core). One 64-bit seed drives a
// whole run; independent sub-streams are derived with split() so that the
// draw order of one consumer never perturbs another. All distributions are
// computed in-library so results are identical across platforms.
class SplitRng {
public:
    explicit SplitRng(std::uint64_t seed = 0) : key_(mix(seed ^ kKeyTweak)), counter_(0) {}

    std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGolden); }

    // Derive an independent stream; deterministic in (seed, stream id) and
    // unaffected by draws already taken from this generator.
    SplitRng split(std::uint64_t stream) const {
        SplitRng r(0);
        r.key_ = mix(key_ ^ mix(stream + kGolden));
        r.counter_ = 0;
        return r;
    }

    // Uniform in [0, 1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller; consumes exactly two uniforms.
    double normal() {
        const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
    }

    double normal(double mu, double sigma) { return mu + sigma * normal(); }

    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

private:
    static constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
    static constexpr std::uint64_t kKeyTweak = 0xA02F7B3552C9D4E1ull;
    static constexpr double kPi = 3.14159265358979323846;

    static std::uint64_t mix(std::uint64_t z) {
        z += kGolden;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t key_;
    std::uint64_t counter_;
};

}  // namespace mimgan

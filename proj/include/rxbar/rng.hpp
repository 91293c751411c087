#pragma once

// Deterministic random number generation.
//
// Everything stochastic in this project flows through RngStream so that runs
// are bit-identical across platforms and compilers.  We deliberately avoid
// std::mt19937 + std::*_distribution: the engine is portable but the
// distributions are implementation-defined, which would break replay between
// standard libraries.  The generator is xoshiro256++ seeded through
// splitmix64; normal deviates come from a fixed Box-Muller implementation.
//
// Substream discipline: independent consumers never share a stream.  Each one
// derives its own via RngStream::derive(seed, tag, index), where `tag` is a
// short human-readable label (hashed with FNV-1a) and `index` distinguishes
// instances (cell index, run number, ...).  Two substreams with different
// (tag, index) are statistically independent for our purposes.

#include <cmath>
#include <cstdint>
#include <string_view>

namespace rxbar {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : s) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

} // namespace detail

/// xoshiro256++ with deterministic seeding and fixed deviate recipes.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : s_) word = detail::splitmix64(sm);
    }

    /// Derive an independent substream from (seed, tag, index).
    static RngStream derive(std::uint64_t seed, std::string_view tag, std::uint64_t index) {
        std::uint64_t sm = seed;
        std::uint64_t h = detail::splitmix64(sm) ^ detail::fnv1a(tag);
        sm = h;
        h = detail::splitmix64(sm) ^ (index * 0x9e3779b97f4a7c15ULL);
        return RngStream(h);
    }

    std::uint64_t next_u64() {
        std::uint64_t result = detail::rotl(s_[0] + s_[3], 23) + s_[0];
        std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = detail::rotl(s_[3], 45);
        return result;
    }

    /// Uniform in [0,1) with 53 bits of precision.
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform integer in [0, n).  n must be > 0.  Uses modulo; the bias is
    /// below 2^-50 for every n in this codebase, and keeping the recipe
    /// branch-free makes replay trivially portable.
    std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

    /// Standard normal via Box-Muller.  Consumes two uniforms per pair and
    /// caches the second deviate, so draw counts are deterministic.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        double u2 = uniform();
        // Guard against log(0); pushes u1 to the smallest representable draw.
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        double r = std::sqrt(-2.0 * std::log(u1));
        double theta = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(theta);
        have_spare_ = true;
        return r * std::cos(theta);
    }

    /// exp(sigma * z) with z standard normal: a lognormal factor with
    /// median 1.  sigma is the standard deviation of the log.
    double lognormal_factor(double sigma) { return std::exp(sigma * normal()); }

  private:
    std::uint64_t s_[4] {};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace rxbar

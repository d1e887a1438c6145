#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace cellmob {

// Seed expansion / hashing (Steele et al. splitmix64 finalizer).
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ with hand-rolled samplers. Sampling is kept in-house so
// that streams are reproducible across standard libraries and so that a
// (seed, stream) pair always yields the same sequence regardless of how
// many worker threads are running.
class Rng {
public:
    explicit Rng(std::uint64_t seed) {
        std::uint64_t z = seed;
        for (auto& w : s_) w = mix64(z++);
    }

    // Independent substream r of a replication seed.
    static Rng for_stream(std::uint64_t seed, std::uint64_t stream) {
        return Rng(mix64(seed) ^ mix64(0x5851f42d4c957f2dULL + stream));
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
        const std::uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }

    // uniform on [0,1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    // uniform on (0,1]
    double uniform_open() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    // Box-Muller (cosine branch only; no cached spare, keeps state minimal).
    double normal() {
        const double u1 = uniform_open();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
    double normal(double mean, double sd) { return mean + sd * normal(); }

    double exponential(double mean = 1.0) { return -mean * std::log(uniform_open()); }

    // Exact Poisson sampling by the product method, chunked so the
    // e^{-mean} threshold never underflows. Cost is O(mean) draws, which
    // is proportional to the work the caller does with the count anyway.
    std::uint64_t poisson(double mean) {
        std::uint64_t n = 0;
        while (mean > 0.0) {
            const double chunk = mean > 500.0 ? 500.0 : mean;
            const double limit = std::exp(-chunk);
            double p = 1.0;
            std::uint64_t k = 0;
            for (;;) {
                p *= uniform_open();
                if (p <= limit) break;
                ++k;
            }
            n += k;
            mean -= chunk;
        }
        return n;
    }

    // unbiased integer in [0, n)
    std::uint64_t uniform_int(std::uint64_t n) {
        const std::uint64_t threshold = (0 - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t s_[4];
};

}  // namespace cellmob

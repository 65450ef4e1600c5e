#pragma once

#include <cstdint>
#include <cmath>

namespace hjh {

/**
 * Deterministic seeding utilities. All randomness in the library derives from
 * keyed splitmix64 hashes so that any value is a pure function of (seed, key)
 * and never of evaluation order. This is what makes far-apart grid cells
 * independent and reruns bit-identical.
 */

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

inline std::uint64_t hash_mix(std::uint64_t a, std::uint64_t b) {
    return splitmix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

inline std::uint64_t hash3(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return hash_mix(hash_mix(a, b), c);
}

inline std::uint64_t hash4(std::uint64_t a, std::uint64_t b, std::uint64_t c, std::uint64_t d) {
    return hash_mix(hash3(a, b, c), d);
}

/** Counter-based stream of uniforms seeded by a single 64-bit key. */
class RngStream {
  public:
    explicit RngStream(std::uint64_t key) : state_(splitmix64(key)) {}

    std::uint64_t next_u64() {
        state_ = splitmix64(state_);
        return state_;
    }

    /** Uniform in [0,1). 53-bit mantissa, implementation-independent. */
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

    /** Uniform in [lo, hi). */
    double next_in(double lo, double hi) { return lo + (hi - lo) * next_double(); }

    /** Poisson count by inversion; intended for small means (lambda <~ 30). */
    int next_poisson(double lambda) {
        double L = std::exp(-lambda);
        double p = 1.0;
        int k = 0;
        do {
            ++k;
            p *= next_double();
        } while (p > L);
        return k - 1;
    }

  private:
    std::uint64_t state_;
};

/**
 * Seed for Monte Carlo replica i of a named experiment. Replica seeds do not
 * move when the replica count changes.
 */
inline std::uint64_t replica_seed(std::uint64_t base_seed, std::uint64_t experiment_id, int replica) {
    return hash3(base_seed, experiment_id, static_cast<std::uint64_t>(replica));
}

/** Stable id for an experiment name (FNV-1a). */
inline std::uint64_t experiment_id(const char* name) {
    std::uint64_t h = 1469598103934665603ULL;
    for (const char* p = name; *p; ++p) {
        h ^= static_cast<unsigned char>(*p);
        h *= 1099511628211ULL;
    }
    return h;
}

}  // namespace hjh

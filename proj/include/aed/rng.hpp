#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace aed {

// Deterministic RNG with hand-rolled distributions. std::uniform_*_distribution
// is implementation-defined, so every draw here is spelled out to keep results
// identical across compilers and standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {
        // splitmix64 warmup so small seeds do not start in a low-entropy state
        next_u64();
        next_u64();
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // Uniform integer in [0, n). n must be > 0.
    std::uint64_t uniform_index(std::uint64_t n) {
        // rejection sampling to avoid modulo bias
        const std::uint64_t limit = n * (UINT64_MAX / n);
        std::uint64_t v = next_u64();
        while (v >= limit) v = next_u64();
        return v % n;
    }

    // Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // Standard normal via Box-Muller. Stateless across calls (no cached spare)
    // so the draw sequence is easy to reason about.
    double normal() {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // k distinct indices from [0, n), in selection order.
    std::vector<std::size_t> sample_indices(std::size_t n, std::size_t k) {
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        if (k > n) k = n;
        for (std::size_t i = 0; i < k; ++i) {
            const std::size_t j = i + static_cast<std::size_t>(uniform_index(n - i));
            std::swap(pool[i], pool[j]);
        }
        pool.resize(k);
        return pool;
    }

private:
    std::uint64_t state_;
};

// Stable way to derive independent stream seeds from a run seed plus tags
// (fold, class index, purpose). fmix64 of the running combination.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) {
    std::uint64_t h = seed ^ (tag + 0x9e3779b97f4a7c15ULL + (seed << 6) + (seed >> 2));
    h ^= h >> 33;
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
    h *= 0xc4ceb9fe1a85ec53ULL;
    h ^= h >> 33;
    return h;
}

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return derive_seed(derive_seed(seed, a), b);
}

// FNV-1a, used for content hashes in run metadata (not cryptographic).
inline std::uint64_t fnv1a64(const void* data, std::size_t len) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace aed

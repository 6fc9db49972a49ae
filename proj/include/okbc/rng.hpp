#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "okbc/common.hpp"

namespace okbc {

// Deterministic random source. mt19937_64 output is fixed by the standard,
// and every draw here is built from raw 64-bit words rather than the
// implementation-defined std:: distributions, so streams are reproducible
// across compilers and platforms, not just across runs.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    // Unbiased integer in [0, bound) via rejection sampling.
    std::uint64_t uniform_index(std::uint64_t bound) {
        if (bound == 0) throw ComputeError("uniform_index: bound must be positive");
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
        std::uint64_t x;
        do {
            x = next_u64();
        } while (x >= limit);
        return x % bound;
    }

    // Uniform in [0, 1) with 53 random bits.
    double uniform_real() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // Uniform in [lo, hi).
    double uniform_real(double lo, double hi) { return lo + (hi - lo) * uniform_real(); }

    // Standard normal via Box-Muller; pairs are cached.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform_real();
        } while (u1 <= 0.0);
        u2 = uniform_real();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        if (v.size() < 2) return;
        for (std::size_t i = v.size() - 1; i > 0; --i) {
            const std::size_t j = static_cast<std::size_t>(uniform_index(i + 1));
            std::swap(v[i], v[j]);
        }
    }

    std::vector<std::size_t> permutation(std::size_t count) {
        std::vector<std::size_t> p(count);
        for (std::size_t i = 0; i < count; ++i) p[i] = i;
        shuffle(p);
        return p;
    }

    // Fixed-point-free permutation, resampled up to max_tries times.
    std::vector<std::size_t> derangement(std::size_t count, int max_tries = 100) {
        if (count < 2) throw ComputeError("derangement: need at least 2 elements");
        for (int attempt = 0; attempt < max_tries; ++attempt) {
            std::vector<std::size_t> p = permutation(count);
            bool ok = true;
            for (std::size_t i = 0; i < count; ++i) {
                if (p[i] == i) {
                    ok = false;
                    break;
                }
            }
            if (ok) return p;
        }
        throw ComputeError("derangement: no fixed-point-free permutation found");
    }

private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Stable stream splitting: derive independent child seeds from one root seed.
inline std::uint64_t derive_seed(std::uint64_t root, std::uint64_t stream) {
    // SplitMix64 finalizer over the combined value.
    std::uint64_t z = root + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

}  // namespace okbc

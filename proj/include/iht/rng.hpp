#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace iht {

/// Counter-based splittable generator. A stream is identified by a 64-bit
/// key derived from (seed, path); `child(label)` appends one path element.
/// Identical (seed, path) always yields the identical scalar stream, and
/// children are independent of how much of the parent stream was consumed.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : key_(mix64(seed ^ 0x6A09E667F3BCC909ull)) {}

    Rng child(std::uint64_t label) const {
        Rng r(*this);
        r.key_ = mix64(key_ + 0x9E3779B97F4A7C15ull * (label + 1));
        r.ctr_ = 0;
        r.has_spare_ = false;
        return r;
    }

    std::uint64_t next_u64() { return mix64(key_ + 0x9E3779B97F4A7C15ull * ++ctr_); }

    /// Uniform in [0, 1).
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    /// Standard normal via Box-Muller (pairs cached).
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        double u2 = uniform();
        double r = std::sqrt(-2.0 * std::log(u1));
        double t = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }

    double normal_nonzero() {
        double v;
        do {
            v = normal();
        } while (v == 0.0);
        return v;
    }

    /// Uniform integer in [0, bound) without modulo bias (rejection).
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t limit = bound * (UINT64_MAX / bound);
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % bound;
    }

    /// k distinct indices from {0,...,n-1}, partial Fisher-Yates; order as drawn.
    std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
        std::vector<std::size_t> pool(n);
        for (std::size_t i = 0; i < n; ++i) pool[i] = i;
        std::vector<std::size_t> out(k);
        for (std::size_t i = 0; i < k; ++i) {
            std::size_t j = i + std::size_t(below(n - i));
            std::swap(pool[i], pool[j]);
            out[i] = pool[i];
        }
        return out;
    }

private:
    static std::uint64_t mix64(std::uint64_t z) {
        z ^= z >> 30;
        z *= 0xBF58476D1CE4E5B9ull;
        z ^= z >> 27;
        z *= 0x94D049BB133111EBull;
        z ^= z >> 31;
        return z;
    }

    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace iht

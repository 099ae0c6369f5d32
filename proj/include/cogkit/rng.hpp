#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "cogkit/error.hpp"

namespace cogkit {

/// Seeded random generator with a fully pinned output sequence.
///
/// Draws come from std::mt19937_64, whose algorithm the C++ standard specifies
/// exactly, and all derived quantities (bounded integers, shuffles, uniform and
/// normal reals) are computed here rather than through the standard
/// distributions, whose outputs are implementation-defined. Identical seeds
/// therefore produce identical streams on every platform.
class Rng {
   public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw InvalidArgument("Rng::below: n must be positive");
        const std::uint64_t min = (~n + 1) % n;  // 2^64 mod n
        std::uint64_t r;
        do {
            r = next_u64();
        } while (r < min);
        return r % n;
    }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller; caches the paired deviate.
    double normal() {
        if (has_cached_) {
            has_cached_ = false;
            return cached_;
        }
        double u1;
        do {
            u1 = uniform01();
        } while (u1 <= 0.0);
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * 3.14159265358979323846 * u2;
        cached_ = r * std::sin(theta);
        has_cached_ = true;
        return r * std::cos(theta);
    }

    /// In-place Fisher-Yates shuffle.
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(below(i));
            std::swap(v[i - 1], v[j]);
        }
    }

   private:
    std::mt19937_64 gen_;
    double cached_ = 0.0;
    bool has_cached_ = false;
};

}  // namespace cogkit

#ifndef MTASK_RNG_HPP
#define MTASK_RNG_HPP

#include <cassert>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace mtask {

/// Counter-free splitmix64 generator with cheap stream derivation.
///
/// All randomness in the toolkit flows through seeded streams keyed by
/// (seed, domain tag, indices), so results are reproducible bit-for-bit
/// regardless of evaluation order or worker count. Distributions are
/// implemented here rather than taken from <random> because libstdc++ does
/// not guarantee a stable sequence across versions.
class rng {
public:
    explicit rng(std::uint64_t seed) : state_(seed) {}

    /// New stream deterministically keyed by (seed, a, b, c).
    static rng derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                      std::uint64_t c = 0) {
        std::uint64_t s = mix(seed);
        s = mix(s ^ mix(a + 0x1full));
        s = mix(s ^ mix(b + 0x2full));
        s = mix(s ^ mix(c + 0x3full));
        return rng(s);
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1), 53 bits.
    double next_double() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Standard normal via Box-Muller (no rejection, so the stream layout
    /// is a fixed function of how many variates were drawn).
    double next_normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = next_double();
        double u2 = next_double();
        if (u1 <= 0.0) u1 = 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        have_spare_ = true;
        return r * std::cos(a);
    }

    /// Uniform integer in [0, n). Rejection sampling, no modulo bias.
    std::uint64_t next_below(std::uint64_t n) {
        assert(n >= 1);
        const std::uint64_t threshold = (0ull - n) % n;
        for (;;) {
            const std::uint64_t r = next_u64();
            if (r >= threshold) return r % n;
        }
    }

    /// m distinct indices drawn uniformly from {0,...,n-1} (partial
    /// Fisher-Yates; order is part of the draw).
    std::vector<int> sample_without_replacement(int n, int m) {
        assert(0 <= m && m <= n);
        std::vector<int> idx(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) idx[static_cast<std::size_t>(i)] = i;
        for (int j = 0; j < m; ++j) {
            const auto r = j + static_cast<int>(next_below(static_cast<std::uint64_t>(n - j)));
            std::swap(idx[static_cast<std::size_t>(j)], idx[static_cast<std::size_t>(r)]);
        }
        idx.resize(static_cast<std::size_t>(m));
        return idx;
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t j = v.size(); j > 1; --j) {
            const std::size_t r = static_cast<std::size_t>(next_below(j));
            std::swap(v[j - 1], v[r]);
        }
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9E3779B97F4A7C15ull;
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

/// Domain tags for stream derivation. Keeping them in one place guarantees
/// distinct subsystems never share a stream by accident.
namespace stream {
inline constexpr std::uint64_t task_gen = 1;      // synthetic sample generation
inline constexpr std::uint64_t subsets = 2;       // labeled-subset draws
inline constexpr std::uint64_t disc_pair = 3;     // per-pair discrepancy estimation
inline constexpr std::uint64_t cv_folds = 4;      // cross-validation shuffles
inline constexpr std::uint64_t seeding = 5;       // k-means++ style seeding
inline constexpr std::uint64_t passive_set = 6;   // random labeled sets (passive methods)
inline constexpr std::uint64_t cv_seed = 7;       // per-run CV master seed
} // namespace stream

} // namespace mtask

#endif

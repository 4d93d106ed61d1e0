#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace gsir {

// SplitMix64 finalizer. Used to derive independent stream seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Replication seed as a function of (base_seed, n, replication) only:
/// three chained SplitMix64 rounds, each absorbing one coordinate.
constexpr std::uint64_t derive_seed(std::uint64_t base_seed, std::uint64_t n,
                                    std::uint64_t replication) noexcept {
    return splitmix64(splitmix64(splitmix64(base_seed) ^ n) ^ replication);
}

/// Seeded generator with platform-independent uniform draws.
///
/// Uniforms are built directly from the top 53 bits of mt19937_64 output so
/// that simulated samples do not depend on the standard library's
/// distribution implementations. Normal draws go through
/// std::normal_distribution and are reproducible per toolchain only.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Mean 0, variance 1, supported on [-sqrt(3), sqrt(3)].
    double unit_uniform() {
        static const double half_width = std::sqrt(3.0);
        return uniform(-half_width, half_width);
    }

    double normal() { return normal_(engine_); }

    std::mt19937_64& engine() { return engine_; }

private:
    std::mt19937_64 engine_;
    std::normal_distribution<double> normal_{0.0, 1.0};
};

}  // namespace gsir

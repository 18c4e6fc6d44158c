#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <random>

#include "errors.hpp"

namespace nodba {

/// SplitMix64 finalizer; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Derives an independent stream seed from a root seed and a path of coordinates, e.g.
/// `derive_seed(seed, {tag, iteration, slot})`.  Order of the coordinates matters.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::initializer_list<std::uint64_t> path) noexcept
{
    std::uint64_t h = mix64(root);
    for (auto p : path)
        h = mix64(h ^ mix64(p + 0x632be59bd9b4e019ULL));
    return h;
}

/** Deterministic random source.
 *
 * `std::mt19937_64` has a standard-mandated output sequence, but the standard distributions do not, so the
 * conversions to uniform integers, uniform reals and normals are done here.  Identical seeds therefore give
 * identical draws on every platform. */
class Rng
{
    std::mt19937_64 engine_;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;

public:
    explicit Rng(std::uint64_t seed) : engine_(seed) { }

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53 random bits.
    double uniform01() { return double(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform in the open interval (0, 1).
    double uniform_open01()
    {
        for (;;) {
            double u = uniform01();
            if (u > 0.0) return u;
        }
    }

    /// Uniform integer in the closed range [lo, hi], unbiased (rejection sampling).
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi)
    {
        if (hi < lo) throw DomainError("uniform_int: empty range");
        const std::uint64_t span = std::uint64_t(hi) - std::uint64_t(lo);
        if (span == ~std::uint64_t(0)) return std::int64_t(engine_());
        const std::uint64_t range = span + 1;
        const std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % range);
        std::uint64_t x;
        do x = engine_(); while (x >= limit);
        return std::int64_t(std::uint64_t(lo) + x % range);
    }

    /// Standard normal via Box-Muller.
    double normal()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_normal_;
        }
        const double u1 = uniform_open01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 2.0 * std::numbers::pi * u2;
        spare_normal_ = r * std::sin(t);
        has_spare_ = true;
        return r * std::cos(t);
    }
};

}

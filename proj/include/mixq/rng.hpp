// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace mixq {

/// splitmix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Stream tags keep draws for different purposes decorrelated even when the
/// caller reuses one seed for several stages.
enum class StreamTag : std::uint64_t {
    amplitude = 1,
    noise = 2,
    dither = 3,
    low_rank = 4,
    sampling = 5,
    trial = 6,
    cell_dither = 7,
};

/// Counter-based uniform on [0, 1): one independent draw per (seed, tag, index)
/// without materialising a generator. Used for per-site dithers so a value
/// never depends on traversal order.
constexpr double counter_uniform(std::uint64_t seed, StreamTag tag, std::uint64_t index) noexcept {
    const std::uint64_t key = mix64(seed ^ mix64(static_cast<std::uint64_t>(tag)));
    return static_cast<double>(mix64(key + mix64(index)) >> 11) * 0x1.0p-53;
}

/// Deterministic random stream keyed by (seed, tag, index).
///
/// Draws do not go through std:: distributions, whose output is
/// implementation-defined; only the mt19937_64 engine sequence is relied on.
class Stream {
  public:
    Stream(std::uint64_t seed, StreamTag tag, std::uint64_t index = 0)
        : engine_(mix64(mix64(seed ^ mix64(static_cast<std::uint64_t>(tag))) + index)) {}

    std::uint64_t bits() { return engine_(); }

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Uniform on [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal via Box-Muller.
    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double a = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(a);
        has_spare_ = true;
        return r * std::cos(a);
    }

    /// Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n) {
        // Lemire's multiply-shift with rejection.
        std::uint64_t x = engine_();
        __uint128_t m = static_cast<__uint128_t>(x) * n;
        auto low = static_cast<std::uint64_t>(m);
        if (low < n) {
            const std::uint64_t t = -n % n;
            while (low < t) {
                x = engine_();
                m = static_cast<__uint128_t>(x) * n;
                low = static_cast<std::uint64_t>(m);
            }
        }
        return static_cast<std::uint64_t>(m >> 64);
    }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace mixq

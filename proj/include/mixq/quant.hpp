// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mixq/rng.hpp"
#include "mixq/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

namespace mixq {

/// Level count large enough that the clamp never engages for finite data.
inline constexpr std::int64_t kUnboundedLevels = std::int64_t{1} << 52;

/// Dithered mid-rise quantizer.
///
/// Returns delta * (clamp(floor((x + tau) / delta), -K, K - 1) + 1/2): an odd
/// multiple of delta/2, saturating at +-(K - 1/2) delta.
inline double quantize_scalar(double x, double delta, double tau, std::int64_t K) {
    if (!(delta > 0.0)) throw ValidationError("quantize_scalar: delta must be positive");
    if (K < 1) throw ValidationError("quantize_scalar: K must be at least 1");
    if (!std::isfinite(x) || !std::isfinite(tau))
        throw NumericalError("quantize_scalar: non-finite input");
    const double cell = std::floor((x + tau) / delta);
    const double k = std::clamp(cell, -static_cast<double>(K), static_cast<double>(K - 1));
    return delta * (k + 0.5);
}

/// One-bit comparator (delta1/2) sgn(x + tau), with sgn(0) = +1.
///
/// Identical to quantize_scalar(x, delta1, tau, 1) whenever |x| <= delta1/2.
inline double one_bit(double x, double delta1, double tau) {
    if (!(delta1 > 0.0)) throw ValidationError("one_bit: delta1 must be positive");
    if (!std::isfinite(x) || !std::isfinite(tau)) throw NumericalError("one_bit: non-finite input");
    if (std::abs(x) > 0.5 * delta1)
        throw DynamicRangeViolation("one_bit: |x| = " + std::to_string(std::abs(x)) +
                                    " exceeds delta1/2 = " + std::to_string(0.5 * delta1));
    return x + tau >= 0.0 ? 0.5 * delta1 : -0.5 * delta1;
}

inline cplx quantize_complex(cplx z, double delta, cplx tau, std::int64_t K) {
    return {quantize_scalar(z.real(), delta, tau.real(), K),
            quantize_scalar(z.imag(), delta, tau.imag(), K)};
}

inline cplx one_bit_complex(cplx z, double delta1, cplx tau) {
    return {one_bit(z.real(), delta1, tau.real()), one_bit(z.imag(), delta1, tau.imag())};
}

/// How dithers are attached to observations.
enum class DitherMode {
    /// One dither per antenna; every Hankel cell of an antenna repeats its value.
    per_antenna,
    /// One dither per observed Hankel cell; cells of one antenna are quantized independently.
    per_cell,
};

inline const char* to_string(DitherMode m) {
    return m == DitherMode::per_antenna ? "per_antenna" : "per_cell";
}

/// Mixed-precision quantizer settings.
struct QuantScheme {
    double delta1 = 0.0; ///< one-bit scale
    double delta2 = 0.0; ///< multi-bit scale
    int bits = 10;       ///< multi-bit depth B; levels K = 2^(B-1)
    /// delta_i = 1 marks a high-precision antenna; 0-based over slots 1..M.
    BitVector high_precision;
    std::uint64_t dither_seed = 0;
    DitherMode dither_mode = DitherMode::per_cell;

    std::int64_t levels() const { return std::int64_t{1} << (bits - 1); }
};

/// Dither value for `site` (antenna or cell id) and part (0 = re, 1 = im),
/// uniform on [-delta/2, delta/2).
inline double dither(std::uint64_t seed, StreamTag tag, std::uint64_t site, int part, double delta) {
    return delta * (counter_uniform(seed, tag, 2 * site + static_cast<std::uint64_t>(part)) - 0.5);
}

inline void validate(const QuantScheme& q, const BitVector& mask) {
    if (!(q.delta1 > 0.0) || !(q.delta2 > 0.0))
        throw ValidationError("quant: delta1 and delta2 must be positive");
    if (q.bits < 2 || q.bits > 31) throw ValidationError("quant: bits must lie in [2, 31]");
    if (q.high_precision.size() != mask.size())
        throw ValidationError("quant: precision indicator length differs from M");
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (q.high_precision[i] && !mask[i])
            throw ValidationError("quant: antenna " + std::to_string(i + 1) +
                                  " is high-precision but not observed");
}

struct Scales {
    double delta1 = 0.0;
    double delta2 = 0.0;
    /// R = max over observed i of max(|Re x_i|, |Im x_i|).
    double dynamic_range = 0.0;
};

/// Picks delta1 = 2R(1 + margin) so the one-bit dither dominates the dynamic
/// range, and delta2 = R/K so the 2K multi-bit cells tile [-R, R].
inline Scales design_scales(const Snapshot& masked, double margin, int bits) {
    if (!(margin >= 0.0)) throw ValidationError("design_scales: margin must be non-negative");
    if (bits < 2 || bits > 31) throw ValidationError("design_scales: bits must lie in [2, 31]");
    if (masked.observed() == 0) throw ValidationError("design_scales: no observed entries");
    double R = 0.0;
    for (Eigen::Index i = 0; i < masked.size(); ++i) {
        if (!masked.mask[static_cast<std::size_t>(i)]) continue;
        R = std::max({R, std::abs(masked.values(i).real()), std::abs(masked.values(i).imag())});
    }
    if (!(R > 0.0)) throw ValidationError("design_scales: all observed entries are zero");
    const double K = std::ldexp(1.0, bits - 1);
    return {2.0 * R * (1.0 + margin), R / K, R};
}

/// Whether delta2 < 2 min(sup |Re x_i|, sup |Im x_i|) over the high-precision
/// antennas, i.e. the multi-bit dither does not dominate their dynamic range.
inline bool multibit_scale_admissible(const Snapshot& masked, const QuantScheme& q) {
    double re = 0.0, im = 0.0;
    bool any = false;
    for (Eigen::Index i = 0; i < masked.size(); ++i) {
        if (!q.high_precision[static_cast<std::size_t>(i)]) continue;
        any = true;
        re = std::max(re, std::abs(masked.values(i).real()));
        im = std::max(im, std::abs(masked.values(i).imag()));
    }
    return any && q.delta2 < 2.0 * std::min(re, im);
}

/// Antenna-level mixed-precision output
///   y = diag(delta) xhat + (I - diag(delta)) (delta1/2) r
/// with one dither per antenna drawn from scheme.dither_seed.
inline Snapshot quantize_mixed(const Snapshot& masked, const QuantScheme& q) {
    validate(q, masked.mask);
    const std::int64_t K = q.levels();
    Snapshot out;
    out.values = cvec::Zero(masked.size());
    out.mask = masked.mask;
    out.kind = SnapshotKind::quantized;
    for (Eigen::Index i = 0; i < masked.size(); ++i) {
        const auto slot = static_cast<std::size_t>(i);
        if (!masked.mask[slot]) continue;
        const bool hp = q.high_precision[slot] != 0;
        const double delta = hp ? q.delta2 : q.delta1;
        const cplx tau{dither(q.dither_seed, StreamTag::dither, slot, 0, delta),
                       dither(q.dither_seed, StreamTag::dither, slot, 1, delta)};
        try {
            out.values(i) = hp ? quantize_complex(masked.values(i), delta, tau, K)
                               : one_bit_complex(masked.values(i), delta, tau);
        } catch (const DynamicRangeViolation& e) {
            throw DynamicRangeViolation(std::string(e.what()) + " at antenna " + std::to_string(i + 1),
                                        static_cast<long>(i + 1));
        }
    }
    return out;
}

} // namespace mixq

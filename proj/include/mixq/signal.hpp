// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mixq/geometry.hpp"
#include "mixq/rng.hpp"
#include "mixq/types.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace mixq {

/// Far-field point targets seen by one snapshot.
struct TargetScene {
    std::vector<double> angles_deg;
    /// Complex source values. Empty means unit modulus with seeded random phase.
    std::vector<cplx> amplitudes;
    /// Per-element SNR in dB; +inf gives a noiseless snapshot.
    double snr_db = std::numeric_limits<double>::infinity();
    /// Element spacing over wavelength.
    double spacing = 0.5;
};

inline double deg2rad(double deg) { return deg * std::numbers::pi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / std::numbers::pi; }

/// a(theta): element m (0-based) is exp(j 2 pi m (d/lambda) sin theta).
inline cvec steering_vector(double theta_deg, int M, double spacing = 0.5) {
    if (!(std::abs(theta_deg) < 90.0))
        throw ValidationError("steering_vector: angle must lie in (-90, 90) degrees");
    if (M < 1) throw ValidationError("steering_vector: M must be positive");
    const double phase = 2.0 * std::numbers::pi * spacing * std::sin(deg2rad(theta_deg));
    cvec a(M);
    for (int m = 0; m < M; ++m) a(m) = std::polar(1.0, phase * m);
    return a;
}

/// M x P steering matrix.
inline cmat steering_matrix(const std::vector<double>& angles_deg, int M, double spacing = 0.5) {
    cmat A(M, static_cast<Eigen::Index>(angles_deg.size()));
    for (std::size_t k = 0; k < angles_deg.size(); ++k)
        A.col(static_cast<Eigen::Index>(k)) = steering_vector(angles_deg[k], M, spacing);
    return A;
}

/// Source values actually used for a scene: explicit amplitudes, or unit
/// modulus with phases drawn from `seed`.
inline std::vector<cplx> resolve_amplitudes(const TargetScene& scene, std::uint64_t seed) {
    if (!scene.amplitudes.empty()) return scene.amplitudes;
    Stream rng(seed, StreamTag::amplitude);
    std::vector<cplx> s;
    s.reserve(scene.angles_deg.size());
    for (std::size_t k = 0; k < scene.angles_deg.size(); ++k)
        s.push_back(std::polar(1.0, 2.0 * std::numbers::pi * rng.uniform()));
    return s;
}

struct SnapshotPair {
    Snapshot full;
    Snapshot masked;
    double noise_variance = 0.0;
};

inline void validate(const TargetScene& scene) {
    if (scene.angles_deg.empty()) throw ValidationError("scene: at least one target is required");
    if (!scene.amplitudes.empty() && scene.amplitudes.size() != scene.angles_deg.size())
        throw ValidationError("scene: amplitudes and angles differ in length");
    for (double a : scene.angles_deg)
        if (!(std::abs(a) < 90.0)) throw ValidationError("scene: angles must lie in (-90, 90) degrees");
    if (std::isnan(scene.snr_db)) throw ValidationError("scene: snr_db is NaN");
}

/// x = A s + n on the full ULA and its masked SLA view.
///
/// Noise is circular complex Gaussian with variance chosen so that
/// mean_i |[As]_i|^2 / sigma^2 equals the requested SNR.
inline SnapshotPair synthesize_snapshot(const TargetScene& scene, const ArrayGeometry& geom,
                                        std::uint64_t seed) {
    validate(scene);
    const int M = geom.M;
    if (static_cast<int>(scene.angles_deg.size()) > M)
        throw ValidationError("scene: more targets than array slots");

    const auto amps = resolve_amplitudes(scene, seed);
    cvec s(static_cast<Eigen::Index>(amps.size()));
    for (std::size_t k = 0; k < amps.size(); ++k) s(static_cast<Eigen::Index>(k)) = amps[k];

    const cvec clean = steering_matrix(scene.angles_deg, M, scene.spacing) * s;

    SnapshotPair out;
    out.full.values = clean;
    out.full.mask.assign(static_cast<std::size_t>(M), 1);
    out.full.kind = SnapshotKind::full;

    if (std::isfinite(scene.snr_db)) {
        const double power = clean.squaredNorm() / M;
        out.noise_variance = power / std::pow(10.0, scene.snr_db / 10.0);
        const double sd = std::sqrt(out.noise_variance / 2.0);
        Stream rng(seed, StreamTag::noise);
        for (int m = 0; m < M; ++m) {
            const double re = rng.normal();
            const double im = rng.normal();
            out.full.values(m) += cplx(sd * re, sd * im);
        }
    }

    out.masked.mask = masking_vector(geom);
    out.masked.values = out.full.values;
    for (int m = 0; m < M; ++m)
        if (!out.masked.mask[static_cast<std::size_t>(m)]) out.masked.values(m) = 0.0;
    out.masked.kind = SnapshotKind::masked;
    return out;
}

} // namespace mixq

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mixq/hankel.hpp"
#include "mixq/linalg.hpp"
#include "mixq/quant.hpp"
#include "mixq/types.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace mixq {

/// Settings of the singular value thresholding iteration.
struct SvtConfig {
    double tau = 0.0;  ///< shrinkage threshold
    double step = 0.0; ///< constant dual step
    int max_iters = 500;
    double tol = 1e-4; ///< relative residual ||M(X) - b|| / ||b|| to stop at
    std::optional<int> rank_cap;
    /// Quantization slack of the constrained nuclear-norm problem. Reported,
    /// not enforced.
    double q = 0.0;

    /// tau = 5 sqrt(n1 n2), step = min(1.2 n1 n2 / m', 1.9).
    ///
    /// The step is capped below 2 because the sampling operator is a
    /// coordinate projection; larger steps diverge on Hankel sampling.
    static SvtConfig defaults(int n1, int n2, std::size_t m_prime) {
        SvtConfig c;
        const double cells = static_cast<double>(n1) * static_cast<double>(n2);
        c.tau = 5.0 * std::sqrt(cells);
        c.step = m_prime > 0 ? std::min(1.2 * cells / static_cast<double>(m_prime), 1.9) : 1.9;
        return c;
    }
};

struct CompletionResult {
    cmat X_hat;
    /// Anti-diagonal average of X_hat.
    Snapshot x_hat;
    int iters = 0;
    std::vector<double> residual_trace;
    /// Rank of the shrinkage output at each iteration.
    std::vector<int> rank_trace;
    bool converged = false;
    /// ||P_Omega(X_hat) - Q||_F.
    double q = 0.0;
};

inline void validate(const SvtConfig& c) {
    if (!(c.tau > 0.0)) throw ValidationError("svt: tau must be positive");
    if (!(c.step > 0.0)) throw ValidationError("svt: step must be positive");
    if (!(c.tol > 0.0)) throw ValidationError("svt: tol must be positive");
    if (c.max_iters < 1) throw ValidationError("svt: max_iters must be at least 1");
    if (c.rank_cap && *c.rank_cap < 1) throw ValidationError("svt: rank_cap must be at least 1");
}

/// Mixed-quantized Hankel matrix Q with Omega1/Omega2 tags.
///
/// In per-antenna mode Q = H(y) for the antenna-level output y of
/// quantize_mixed. In per-cell mode each observed cell (i, j) is quantized on
/// its own, with its own dither, from the antenna value x_{i+j-1}.
inline HankelView build_quantized_hankel(const Snapshot& masked, const QuantScheme& scheme) {
    validate(scheme, masked.mask);
    if (scheme.dither_mode == DitherMode::per_antenna) return lift(quantize_mixed(masked, scheme), scheme.high_precision);

    HankelView view = lift(masked, scheme.high_precision);
    const std::int64_t K = scheme.levels();
    const int n2 = view.n2();
    for (int i = 0; i < view.n1(); ++i)
        for (int j = 0; j < n2; ++j) {
            const CellClass c = view.tag(i, j);
            if (c == CellClass::unobserved) {
                view.matrix(i, j) = 0.0;
                continue;
            }
            const auto site = static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n2) +
                              static_cast<std::uint64_t>(j);
            const double delta = c == CellClass::multi_bit ? scheme.delta2 : scheme.delta1;
            const cplx tau{dither(scheme.dither_seed, StreamTag::cell_dither, site, 0, delta),
                           dither(scheme.dither_seed, StreamTag::cell_dither, site, 1, delta)};
            try {
                view.matrix(i, j) = c == CellClass::multi_bit ? quantize_complex(view.matrix(i, j), delta, tau, K)
                                                              : one_bit_complex(view.matrix(i, j), delta, tau);
            } catch (const DynamicRangeViolation& e) {
                const int antenna = HankelView::antenna_of(i, j);
                throw DynamicRangeViolation(std::string(e.what()) + " at antenna " + std::to_string(antenna),
                                            antenna);
            }
        }
    return view;
}

/// Singular value thresholding on the observed cells of Q:
///
///   X^(k) = D_tau(M*(y^(k-1))),   y^(k) = y^(k-1) + step (b - M(X^(k))),
///
/// from y^(0) = 0, where b collects Q over Omega. The solver only sees b and
/// Omega; the one-bit/multi-bit split does not enter.
inline CompletionResult svt_complete(const HankelView& Q, const SvtConfig& cfg) {
    validate(cfg);
    const std::vector<Cell> cells = Q.cells(Subset::omega);
    if (cells.empty()) throw ValidationError("svt: no observed cells");
    const int n1 = Q.n1();
    const int n2 = Q.n2();
    const cvec b = sample(Q.matrix, cells);
    const double b_norm = b.norm();

    CompletionResult out;
    out.X_hat = cmat::Zero(n1, n2);
    if (b_norm == 0.0) {
        out.converged = true;
        out.x_hat = dehankelize(out.X_hat);
        return out;
    }

    cvec y = cvec::Zero(b.size());
    cvec r = b;
    double first = -1.0;
    int blowup = 0;
    for (int k = 1; k <= cfg.max_iters; ++k) {
        const Shrunk s = shrink_with_rank(scatter(y, cells, n1, n2), cfg.tau, cfg.rank_cap);
        out.X_hat = s.value;
        r = b - sample(out.X_hat, cells);
        const double res = r.norm() / b_norm;
        out.residual_trace.push_back(res);
        out.rank_trace.push_back(s.rank);
        out.iters = k;
        if (!std::isfinite(res)) throw NumericalError("svt: residual became non-finite at iteration " + std::to_string(k));
        if (first < 0.0) first = res;
        if (res <= cfg.tol) {
            out.converged = true;
            break;
        }
        blowup = res > 10.0 * first ? blowup + 1 : 0;
        if (blowup >= 20)
            throw NumericalError("svt: diverged, relative residual " + std::to_string(res) + " at iteration " +
                                 std::to_string(k) + " exceeds 10x the initial value for 20 iterations");
        y += cfg.step * r;
    }
    out.q = r.norm();
    out.x_hat = dehankelize(out.X_hat);
    return out;
}

} // namespace mixq

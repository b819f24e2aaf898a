// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mixq/types.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <optional>

namespace mixq {

/// Thin SVD X = U diag(sigma) V^H, sigma descending.
struct SvdFactors {
    cmat U;
    rvec sigma;
    cmat V;

    cmat reconstruct() const { return U * sigma.cast<cplx>().asDiagonal() * V.adjoint(); }
};

/// Dense complex SVD (divide and conquer).
inline SvdFactors svd(const cmat& X) {
    if (!X.allFinite()) throw NumericalError("svd: non-finite entries");
    Eigen::BDCSVD<cmat> dec(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (dec.info() != Eigen::Success) throw NumericalError("svd: decomposition did not converge");
    return {dec.matrixU(), dec.singularValues(), dec.matrixV()};
}

struct Shrunk {
    cmat value;
    /// Singular values kept after thresholding (and truncation).
    int rank = 0;
};

/// Singular value shrinkage D_tau(X) = U diag((sigma_i - tau)^+) V^H,
/// optionally truncated to the leading `rank_cap` components.
inline Shrunk shrink_with_rank(const cmat& X, double tau, std::optional<int> rank_cap = std::nullopt) {
    if (!(tau >= 0.0)) throw ValidationError("shrink: tau must be non-negative");
    const SvdFactors f = svd(X);
    int r = 0;
    while (r < f.sigma.size() && f.sigma(r) > tau) ++r;
    if (rank_cap) r = std::min(r, std::max(*rank_cap, 0));
    Shrunk out;
    out.rank = r;
    if (r == 0) {
        out.value = cmat::Zero(X.rows(), X.cols());
        return out;
    }
    const rvec kept = (f.sigma.head(r).array() - tau).matrix();
    out.value = f.U.leftCols(r) * kept.cast<cplx>().asDiagonal() * f.V.leftCols(r).adjoint();
    return out;
}

inline cmat shrink(const cmat& X, double tau) { return shrink_with_rank(X, tau).value; }

inline double nuclear_norm(const cmat& X) { return svd(X).sigma.sum(); }

} // namespace mixq

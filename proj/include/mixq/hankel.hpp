// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mixq/types.hpp"

#include <algorithm>
#include <cstdint>
#include <vector>

namespace mixq {

/// Observation class of a Hankel cell.
enum class CellClass : std::uint8_t { unobserved = 0, one_bit = 1, multi_bit = 2 };

inline const char* to_string(CellClass c) {
    switch (c) {
    case CellClass::unobserved: return "unobserved";
    case CellClass::one_bit: return "one_bit";
    case CellClass::multi_bit: return "multi_bit";
    }
    return "?";
}

/// Cell subsets: Omega (all observed), Omega1 (one-bit), Omega2 (multi-bit).
enum class Subset { omega, omega1, omega2 };

struct Cell {
    int i; ///< 0-based row
    int j; ///< 0-based column
    bool operator==(const Cell&) const = default;
};

struct HankelDims {
    int n1 = 0;
    int n2 = 0;
};

/// n1 = n2 = (M+1)/2 for odd M, n1 = n2 - 1 = M/2 for even M.
inline HankelDims hankel_dims(int M) {
    if (M < 2) throw ValidationError("hankel: M must be at least 2");
    const int n1 = (M % 2 == 1) ? (M + 1) / 2 : M / 2;
    return {n1, M + 1 - n1};
}

/// Hankel matrix with its cell bookkeeping.
struct HankelView {
    cmat matrix;
    int M = 0;
    /// Row-major n1 x n2 tags.
    std::vector<CellClass> tags;

    int n1() const { return static_cast<int>(matrix.rows()); }
    int n2() const { return static_cast<int>(matrix.cols()); }

    /// 1-based antenna index carried by 0-based cell (i, j).
    static int antenna_of(int i, int j) { return i + j + 1; }

    CellClass tag(int i, int j) const { return tags[static_cast<std::size_t>(i * n2() + j)]; }

    bool in(Subset s, int i, int j) const {
        const CellClass c = tag(i, j);
        switch (s) {
        case Subset::omega: return c != CellClass::unobserved;
        case Subset::omega1: return c == CellClass::one_bit;
        case Subset::omega2: return c == CellClass::multi_bit;
        }
        return false;
    }

    std::vector<Cell> cells(Subset s) const {
        std::vector<Cell> out;
        for (int i = 0; i < n1(); ++i)
            for (int j = 0; j < n2(); ++j)
                if (in(s, i, j)) out.push_back({i, j});
        return out;
    }

    std::size_t count(Subset s) const {
        std::size_t n = 0;
        for (int i = 0; i < n1(); ++i)
            for (int j = 0; j < n2(); ++j) n += in(s, i, j);
        return n;
    }
};

/// Number of Hankel cells on each anti-diagonal k = 1..M (0-based storage).
inline std::vector<int> antidiag_weights(int M) {
    const auto [n1, n2] = hankel_dims(M);
    std::vector<int> w(static_cast<std::size_t>(M));
    for (int k = 1; k <= M; ++k) w[static_cast<std::size_t>(k - 1)] = std::min({k, M + 1 - k, n1, n2});
    return w;
}

/// [H(y)]_{i,j} = y_{i+j-1}.
///
/// Cells on observed anti-diagonals join Omega; with a precision indicator
/// they are split into Omega2 (high precision) and Omega1, otherwise all of
/// Omega is tagged one-bit.
inline HankelView lift(const Snapshot& y, const BitVector& high_precision = {}) {
    const int M = static_cast<int>(y.size());
    const auto [n1, n2] = hankel_dims(M);
    if (y.mask.size() != static_cast<std::size_t>(M))
        throw ValidationError("lift: mask length differs from snapshot length");
    if (!high_precision.empty() && high_precision.size() != y.mask.size())
        throw ValidationError("lift: precision indicator length differs from snapshot length");

    HankelView v;
    v.M = M;
    v.matrix.resize(n1, n2);
    v.tags.assign(static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2), CellClass::unobserved);
    for (int i = 0; i < n1; ++i)
        for (int j = 0; j < n2; ++j) {
            const auto k = static_cast<std::size_t>(i + j);
            v.matrix(i, j) = y.values(static_cast<Eigen::Index>(k));
            if (!y.mask[k]) continue;
            const bool hp = !high_precision.empty() && high_precision[k];
            v.tags[static_cast<std::size_t>(i * n2 + j)] = hp ? CellClass::multi_bit : CellClass::one_bit;
        }
    return v;
}

/// Zeroes every cell outside `subset`; the result's tags keep only that subset.
inline HankelView project(const HankelView& view, Subset subset) {
    HankelView out = view;
    for (int i = 0; i < view.n1(); ++i)
        for (int j = 0; j < view.n2(); ++j) {
            if (view.in(subset, i, j)) continue;
            out.matrix(i, j) = 0.0;
            out.tags[static_cast<std::size_t>(i * view.n2() + j)] = CellClass::unobserved;
        }
    return out;
}

/// Anti-diagonal averaging: y_k = (1/w_k) sum_{i+j-1=k} X_{i,j}.
inline Snapshot dehankelize(const cmat& X) {
    const int n1 = static_cast<int>(X.rows());
    const int n2 = static_cast<int>(X.cols());
    if (n1 < 1 || n2 < 1) throw ValidationError("dehankelize: empty matrix");
    const int M = n1 + n2 - 1;
    Snapshot y;
    y.values = cvec::Zero(M);
    std::vector<int> count(static_cast<std::size_t>(M), 0);
    for (int j = 0; j < n2; ++j)
        for (int i = 0; i < n1; ++i) {
            y.values(i + j) += X(i, j);
            ++count[static_cast<std::size_t>(i + j)];
        }
    for (int k = 0; k < M; ++k) y.values(k) /= static_cast<double>(count[static_cast<std::size_t>(k)]);
    y.mask.assign(static_cast<std::size_t>(M), 1);
    y.kind = SnapshotKind::full;
    return y;
}

/// Sampling operator M(X) = vec(X_{i,j}, (i,j) in cells).
inline cvec sample(const cmat& X, const std::vector<Cell>& cells) {
    cvec b(static_cast<Eigen::Index>(cells.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) b(static_cast<Eigen::Index>(c)) = X(cells[c].i, cells[c].j);
    return b;
}

/// Adjoint of `sample`: zero-filled scatter of b onto `cells`.
inline cmat scatter(const cvec& b, const std::vector<Cell>& cells, int n1, int n2) {
    if (b.size() != static_cast<Eigen::Index>(cells.size()))
        throw ValidationError("scatter: value count differs from cell count");
    cmat X = cmat::Zero(n1, n2);
    for (std::size_t c = 0; c < cells.size(); ++c) X(cells[c].i, cells[c].j) = b(static_cast<Eigen::Index>(c));
    return X;
}

} // namespace mixq

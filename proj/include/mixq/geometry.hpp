// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mixq/types.hpp"

#include <algorithm>
#include <map>
#include <string>
#include <vector>

namespace mixq {

/// TX/RX positions of one radar on the half-wavelength grid.
struct RadarUnit {
    std::vector<int> tx;
    std::vector<int> rx;

    bool operator==(const RadarUnit&) const = default;
};

/// Which TX->RX path first produced a virtual element.
enum class PathLabel { mono1, mono2, bi12, bi21 };

inline const char* to_string(PathLabel p) {
    switch (p) {
    case PathLabel::mono1: return "mono1";
    case PathLabel::mono2: return "mono2";
    case PathLabel::bi12: return "bi12";
    case PathLabel::bi21: return "bi21";
    }
    return "?";
}

/// Distributed virtual sparse array, re-indexed onto a ULA of M slots.
struct ArrayGeometry {
    int M = 0;
    /// Sorted, distinct, 1-based ULA slots occupied by virtual elements.
    std::vector<int> omega_prime;
    /// Provenance of each entry of omega_prime (same order).
    std::vector<PathLabel> path_labels;
    /// Radar separation in grid units. Carried along, never used.
    int d0 = 0;
    /// Number of virtual elements before de-duplication.
    int multiplicity = 0;
    /// Raw position that was mapped to slot 1.
    int origin = 0;

    std::size_t size() const { return omega_prime.size(); }

    bool contains(int slot) const {
        return std::binary_search(omega_prime.begin(), omega_prime.end(), slot);
    }
};

namespace detail {

inline void check_positions(const std::vector<int>& p, const std::string& what) {
    if (p.empty()) throw ValidationError(what + ": position list is empty");
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] <= 0) throw ValidationError(what + ": positions must be positive integers");
        if (i > 0 && p[i] <= p[i - 1])
            throw ValidationError(what + ": positions must be strictly increasing");
    }
}

} // namespace detail

inline void validate(const RadarUnit& r, const std::string& name) {
    detail::check_positions(r.tx, name + ".tx");
    detail::check_positions(r.rx, name + ".rx");
}

/// Virtual array from all four TX->RX path pairs of two radars.
///
/// Every sum t + r over the monostatic (1->1, 2->2) and bistatic (1->2, 2->1)
/// pairs becomes a virtual element. Coincident sums are merged and the result
/// is shifted so the smallest position lands on slot 1.
inline ArrayGeometry synthesize_virtual_array(const RadarUnit& radar1, const RadarUnit& radar2,
                                              int d0 = 0) {
    validate(radar1, "radar1");
    validate(radar2, "radar2");

    struct Path {
        const RadarUnit& tx_unit;
        const RadarUnit& rx_unit;
        PathLabel label;
    };
    const Path paths[] = {
        {radar1, radar1, PathLabel::mono1},
        {radar2, radar2, PathLabel::mono2},
        {radar1, radar2, PathLabel::bi12},
        {radar2, radar1, PathLabel::bi21},
    };

    std::map<int, PathLabel> positions;
    int raw = 0;
    for (const auto& p : paths)
        for (int t : p.tx_unit.tx)
            for (int r : p.rx_unit.rx) {
                positions.try_emplace(t + r, p.label);
                ++raw;
            }

    ArrayGeometry g;
    g.d0 = d0;
    g.multiplicity = raw;
    g.origin = positions.begin()->first;
    g.omega_prime.reserve(positions.size());
    g.path_labels.reserve(positions.size());
    for (const auto& [pos, label] : positions) {
        g.omega_prime.push_back(pos - g.origin + 1);
        g.path_labels.push_back(label);
    }
    g.M = g.omega_prime.back();
    return g;
}

/// m_i = 1 iff slot i is a virtual element; 0-based storage of slots 1..M.
inline BitVector masking_vector(const ArrayGeometry& geom) {
    BitVector m(static_cast<std::size_t>(geom.M), 0);
    for (int slot : geom.omega_prime) m[static_cast<std::size_t>(slot - 1)] = 1;
    return m;
}

} // namespace mixq

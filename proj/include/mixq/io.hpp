// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mixq/completion.hpp"
#include "mixq/hankel.hpp"
#include "mixq/spectrum.hpp"
#include "mixq/theory.hpp"
#include "mixq/types.hpp"

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

/// CSV interchange. Numbers go through std::to_chars / std::from_chars, so
/// output is locale-independent and doubles round-trip exactly.
namespace mixq::io {

inline std::string fmt(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
    return {buf, res.ptr};
}

inline std::string fmt(long long v) { return std::to_string(v); }

inline double parse_double(std::string_view s, const std::string& where) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ValidationError(where + ": cannot parse number '" + std::string(s) + "'");
    return v;
}

inline long long parse_int(std::string_view s, const std::string& where) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ValidationError(where + ": cannot parse integer '" + std::string(s) + "'");
    return v;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

/// FNV-1a 64-bit digest, used for scenario and manifest hashes.
inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string s(16, '0');
    for (int i = 15; i >= 0; --i, v >>= 4) s[static_cast<std::size_t>(i)] = digits[v & 0xf];
    return s;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ValidationError("cannot open " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::filesystem::path& p, std::string_view content) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write " + p.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw ValidationError("write failed for " + p.string());
}

namespace detail {

inline std::vector<std::vector<std::string_view>> rows(std::string_view text, std::string_view header,
                                                       const std::string& what) {
    std::vector<std::vector<std::string_view>> out;
    std::size_t pos = 0;
    bool first = true;
    while (pos < text.size()) {
        auto end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        if (first) {
            if (line != header) throw ValidationError(what + ": expected header '" + std::string(header) + "'");
            first = false;
            continue;
        }
        out.push_back(split(line));
    }
    if (first) throw ValidationError(what + ": empty file");
    return out;
}

} // namespace detail

// Snapshot: index (1-based), re, im, mask.
inline constexpr std::string_view kSnapshotHeader = "index,re,im,mask";

inline std::string snapshot_csv(const Snapshot& y) {
    std::string s(kSnapshotHeader);
    s += '\n';
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        s += std::to_string(i + 1) + ',' + fmt(y.values(i).real()) + ',' + fmt(y.values(i).imag()) + ',' +
             (y.mask[static_cast<std::size_t>(i)] ? '1' : '0') + '\n';
    }
    return s;
}

inline Snapshot parse_snapshot_csv(std::string_view text, SnapshotKind kind, const std::string& what = "snapshot") {
    const auto r = detail::rows(text, kSnapshotHeader, what);
    Snapshot y;
    y.kind = kind;
    y.values.resize(static_cast<Eigen::Index>(r.size()));
    y.mask.resize(r.size());
    for (std::size_t k = 0; k < r.size(); ++k) {
        const std::string where = what + " row " + std::to_string(k + 1);
        if (r[k].size() != 4) throw ValidationError(where + ": expected 4 columns");
        if (parse_int(r[k][0], where) != static_cast<long long>(k + 1))
            throw ValidationError(where + ": indices must run 1..M in order");
        y.values(static_cast<Eigen::Index>(k)) = {parse_double(r[k][1], where), parse_double(r[k][2], where)};
        const auto m = parse_int(r[k][3], where);
        if (m != 0 && m != 1) throw ValidationError(where + ": mask must be 0 or 1");
        y.mask[k] = static_cast<std::uint8_t>(m);
    }
    return y;
}

// Hankel matrix: i, j (1-based), re, im, subset tag.
inline constexpr std::string_view kHankelHeader = "i,j,re,im,subset";

inline std::string hankel_csv(const HankelView& v) {
    std::string s(kHankelHeader);
    s += '\n';
    for (int i = 0; i < v.n1(); ++i)
        for (int j = 0; j < v.n2(); ++j)
            s += std::to_string(i + 1) + ',' + std::to_string(j + 1) + ',' + fmt(v.matrix(i, j).real()) + ',' +
                 fmt(v.matrix(i, j).imag()) + ',' + to_string(v.tag(i, j)) + '\n';
    return s;
}

inline HankelView parse_hankel_csv(std::string_view text, const std::string& what = "hankel") {
    const auto r = detail::rows(text, kHankelHeader, what);
    int n1 = 0, n2 = 0;
    for (std::size_t k = 0; k < r.size(); ++k) {
        const std::string where = what + " row " + std::to_string(k + 1);
        if (r[k].size() != 5) throw ValidationError(where + ": expected 5 columns");
        n1 = std::max(n1, static_cast<int>(parse_int(r[k][0], where)));
        n2 = std::max(n2, static_cast<int>(parse_int(r[k][1], where)));
    }
    if (static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2) != r.size() || n1 < 1)
        throw ValidationError(what + ": expected one row per cell of an n1 x n2 grid");
    HankelView v;
    v.M = n1 + n2 - 1;
    v.matrix = cmat::Zero(n1, n2);
    v.tags.assign(r.size(), CellClass::unobserved);
    std::vector<char> seen(r.size(), 0);
    for (std::size_t k = 0; k < r.size(); ++k) {
        const std::string where = what + " row " + std::to_string(k + 1);
        const int i = static_cast<int>(parse_int(r[k][0], where)) - 1;
        const int j = static_cast<int>(parse_int(r[k][1], where)) - 1;
        if (i < 0 || j < 0) throw ValidationError(where + ": indices are 1-based");
        const auto idx = static_cast<std::size_t>(i * n2 + j);
        if (seen[idx]) throw ValidationError(where + ": duplicate cell");
        seen[idx] = 1;
        v.matrix(i, j) = {parse_double(r[k][2], where), parse_double(r[k][3], where)};
        const std::string_view tag = r[k][4];
        if (tag == "one_bit") v.tags[idx] = CellClass::one_bit;
        else if (tag == "multi_bit") v.tags[idx] = CellClass::multi_bit;
        else if (tag != "unobserved") throw ValidationError(where + ": unknown subset tag '" + std::string(tag) + "'");
    }
    return v;
}

inline std::string trace_csv(const CompletionResult& c) {
    std::string s = "k,residual,rank\n";
    for (std::size_t k = 0; k < c.residual_trace.size(); ++k)
        s += std::to_string(k + 1) + ',' + fmt(c.residual_trace[k]) + ',' + std::to_string(c.rank_trace[k]) + '\n';
    return s;
}

inline std::string spectrum_csv(const AngleSpectrum& sp) {
    std::string s = "u,theta_deg,magnitude_db,source\n";
    for (int t = 0; t < sp.size(); ++t)
        s += fmt(sp.u(t)) + ',' + fmt(u_to_deg(sp.u(t))) + ',' + fmt(sp.magnitude_db(t)) + ',' + to_string(sp.source) +
             '\n';
    return s;
}

inline std::string peaks_csv(const PeakList& sla, const PeakList& completed) {
    std::string s = "source,rank,theta_deg,u,level_db\n";
    auto add = [&](const PeakList& p, const char* src) {
        for (std::size_t k = 0; k < p.peaks.size(); ++k)
            s += std::string(src) + ',' + std::to_string(k + 1) + ',' + fmt(p.peaks[k].theta_deg) + ',' +
                 fmt(p.peaks[k].u) + ',' + fmt(p.peaks[k].level_db) + '\n';
    };
    add(sla, "sla_zero_filled");
    add(completed, "completed");
    return s;
}

inline std::string embedding_csv(const EmbeddingReport& rep) {
    std::string s = "epsilon,empirical,bound,bound_concentration,sample_count\n";
    for (const auto& r : rep.rows)
        s += fmt(r.epsilon) + ',' + fmt(r.empirical) + ',' + fmt(r.bound) + ',' + fmt(r.bound_concentration) + ',' +
             fmt(r.sample_count) + '\n';
    return s;
}

inline std::string checks_csv(const std::vector<McCheck>& checks) {
    std::string s = "name,expected,mean,stderr,trials,pass\n";
    for (const auto& c : checks)
        s += c.name + ',' + fmt(c.expected) + ',' + fmt(c.mean) + ',' + fmt(c.stderr_) + ',' + std::to_string(c.trials) +
             ',' + (c.pass ? "1" : "0") + '\n';
    return s;
}

} // namespace mixq::io

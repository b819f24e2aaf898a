// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mixq/geometry.hpp"
#include "mixq/io.hpp"
#include "mixq/quant.hpp"
#include "mixq/signal.hpp"
#include "mixq/spectrum.hpp"
#include "mixq/types.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <array>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace mixq {

/// Where the four multi-bit ADCs go.
enum class Placement { edges, last4, first4, explicit_slots };

inline const char* to_string(Placement p) {
    switch (p) {
    case Placement::edges: return "edges";
    case Placement::last4: return "last4";
    case Placement::first4: return "first4";
    case Placement::explicit_slots: return "explicit";
    }
    return "?";
}

/// Monte-Carlo settings of the verify-theory suite.
struct TheoryConfig {
    std::optional<std::uint64_t> seed;

    long dither_trials = 1'000'000;
    /// (a, b, delta) triples.
    std::vector<std::array<double, 3>> dither_grid{{0.7, 0.2, 1.0}, {3.2, -1.1, 0.5}, {-2.0, -2.0, 0.25}};

    int n1 = 16;
    int n2 = 16;
    int rank = 2;
    double alpha = 1.0;
    long m_prime = 128;
    long levels = 8;

    long sampling_pairs = 5;
    long sampling_trials = 2000;

    std::vector<double> epsilon_factors{0.1, 0.2, 0.4};
    long embedding_trials = 2000;

    long theorem_trials = 2000;
    long theorem_m1 = 100;
    long theorem_m2 = 28;
    int theorem_bits = 4;
    double eps1 = 0.25;
    double eps2 = 0.25;
    double perturbation = 0.01;

    bool operator==(const TheoryConfig&) const = default;
};

/// One experiment: geometry, scene, quantizer, solver and spectrum settings
/// plus every seed. Nothing is drawn from the environment.
struct Scenario {
    std::string name = "scenario";
    std::string output_dir;

    std::vector<int> tx1{1, 9, 25};
    std::vector<int> rx1{1, 6, 7, 8};
    std::vector<int> tx2{51, 67, 75};
    std::vector<int> rx2{68, 69, 70, 75};
    int d0 = 25;

    std::vector<double> angles_deg;
    double snr_db = std::numeric_limits<double>::infinity();

    int bits = 10;
    double margin = 0.0;
    Placement placement = Placement::first4;
    std::vector<int> slots; ///< 1-based, explicit placement only
    DitherMode dither_mode = DitherMode::per_cell;

    std::optional<double> tau;
    std::optional<double> step;
    std::optional<double> tol;
    std::optional<int> max_iters;
    std::optional<int> rank_cap;

    int n_fft = 1024;
    Window window = Window::rectangular;

    std::optional<std::uint64_t> seed_signal;
    std::optional<std::uint64_t> seed_dither;

    TheoryConfig theory;

    RadarUnit radar1() const { return {tx1, rx1}; }
    RadarUnit radar2() const { return {tx2, rx2}; }

    TargetScene scene() const {
        TargetScene s;
        s.angles_deg = angles_deg;
        s.snr_db = snr_db;
        return s;
    }

    bool operator==(const Scenario&) const = default;
};

namespace detail {

inline std::string trim(std::string s) {
    const auto ws = [](unsigned char c) { return std::isspace(c) != 0; };
    while (!s.empty() && ws(static_cast<unsigned char>(s.back()))) s.pop_back();
    std::size_t k = 0;
    while (k < s.size() && ws(static_cast<unsigned char>(s[k]))) ++k;
    return s.substr(k);
}

/// Splits on whitespace and commas.
inline std::vector<std::string> tokens(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',' || std::isspace(static_cast<unsigned char>(c))) {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
}

template <class Int>
Int parse_integer(const std::string& text, const std::string& field) {
    const std::string s = trim(text);
    Int v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ValidationError(field + ": expected an integer, got '" + s + "'");
    return v;
}

inline double parse_real(const std::string& text, const std::string& field) {
    return io::parse_double(trim(text), field);
}

inline std::vector<int> parse_int_list(const std::string& text, const std::string& field) {
    std::vector<int> out;
    for (const auto& t : tokens(text)) out.push_back(parse_integer<int>(t, field));
    return out;
}

inline std::vector<double> parse_real_list(const std::string& text, const std::string& field) {
    std::vector<double> out;
    for (const auto& t : tokens(text)) out.push_back(parse_real(t, field));
    return out;
}

inline std::string join(const std::vector<int>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? " " : "") + std::to_string(v[k]);
    return s;
}

inline std::string join(const std::vector<double>& v) {
    std::string s;
    for (std::size_t k = 0; k < v.size(); ++k) s += (k ? " " : "") + io::fmt(v[k]);
    return s;
}

} // namespace detail

/// Field-level checks that do not need the derived geometry.
inline void validate(const Scenario& s) {
    if (s.name.empty()) throw ValidationError("scenario.name: must not be empty");
    for (char c : s.name)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.'))
            throw ValidationError("scenario.name: only letters, digits, '_', '-' and '.' are allowed");
    const std::pair<const char*, const std::vector<int>*> lists[] = {
        {"geometry.radar1_tx", &s.tx1}, {"geometry.radar1_rx", &s.rx1},
        {"geometry.radar2_tx", &s.tx2}, {"geometry.radar2_rx", &s.rx2}};
    for (const auto& [field, v] : lists) {
        detail::check_positions(*v, field);
    }
    if (s.angles_deg.empty()) throw ValidationError("scene.angles_deg: at least one target angle is required");
    for (double a : s.angles_deg)
        if (!(std::abs(a) < 90.0)) throw ValidationError("scene.angles_deg: angles must lie in (-90, 90)");
    if (std::isnan(s.snr_db)) throw ValidationError("scene.snr_db: must be a number or inf");
    if (s.bits < 2 || s.bits > 31) throw ValidationError("quant.bits: must lie in [2, 31]");
    if (!(s.margin >= 0.0) || !std::isfinite(s.margin)) throw ValidationError("quant.margin: must be finite and >= 0");
    if (s.placement == Placement::explicit_slots && s.slots.empty())
        throw ValidationError("quant.slots: explicit placement needs at least one slot");
    if (s.placement != Placement::explicit_slots && !s.slots.empty())
        throw ValidationError("quant.slots: only allowed with placement = explicit");
    if (s.tau && !(*s.tau > 0.0)) throw ValidationError("svt.tau: must be positive");
    if (s.step && !(*s.step > 0.0)) throw ValidationError("svt.step: must be positive");
    if (s.tol && !(*s.tol > 0.0)) throw ValidationError("svt.tol: must be positive");
    if (s.max_iters && *s.max_iters < 1) throw ValidationError("svt.max_iters: must be at least 1");
    if (s.rank_cap && *s.rank_cap < 1) throw ValidationError("svt.rank_cap: must be at least 1");
    if (!is_power_of_two(s.n_fft)) throw ValidationError("spectrum.n_fft: must be a power of two");
}

inline void validate(const TheoryConfig& t) {
    if (t.dither_trials < 10000) throw ValidationError("theory.dither_trials: must be at least 10000");
    for (const auto& g : t.dither_grid)
        if (!(g[2] > 0.0)) throw ValidationError("theory.dither_grid: delta must be positive");
    if (t.n1 < 1 || t.n2 < 1) throw ValidationError("theory.n1/n2: must be positive");
    if (t.rank < 1 || t.rank > std::min(t.n1, t.n2)) throw ValidationError("theory.rank: must lie in [1, min(n1, n2)]");
    if (!(t.alpha > 0.0)) throw ValidationError("theory.alpha: must be positive");
    const long cells = static_cast<long>(t.n1) * t.n2;
    if (t.m_prime < 1 || t.m_prime > cells) throw ValidationError("theory.m_prime: must lie in [1, n1 n2]");
    if (t.levels < 2) throw ValidationError("theory.levels: must be at least 2");
    if (t.sampling_pairs < 1) throw ValidationError("theory.sampling_pairs: must be at least 1");
    if (t.sampling_trials < 1) throw ValidationError("theory.sampling_trials: must be at least 1");
    if (t.embedding_trials < 1) throw ValidationError("theory.embedding_trials: must be at least 1");
    if (t.theorem_trials < 1) throw ValidationError("theory.theorem_trials: must be at least 1");
    for (double e : t.epsilon_factors)
        if (!(e > 0.0)) throw ValidationError("theory.epsilon_factors: must be positive");
    if (t.theorem_m1 < 0 || t.theorem_m2 < 0 || t.theorem_m1 + t.theorem_m2 > cells)
        throw ValidationError("theory.theorem_m1/m2: must be non-negative with m1 + m2 <= n1 n2");
    if (t.theorem_bits < 2 || t.theorem_bits > 31) throw ValidationError("theory.theorem_bits: must lie in [2, 31]");
    if (!(t.eps1 > 0.0) || !(t.eps2 > 0.0)) throw ValidationError("theory.eps1/eps2: must be positive");
    if (!(t.perturbation >= 0.0)) throw ValidationError("theory.perturbation: must be non-negative");
}

/// Parses the INI text of a scenario. Unknown sections and keys are errors.
inline Scenario parse_scenario(const std::string& text, const std::string& origin = "config") {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ValidationError(origin + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }

    Scenario s;
    TheoryConfig& t = s.theory;
    using Setter = std::function<void(const std::string&, const std::string&)>;
    const auto i32 = [](int& dst) -> Setter {
        return [&dst](const std::string& v, const std::string& f) { dst = detail::parse_integer<int>(v, f); };
    };
    const auto i64 = [](long& dst) -> Setter {
        return [&dst](const std::string& v, const std::string& f) { dst = detail::parse_integer<long>(v, f); };
    };
    const auto real = [](double& dst) -> Setter {
        return [&dst](const std::string& v, const std::string& f) { dst = detail::parse_real(v, f); };
    };
    const auto ints = [](std::vector<int>& dst) -> Setter {
        return [&dst](const std::string& v, const std::string& f) { dst = detail::parse_int_list(v, f); };
    };
    const auto reals = [](std::vector<double>& dst) -> Setter {
        return [&dst](const std::string& v, const std::string& f) { dst = detail::parse_real_list(v, f); };
    };
    const auto opt_real = [](std::optional<double>& dst) -> Setter {
        return [&dst](const std::string& v, const std::string& f) { dst = detail::parse_real(v, f); };
    };
    const auto opt_int = [](std::optional<int>& dst) -> Setter {
        return [&dst](const std::string& v, const std::string& f) { dst = detail::parse_integer<int>(v, f); };
    };
    const auto seed = [](std::optional<std::uint64_t>& dst) -> Setter {
        return [&dst](const std::string& v, const std::string& f) {
            dst = detail::parse_integer<std::uint64_t>(v, f);
        };
    };

    const std::map<std::string, std::map<std::string, Setter>> schema = {
        {"scenario",
         {{"name", [&](const std::string& v, const std::string&) { s.name = detail::trim(v); }},
          {"output_dir", [&](const std::string& v, const std::string&) { s.output_dir = detail::trim(v); }}}},
        {"geometry",
         {{"radar1_tx", ints(s.tx1)},
          {"radar1_rx", ints(s.rx1)},
          {"radar2_tx", ints(s.tx2)},
          {"radar2_rx", ints(s.rx2)},
          {"d0", i32(s.d0)}}},
        {"scene", {{"angles_deg", reals(s.angles_deg)}, {"snr_db", real(s.snr_db)}}},
        {"quant",
         {{"bits", i32(s.bits)},
          {"margin", real(s.margin)},
          {"placement",
           [&](const std::string& v, const std::string& f) {
               const std::string p = detail::trim(v);
               if (p == "edges") s.placement = Placement::edges;
               else if (p == "last4") s.placement = Placement::last4;
               else if (p == "first4") s.placement = Placement::first4;
               else if (p == "explicit") s.placement = Placement::explicit_slots;
               else throw ValidationError(f + ": expected edges, last4, first4 or explicit, got '" + p + "'");
           }},
          {"slots", ints(s.slots)},
          {"dither_mode",
           [&](const std::string& v, const std::string& f) {
               const std::string m = detail::trim(v);
               if (m == "per_cell") s.dither_mode = DitherMode::per_cell;
               else if (m == "per_antenna") s.dither_mode = DitherMode::per_antenna;
               else throw ValidationError(f + ": expected per_cell or per_antenna, got '" + m + "'");
           }}}},
        {"svt",
         {{"tau", opt_real(s.tau)},
          {"step", opt_real(s.step)},
          {"tol", opt_real(s.tol)},
          {"max_iters", opt_int(s.max_iters)},
          {"rank_cap", opt_int(s.rank_cap)}}},
        {"spectrum",
         {{"n_fft", i32(s.n_fft)},
          {"window",
           [&](const std::string& v, const std::string& f) {
               const std::string w = detail::trim(v);
               if (w == "rectangular") s.window = Window::rectangular;
               else if (w == "hann") s.window = Window::hann;
               else throw ValidationError(f + ": expected rectangular or hann, got '" + w + "'");
           }}}},
        {"seeds", {{"signal", seed(s.seed_signal)}, {"dither", seed(s.seed_dither)}}},
        {"theory",
         {{"seed", seed(t.seed)},
          {"dither_trials", i64(t.dither_trials)},
          {"dither_grid",
           [&](const std::string& v, const std::string& f) {
               t.dither_grid.clear();
               std::string rest = v;
               std::size_t pos = 0;
               while (true) {
                   const auto bar = rest.find('|', pos);
                   const auto vals = detail::parse_real_list(rest.substr(pos, bar - pos), f);
                   if (vals.size() != 3) throw ValidationError(f + ": each entry must be 'a b delta'");
                   t.dither_grid.push_back({vals[0], vals[1], vals[2]});
                   if (bar == std::string::npos) break;
                   pos = bar + 1;
               }
           }},
          {"n1", i32(t.n1)},
          {"n2", i32(t.n2)},
          {"rank", i32(t.rank)},
          {"alpha", real(t.alpha)},
          {"m_prime", i64(t.m_prime)},
          {"levels", i64(t.levels)},
          {"sampling_pairs", i64(t.sampling_pairs)},
          {"sampling_trials", i64(t.sampling_trials)},
          {"epsilon_factors", reals(t.epsilon_factors)},
          {"embedding_trials", i64(t.embedding_trials)},
          {"theorem_trials", i64(t.theorem_trials)},
          {"theorem_m1", i64(t.theorem_m1)},
          {"theorem_m2", i64(t.theorem_m2)},
          {"theorem_bits", i32(t.theorem_bits)},
          {"eps1", real(t.eps1)},
          {"eps2", real(t.eps2)},
          {"perturbation", real(t.perturbation)}}},
    };

    for (const auto& [section, body] : tree) {
        const auto sec = schema.find(section);
        if (sec == schema.end()) {
            if (!body.data().empty()) throw ValidationError(origin + ": key '" + section + "' outside any section");
            throw ValidationError(origin + ": unknown section [" + section + "]");
        }
        for (const auto& [key, node] : body) {
            const std::string field = section + "." + key;
            const auto k = sec->second.find(key);
            if (k == sec->second.end()) throw ValidationError(origin + ": unknown key " + field);
            k->second(node.data(), field);
        }
    }
    validate(s);
    validate(s.theory);
    return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
    return parse_scenario(io::read_file(path), path.string());
}

/// Canonical INI text: every field written in a fixed order, doubles in
/// shortest round-trip form. parse_scenario(serialize(s)) == s.
inline std::string serialize(const Scenario& s) {
    const TheoryConfig& t = s.theory;
    std::ostringstream o;
    o << "[scenario]\nname = " << s.name << '\n';
    if (!s.output_dir.empty()) o << "output_dir = " << s.output_dir << '\n';
    o << "\n[geometry]\nradar1_tx = " << detail::join(s.tx1) << "\nradar1_rx = " << detail::join(s.rx1)
      << "\nradar2_tx = " << detail::join(s.tx2) << "\nradar2_rx = " << detail::join(s.rx2) << "\nd0 = " << s.d0
      << "\n\n[scene]\nangles_deg = " << detail::join(s.angles_deg) << "\nsnr_db = " << io::fmt(s.snr_db)
      << "\n\n[quant]\nbits = " << s.bits << "\nmargin = " << io::fmt(s.margin)
      << "\nplacement = " << to_string(s.placement) << '\n';
    if (!s.slots.empty()) o << "slots = " << detail::join(s.slots) << '\n';
    o << "dither_mode = " << to_string(s.dither_mode) << "\n\n[svt]\n";
    if (s.tau) o << "tau = " << io::fmt(*s.tau) << '\n';
    if (s.step) o << "step = " << io::fmt(*s.step) << '\n';
    if (s.tol) o << "tol = " << io::fmt(*s.tol) << '\n';
    if (s.max_iters) o << "max_iters = " << *s.max_iters << '\n';
    if (s.rank_cap) o << "rank_cap = " << *s.rank_cap << '\n';
    o << "\n[spectrum]\nn_fft = " << s.n_fft << "\nwindow = " << to_string(s.window) << "\n\n[seeds]\n";
    if (s.seed_signal) o << "signal = " << *s.seed_signal << '\n';
    if (s.seed_dither) o << "dither = " << *s.seed_dither << '\n';
    o << "\n[theory]\n";
    if (t.seed) o << "seed = " << *t.seed << '\n';
    o << "dither_trials = " << t.dither_trials << "\ndither_grid = ";
    for (std::size_t k = 0; k < t.dither_grid.size(); ++k)
        o << (k ? " | " : "") << io::fmt(t.dither_grid[k][0]) << ' ' << io::fmt(t.dither_grid[k][1]) << ' '
          << io::fmt(t.dither_grid[k][2]);
    o << "\nn1 = " << t.n1 << "\nn2 = " << t.n2 << "\nrank = " << t.rank << "\nalpha = " << io::fmt(t.alpha)
      << "\nm_prime = " << t.m_prime << "\nlevels = " << t.levels << "\nsampling_pairs = " << t.sampling_pairs
      << "\nsampling_trials = " << t.sampling_trials << "\nepsilon_factors = " << detail::join(t.epsilon_factors)
      << "\nembedding_trials = " << t.embedding_trials << "\ntheorem_trials = " << t.theorem_trials
      << "\ntheorem_m1 = " << t.theorem_m1 << "\ntheorem_m2 = " << t.theorem_m2
      << "\ntheorem_bits = " << t.theorem_bits << "\neps1 = " << io::fmt(t.eps1) << "\neps2 = " << io::fmt(t.eps2)
      << "\nperturbation = " << io::fmt(t.perturbation) << '\n';
    return o.str();
}

inline std::uint64_t scenario_hash(const Scenario& s) { return io::fnv1a64(serialize(s)); }

/// Multi-bit indicator over the M slots (0-based storage, 1-based slots).
///
/// edges: first two and last two observed slots; first4/last4: the four
/// smallest/largest observed slots; explicit: the listed slots, each of
/// which must be observed and distinct.
inline BitVector placement_to_delta(Placement placement, const std::vector<int>& slots, const ArrayGeometry& geom) {
    const auto& w = geom.omega_prime;
    BitVector delta(static_cast<std::size_t>(geom.M), 0);
    auto mark = [&](int slot) { delta[static_cast<std::size_t>(slot - 1)] = 1; };
    if (placement != Placement::explicit_slots) {
        if (w.size() < 4) throw ValidationError("quant.placement: needs at least four observed antennas");
        const std::size_t n = w.size();
        switch (placement) {
        case Placement::edges:
            for (std::size_t k : {std::size_t{0}, std::size_t{1}, n - 2, n - 1}) mark(w[k]);
            break;
        case Placement::first4:
            for (std::size_t k = 0; k < 4; ++k) mark(w[k]);
            break;
        case Placement::last4:
            for (std::size_t k = n - 4; k < n; ++k) mark(w[k]);
            break;
        default: break;
        }
        return delta;
    }
    std::set<int> seen;
    for (int slot : slots) {
        if (slot < 1 || slot > geom.M)
            throw ValidationError("quant.slots: slot " + std::to_string(slot) + " is outside 1.." +
                                  std::to_string(geom.M));
        if (!geom.contains(slot))
            throw ValidationError("quant.slots: slot " + std::to_string(slot) +
                                  " holds no virtual antenna for this geometry");
        if (!seen.insert(slot).second)
            throw ValidationError("quant.slots: slot " + std::to_string(slot) + " listed twice");
        mark(slot);
    }
    return delta;
}

} // namespace mixq

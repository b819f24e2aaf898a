// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mixq/completion.hpp"
#include "mixq/geometry.hpp"
#include "mixq/hankel.hpp"
#include "mixq/io.hpp"
#include "mixq/quant.hpp"
#include "mixq/scenario.hpp"
#include "mixq/signal.hpp"
#include "mixq/spectrum.hpp"
#include "mixq/theory.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#ifndef MIXQ_VERSION
#define MIXQ_VERSION "0.0.0"
#endif

namespace mixq {

inline constexpr const char* kToolVersion = MIXQ_VERSION;

/// Everything one scenario run produces, stage by stage.
struct PipelineResult {
    ArrayGeometry geom;
    SnapshotPair snapshots;
    Snapshot clean; ///< noiseless full-array response
    Scales scales;
    QuantScheme scheme;
    bool multibit_admissible = false;
    HankelView Q;
    SvtConfig svt;
    CompletionResult completion;
    AngleSpectrum sla_spectrum;
    AngleSpectrum completed_spectrum;
    PeakList sla_peaks;
    PeakList completed_peaks;

    std::size_t omega = 0;
    std::size_t omega1 = 0;
    std::size_t omega2 = 0;
    double mixed_rate = 0.0;

    /// ||H(clean) - X_hat||_1 and the recovery bound at eps1 = eps2 = 0.05,
    /// reported side by side. The bound assumes uniform sampling, which the
    /// Hankel pattern is not, so nothing is asserted.
    double recovery_l1 = 0.0;
    double bound_diagnostic = 0.0;

    std::vector<std::pair<std::string, double>> timings_ms;
};

/// Seeds must be present at this point; CLI overrides are applied by the caller.
inline void require_run_seeds(const Scenario& s) {
    if (!s.seed_signal) throw ValidationError("seeds.signal: missing (set it in the config or pass --seed-signal)");
    if (!s.seed_dither) throw ValidationError("seeds.dither: missing (set it in the config or pass --seed-dither)");
}

inline SvtConfig svt_config_for(const Scenario& s, int n1, int n2, std::size_t m_prime) {
    SvtConfig c = SvtConfig::defaults(n1, n2, m_prime);
    if (s.tau) c.tau = *s.tau;
    if (s.step) c.step = *s.step;
    if (s.tol) c.tol = *s.tol;
    if (s.max_iters) c.max_iters = *s.max_iters;
    c.rank_cap = s.rank_cap;
    return c;
}

/// geometry -> signal -> quant -> hankel -> completion -> spectrum.
inline PipelineResult run_pipeline(const Scenario& s) {
    validate(s);
    require_run_seeds(s);
    using clock = std::chrono::steady_clock;
    PipelineResult r;
    auto t0 = clock::now();
    auto lap = [&](const char* stage) {
        const auto t1 = clock::now();
        r.timings_ms.emplace_back(stage, std::chrono::duration<double, std::milli>(t1 - t0).count());
        t0 = t1;
    };

    r.geom = synthesize_virtual_array(s.radar1(), s.radar2(), s.d0);
    if (s.n_fft < r.geom.M) throw ValidationError("spectrum.n_fft: must be at least M = " + std::to_string(r.geom.M));
    lap("geometry");

    const TargetScene scene = s.scene();
    r.snapshots = synthesize_snapshot(scene, r.geom, *s.seed_signal);
    TargetScene quiet = scene;
    quiet.snr_db = std::numeric_limits<double>::infinity();
    r.clean = synthesize_snapshot(quiet, r.geom, *s.seed_signal).full;
    lap("signal");

    r.scales = design_scales(r.snapshots.masked, s.margin, s.bits);
    r.scheme.delta1 = r.scales.delta1;
    r.scheme.delta2 = r.scales.delta2;
    r.scheme.bits = s.bits;
    r.scheme.high_precision = placement_to_delta(s.placement, s.slots, r.geom);
    r.scheme.dither_seed = *s.seed_dither;
    r.scheme.dither_mode = s.dither_mode;
    r.multibit_admissible = multibit_scale_admissible(r.snapshots.masked, r.scheme);
    r.Q = build_quantized_hankel(r.snapshots.masked, r.scheme);
    r.omega = r.Q.count(Subset::omega);
    r.omega1 = r.Q.count(Subset::omega1);
    r.omega2 = r.Q.count(Subset::omega2);
    r.mixed_rate = r.omega1 ? static_cast<double>(r.omega2) / static_cast<double>(r.omega1) : 0.0;
    lap("quantize");

    r.svt = svt_config_for(s, r.Q.n1(), r.Q.n2(), r.omega);
    r.completion = svt_complete(r.Q, r.svt);
    r.recovery_l1 = l1_norm(cmat(lift(r.clean).matrix - r.completion.X_hat));
    r.bound_diagnostic = theorem_bound(r.Q.n1(), r.Q.n2(), 0.05, 0.05);
    lap("complete");

    const int P = static_cast<int>(s.angles_deg.size());
    r.sla_spectrum = angle_spectrum(r.snapshots.masked.values, s.n_fft, SpectrumSource::sla_zero_filled, s.window);
    r.completed_spectrum = angle_spectrum(r.completion.x_hat.values, s.n_fft, SpectrumSource::completed, s.window);
    r.sla_peaks = find_peaks(r.sla_spectrum, P);
    r.completed_peaks = find_peaks(r.completed_spectrum, P);
    lap("spectrum");
    return r;
}

/// Output file names of a run, in manifest order.
inline const std::vector<std::string>& run_output_files() {
    static const std::vector<std::string> files = {
        "snapshot_full.csv", "snapshot_masked.csv", "hankel_quantized.csv", "snapshot_completed.csv",
        "trace.csv",         "spectrum_sla.csv",    "spectrum_completed.csv", "peaks.csv"};
    return files;
}

inline std::vector<std::pair<std::string, std::string>> run_outputs(const PipelineResult& r) {
    return {{"snapshot_full.csv", io::snapshot_csv(r.snapshots.full)},
            {"snapshot_masked.csv", io::snapshot_csv(r.snapshots.masked)},
            {"hankel_quantized.csv", io::hankel_csv(r.Q)},
            {"snapshot_completed.csv", io::snapshot_csv(r.completion.x_hat)},
            {"trace.csv", io::trace_csv(r.completion)},
            {"spectrum_sla.csv", io::spectrum_csv(r.sla_spectrum)},
            {"spectrum_completed.csv", io::spectrum_csv(r.completed_spectrum)},
            {"peaks.csv", io::peaks_csv(r.sla_peaks, r.completed_peaks)}};
}

namespace detail {

inline nlohmann::json peaks_json(const PeakList& p) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Peak& k : p.peaks) arr.push_back({{"theta_deg", k.theta_deg}, {"u", k.u}, {"level_db", k.level_db}});
    return arr;
}

} // namespace detail

/// Manifest of a run. `manifest_hash` covers every field except the timings,
/// so two runs with identical inputs agree on it.
inline nlohmann::json make_manifest(const Scenario& s, const PipelineResult& r,
                                    const std::vector<std::pair<std::string, std::string>>& outputs) {
    using nlohmann::json;
    json m;
    m["scenario"] = s.name;
    m["scenario_hash"] = io::hex64(scenario_hash(s));
    m["tool_version"] = kToolVersion;
    m["seeds"] = {{"signal", *s.seed_signal}, {"dither", *s.seed_dither}};
    m["derived"] = {{"M", r.geom.M},
                    {"virtual_elements", r.geom.size()},
                    {"virtual_elements_raw", r.geom.multiplicity},
                    {"n1", r.Q.n1()},
                    {"n2", r.Q.n2()},
                    {"omega", r.omega},
                    {"omega1", r.omega1},
                    {"omega2", r.omega2},
                    {"mixed_rate", r.mixed_rate},
                    {"delta1", r.scheme.delta1},
                    {"delta2", r.scheme.delta2},
                    {"dynamic_range", r.scales.dynamic_range},
                    {"multibit_scale_admissible", r.multibit_admissible},
                    {"noise_variance", r.snapshots.noise_variance}};
    m["completion"] = {{"tau", r.svt.tau},
                       {"step", r.svt.step},
                       {"iterations", r.completion.iters},
                       {"converged", r.completion.converged},
                       {"final_residual", r.completion.residual_trace.empty() ? 0.0 : r.completion.residual_trace.back()},
                       {"final_rank", r.completion.rank_trace.empty() ? 0 : r.completion.rank_trace.back()},
                       {"q", r.completion.q},
                       {"recovery_l1", r.recovery_l1},
                       {"recovery_bound_eps_0.05", r.bound_diagnostic}};
    m["peaks"] = {{"sla_zero_filled", detail::peaks_json(r.sla_peaks)},
                  {"completed", detail::peaks_json(r.completed_peaks)}};
    json files = json::array();
    for (const auto& [name, body] : outputs) files.push_back({{"file", name}, {"fnv1a64", io::hex64(io::fnv1a64(body))}});
    m["outputs"] = files;
    m["manifest_hash"] = io::hex64(io::fnv1a64(m.dump()));
    json t = json::object();
    for (const auto& [stage, ms] : r.timings_ms) t[stage] = ms;
    m["timings_ms"] = t;
    return m;
}

struct RunRecord {
    PipelineResult result;
    nlohmann::json manifest;
    std::filesystem::path out_dir;
};

/// Runs the pipeline and writes every CSV plus manifest.json into out_dir.
inline RunRecord run_scenario(const Scenario& s, const std::filesystem::path& out_dir) {
    RunRecord rec;
    rec.result = run_pipeline(s);
    rec.out_dir = out_dir;
    const auto outputs = run_outputs(rec.result);
    std::filesystem::create_directories(out_dir);
    for (const auto& [name, body] : outputs) io::write_file(out_dir / name, body);
    rec.manifest = make_manifest(s, rec.result, outputs);
    io::write_file(out_dir / "manifest.json", rec.manifest.dump(2) + "\n");
    return rec;
}

/// Human-readable peak table and the bookkeeping line.
inline std::string summary(const Scenario& s, const PipelineResult& r) {
    std::string out;
    char line[160];
    std::snprintf(line, sizeof line, "scenario %s: M=%d |Omega'|=%zu |Omega|=%zu |Omega1|=%zu |Omega2|=%zu\n",
                  s.name.c_str(), r.geom.M, r.geom.size(), r.omega, r.omega1, r.omega2);
    out += line;
    std::snprintf(line, sizeof line, "mixed rate |Omega2|/|Omega1| = %.4f\n", r.mixed_rate);
    out += line;
    std::snprintf(line, sizeof line, "svt: %d iterations, residual %.3g, rank %d%s\n", r.completion.iters,
                  r.completion.residual_trace.empty() ? 0.0 : r.completion.residual_trace.back(),
                  r.completion.rank_trace.empty() ? 0 : r.completion.rank_trace.back(),
                  r.completion.converged ? "" : " (not converged)");
    out += line;
    out += "  #   true(deg)   completed(deg)  level(dB)   sla(deg)  level(dB)\n";
    std::vector<double> truth = s.angles_deg;
    std::sort(truth.begin(), truth.end());
    auto sorted = [](std::vector<Peak> p) {
        std::sort(p.begin(), p.end(), [](const Peak& a, const Peak& b) { return a.theta_deg < b.theta_deg; });
        return p;
    };
    const auto c = sorted(r.completed_peaks.peaks);
    const auto z = sorted(r.sla_peaks.peaks);
    for (std::size_t k = 0; k < truth.size(); ++k) {
        std::snprintf(line, sizeof line, "%3zu  %9.2f", k + 1, truth[k]);
        out += line;
        if (k < c.size()) std::snprintf(line, sizeof line, "  %14.2f  %9.2f", c[k].theta_deg, c[k].level_db);
        else std::snprintf(line, sizeof line, "  %14s  %9s", "-", "-");
        out += line;
        if (k < z.size()) std::snprintf(line, sizeof line, "  %9.2f  %9.2f\n", z[k].theta_deg, z[k].level_db);
        else std::snprintf(line, sizeof line, "  %9s  %9s\n", "-", "-");
        out += line;
    }
    return out;
}

/// Whether each true angle has a distinct detected peak within tol_deg
/// (greedy matching on sorted lists, which is exact for well-separated
/// truths and peaks).
inline bool peaks_match(const std::vector<double>& truth, const PeakList& found, double tol_deg) {
    if (found.peaks.size() != truth.size()) return false;
    std::vector<double> t = truth, f;
    for (const Peak& p : found.peaks) f.push_back(p.theta_deg);
    std::sort(t.begin(), t.end());
    std::sort(f.begin(), f.end());
    for (std::size_t k = 0; k < t.size(); ++k)
        if (std::abs(t[k] - f[k]) > tol_deg) return false;
    return true;
}

// ---------------------------------------------------------------------------
// verify-theory suite

struct TheoryResult {
    std::vector<McCheck> checks; ///< dither identity, sampling identity, mixed terms
    EmbeddingReport embedding;
    TheoremReport theorem;
    double theorem_sample_count = 0.0;

    bool pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return embedding.pass() && theorem.pass();
    }
};

inline TheoryResult run_theory(const TheoryConfig& t) {
    validate(t);
    if (!t.seed) throw ValidationError("theory.seed: missing (set it in the config or pass --seed)");
    const std::uint64_t seed = *t.seed;
    TheoryResult out;

    for (std::size_t g = 0; g < t.dither_grid.size(); ++g) {
        const auto& [a, b, delta] = t.dither_grid[g];
        out.checks.push_back(verify_dither_identity(a, b, delta, t.dither_trials, mix64(seed + 11 * (g + 1))));
    }

    LowRankSpec spec;
    spec.n1 = t.n1;
    spec.n2 = t.n2;
    spec.r = t.rank;
    spec.alpha = t.alpha;
    const double delta = embedding_delta(t.alpha, t.levels);
    for (long p = 0; p < t.sampling_pairs; ++p) {
        Stream rng(seed, StreamTag::low_rank, 1'000'000 + static_cast<std::uint64_t>(p));
        const rmat X = random_low_rank(spec, rng).real();
        const rmat Y = random_low_rank(spec, rng).real();
        McCheck c = verify_uniform_sampling_identity(X, Y, static_cast<std::size_t>(t.m_prime), delta, t.levels,
                                                     t.sampling_trials, mix64(seed + 101 * (p + 1)));
        c.name += "_pair" + std::to_string(p + 1);
        out.checks.push_back(std::move(c));
    }

    std::vector<double> eps;
    for (double f : t.epsilon_factors) eps.push_back(f * static_cast<double>(t.levels) * delta);
    out.embedding = verify_embedding(spec, static_cast<std::size_t>(t.m_prime), delta, t.levels, eps,
                                     t.embedding_trials, mix64(seed + 7));

    QuantScheme q;
    q.bits = t.theorem_bits;
    q.delta1 = 2.0 * t.alpha;
    q.delta2 = t.alpha / static_cast<double>(q.levels());
    out.theorem = verify_theorem(spec, static_cast<std::size_t>(t.theorem_m1), static_cast<std::size_t>(t.theorem_m2),
                                 q, t.eps1, t.eps2, t.perturbation, t.theorem_trials, mix64(seed + 13));
    out.theorem_sample_count =
        theorem_sample_count(t.eps1, t.eps2, t.rank, t.n1, t.n2, t.alpha, theorem_bound(t.n1, t.n2, t.eps1, t.eps2));
    return out;
}

inline std::string theorem_csv(const TheoryResult& r) {
    const auto& t = r.theorem;
    std::string s = "pairs,consistent,within_bound,frequency,probability_floor,bound,max_error,sample_count,pass\n";
    s += std::to_string(t.pairs) + ',' + std::to_string(t.consistent) + ',' + std::to_string(t.within_bound) + ',' +
         io::fmt(t.frequency()) + ',' + io::fmt(t.probability_floor) + ',' + io::fmt(t.bound) + ',' +
         io::fmt(t.max_error) + ',' + io::fmt(r.theorem_sample_count) + ',' + (t.pass() ? "1" : "0") + '\n';
    return s;
}

} // namespace mixq

// SPDX-License-Identifier: Apache-2.0
// mixq: scenario runner and stage-wise front end.

#include "mixq/mixq.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace mixq;

namespace {

constexpr int kExitFailedChecks = 1;
constexpr int kExitOther = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

struct SeedFlags {
    std::optional<std::uint64_t> signal;
    std::optional<std::uint64_t> dither;

    void apply(Scenario& s) const {
        if (signal) s.seed_signal = signal;
        if (dither) s.seed_dither = dither;
    }
};

fs::path output_dir(const Scenario& s, const std::string& out_flag, bool batch) {
    if (!out_flag.empty()) return batch ? fs::path(out_flag) / s.name : fs::path(out_flag);
    if (!s.output_dir.empty()) return s.output_dir;
    return fs::path("out") / s.name;
}

int cmd_run(const std::vector<std::string>& configs, const std::string& out, const SeedFlags& seeds, unsigned jobs,
            bool quiet) {
    std::vector<Scenario> scenarios;
    for (const auto& c : configs) {
        Scenario s = load_scenario(c);
        seeds.apply(s);
        require_run_seeds(s);
        scenarios.push_back(std::move(s));
    }
    const bool batch = scenarios.size() > 1;
    std::vector<fs::path> dirs;
    for (const auto& s : scenarios) dirs.push_back(output_dir(s, out, batch));
    for (std::size_t i = 0; i < dirs.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (fs::weakly_canonical(dirs[i]) == fs::weakly_canonical(dirs[j]))
                throw ValidationError("run: scenarios '" + scenarios[i].name + "' and '" + scenarios[j].name +
                                      "' would share output directory " + dirs[i].string());

    std::vector<std::string> reports(scenarios.size());
    parallel_for(scenarios.size(), jobs, [&](std::size_t i) {
        const RunRecord rec = run_scenario(scenarios[i], dirs[i]);
        reports[i] = summary(scenarios[i], rec.result) + "manifest " +
                     rec.manifest["manifest_hash"].get<std::string>() + " -> " + (dirs[i] / "manifest.json").string() +
                     "\n";
    });
    if (!quiet)
        for (const auto& r : reports) std::cout << r << '\n';
    return 0;
}

int cmd_verify_theory(const std::string& config, const std::string& out, std::optional<std::uint64_t> seed,
                      std::optional<long> trials, std::optional<long> dither_trials) {
    Scenario s = load_scenario(config);
    TheoryConfig t = s.theory;
    if (seed) t.seed = seed;
    if (trials) t.sampling_trials = t.embedding_trials = t.theorem_trials = *trials;
    if (dither_trials) t.dither_trials = *dither_trials;
    const TheoryResult r = run_theory(t);

    const fs::path dir = out.empty() ? fs::path("out") / (s.name + "_theory") : fs::path(out);
    io::write_file(dir / "checks.csv", io::checks_csv(r.checks));
    io::write_file(dir / "embedding.csv", io::embedding_csv(r.embedding));
    io::write_file(dir / "theorem.csv", theorem_csv(r));

    std::printf("%-44s %12s %12s %10s  %s\n", "check", "expected", "mean", "stderr", "result");
    for (const auto& c : r.checks)
        std::printf("%-44s %12.6f %12.6f %10.2e  %s\n", c.name.c_str(), c.expected, c.mean, c.stderr_,
                    c.pass ? "pass" : "FAIL");
    std::printf("\nembedding (m'=%zu, K=%lld, delta=%.4f, %ld trials)\n", r.embedding.m_prime,
                static_cast<long long>(r.embedding.K), r.embedding.delta, r.embedding.trials);
    std::printf("%10s %12s %12s %12s  %s\n", "epsilon", "empirical", "bound", "bound(2x)", "result");
    for (const auto& row : r.embedding.rows)
        std::printf("%10.4f %12.6f %12.6f %12.6f  %s\n", row.epsilon, row.empirical, row.bound,
                    row.bound_concentration, row.pass ? "pass" : "FAIL");
    const auto& th = r.theorem;
    std::printf("\nrecovery bound: %ld/%ld consistent pairs within %.1f (frequency %.4f, floor %.4f)  %s\n",
                th.within_bound, th.consistent, th.bound, th.frequency(), th.probability_floor,
                th.pass() ? "pass" : "FAIL");
    std::printf("reports written to %s\n", dir.string().c_str());
    return r.pass() ? 0 : kExitFailedChecks;
}

int cmd_synth(const std::string& config, const std::string& out, const SeedFlags& seeds) {
    Scenario s = load_scenario(config);
    seeds.apply(s);
    if (!s.seed_signal) throw ValidationError("seeds.signal: missing (set it in the config or pass --seed-signal)");
    const ArrayGeometry g = synthesize_virtual_array(s.radar1(), s.radar2(), s.d0);
    const SnapshotPair p = synthesize_snapshot(s.scene(), g, *s.seed_signal);
    const fs::path dir = out.empty() ? output_dir(s, "", false) : fs::path(out);
    io::write_file(dir / "snapshot_full.csv", io::snapshot_csv(p.full));
    io::write_file(dir / "snapshot_masked.csv", io::snapshot_csv(p.masked));
    std::printf("M=%d |Omega'|=%zu noise variance %.6g -> %s\n", g.M, g.size(), p.noise_variance,
                dir.string().c_str());
    return 0;
}

int cmd_quantize(const std::string& config, const std::string& snapshot, const std::string& out,
                 const SeedFlags& seeds) {
    Scenario s = load_scenario(config);
    seeds.apply(s);
    if (!s.seed_dither) throw ValidationError("seeds.dither: missing (set it in the config or pass --seed-dither)");
    const ArrayGeometry g = synthesize_virtual_array(s.radar1(), s.radar2(), s.d0);
    const Snapshot masked = io::parse_snapshot_csv(io::read_file(snapshot), SnapshotKind::masked, snapshot);
    if (masked.mask != masking_vector(g))
        throw ValidationError(snapshot + ": mask does not match the configured geometry");
    const Scales sc = design_scales(masked, s.margin, s.bits);
    QuantScheme q;
    q.delta1 = sc.delta1;
    q.delta2 = sc.delta2;
    q.bits = s.bits;
    q.high_precision = placement_to_delta(s.placement, s.slots, g);
    q.dither_seed = *s.seed_dither;
    q.dither_mode = s.dither_mode;
    const HankelView Q = build_quantized_hankel(masked, q);
    const fs::path dir = out.empty() ? output_dir(s, "", false) : fs::path(out);
    io::write_file(dir / "hankel_quantized.csv", io::hankel_csv(Q));
    const auto o1 = Q.count(Subset::omega1), o2 = Q.count(Subset::omega2);
    std::printf("delta1=%.6g delta2=%.6g |Omega|=%zu |Omega1|=%zu |Omega2|=%zu mixed rate %.4f -> %s\n", q.delta1,
                q.delta2, Q.count(Subset::omega), o1, o2, o1 ? static_cast<double>(o2) / o1 : 0.0,
                dir.string().c_str());
    return 0;
}

int cmd_complete(const std::string& config, const std::string& hankel, const std::string& out) {
    const Scenario s = load_scenario(config);
    const HankelView Q = io::parse_hankel_csv(io::read_file(hankel), hankel);
    const SvtConfig cfg = svt_config_for(s, Q.n1(), Q.n2(), Q.count(Subset::omega));
    const CompletionResult c = svt_complete(Q, cfg);
    const fs::path dir = out.empty() ? output_dir(s, "", false) : fs::path(out);
    io::write_file(dir / "snapshot_completed.csv", io::snapshot_csv(c.x_hat));
    io::write_file(dir / "trace.csv", io::trace_csv(c));
    std::printf("svt: %d iterations, residual %.3g, rank %d%s -> %s\n", c.iters,
                c.residual_trace.empty() ? 0.0 : c.residual_trace.back(),
                c.rank_trace.empty() ? 0 : c.rank_trace.back(), c.converged ? "" : " (not converged)",
                dir.string().c_str());
    return 0;
}

int cmd_spectrum(const std::string& snapshot, const std::string& out, int n_fft, const std::string& source,
                 const std::string& window, int peaks) {
    const Snapshot x = io::parse_snapshot_csv(io::read_file(snapshot), SnapshotKind::full, snapshot);
    const SpectrumSource src = source == "sla_zero_filled" ? SpectrumSource::sla_zero_filled : SpectrumSource::completed;
    const Window w = window == "hann" ? Window::hann : Window::rectangular;
    const AngleSpectrum sp = angle_spectrum(x.values, n_fft, src, w);
    io::write_file(out, io::spectrum_csv(sp));
    if (peaks > 0) {
        const PeakList p = find_peaks(sp, peaks);
        std::printf("  #   theta(deg)  level(dB)\n");
        for (std::size_t k = 0; k < p.peaks.size(); ++k)
            std::printf("%3zu  %10.2f  %9.2f\n", k + 1, p.peaks[k].theta_deg, p.peaks[k].level_db);
        if (!p.complete) std::printf("(only %zu local maxima)\n", p.peaks.size());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mixed-precision quantized Hankel completion for sparse-array DOA"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    SeedFlags seeds;
    std::string out;
    auto add_seed_flags = [&](CLI::App* sub) {
        sub->add_option("--seed-signal", seeds.signal, "Override the signal seed");
        sub->add_option("--seed-dither", seeds.dither, "Override the dither seed");
    };

    std::vector<std::string> run_configs;
    unsigned jobs = 1;
    bool quiet = false;
    auto* run = app.add_subcommand("run", "Run complete scenarios and write CSVs plus manifest.json");
    run->add_option("configs", run_configs, "Scenario files")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out, "Output directory (one subdirectory per scenario in batch mode)");
    run->add_option("--jobs,-j", jobs, "Scenarios to run concurrently")->check(CLI::Range(1u, 1024u));
    run->add_flag("--quiet,-q", quiet, "Suppress the peak tables");
    add_seed_flags(run);

    std::string config;
    std::optional<std::uint64_t> theory_seed;
    std::optional<long> trials, dither_trials;
    auto* vt = app.add_subcommand("verify-theory", "Monte-Carlo checks of the quantization identities and bounds");
    vt->add_option("config", config, "Scenario file with a [theory] section")->required()->check(CLI::ExistingFile);
    vt->add_option("--out", out, "Report directory");
    vt->add_option("--seed", theory_seed, "Override theory.seed");
    vt->add_option("--trials", trials, "Trials for the sampling, embedding and recovery checks");
    vt->add_option("--dither-trials", dither_trials, "Trials per dither-identity check");

    auto* synth = app.add_subcommand("synth", "Synthesize full and masked snapshots");
    synth->add_option("config", config, "Scenario file")->required()->check(CLI::ExistingFile);
    synth->add_option("--out", out, "Output directory");
    add_seed_flags(synth);

    std::string snapshot, hankel;
    auto* quant = app.add_subcommand("quantize", "Mixed-precision quantize a masked snapshot into a Hankel matrix");
    quant->add_option("config", config, "Scenario file")->required()->check(CLI::ExistingFile);
    quant->add_option("--snapshot", snapshot, "Masked snapshot CSV")->required()->check(CLI::ExistingFile);
    quant->add_option("--out", out, "Output directory");
    add_seed_flags(quant);

    auto* complete = app.add_subcommand("complete", "Complete a quantized Hankel matrix by SVT");
    complete->add_option("config", config, "Scenario file (svt settings)")->required()->check(CLI::ExistingFile);
    complete->add_option("--hankel", hankel, "Quantized Hankel CSV")->required()->check(CLI::ExistingFile);
    complete->add_option("--out", out, "Output directory");

    int n_fft = 1024, peaks = 0;
    std::string source = "completed", window = "rectangular";
    auto* spec = app.add_subcommand("spectrum", "FFT angle spectrum of a snapshot CSV");
    spec->add_option("--snapshot", snapshot, "Snapshot CSV")->required()->check(CLI::ExistingFile);
    spec->add_option("--out", out, "Spectrum CSV to write")->required();
    spec->add_option("--n-fft", n_fft, "FFT length (power of two)");
    spec->add_option("--source", source, "Source label")->check(CLI::IsMember({"completed", "sla_zero_filled"}));
    spec->add_option("--window", window, "Taper")->check(CLI::IsMember({"rectangular", "hann"}));
    spec->add_option("--peaks", peaks, "Print this many strongest peaks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitValidation;
    }

    try {
        if (*run) return cmd_run(run_configs, out, seeds, jobs, quiet);
        if (*vt) return cmd_verify_theory(config, out, theory_seed, trials, dither_trials);
        if (*synth) return cmd_synth(config, out, seeds);
        if (*quant) return cmd_quantize(config, snapshot, out, seeds);
        if (*complete) return cmd_complete(config, hankel, out);
        if (*spec) return cmd_spectrum(snapshot, out, n_fft, source, window, peaks);
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    } catch (const DynamicRangeViolation& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitOther;
    }
    return 0;
}

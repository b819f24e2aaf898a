#include "mixq/io.hpp"
#include "mixq/pipeline.hpp"
#include "mixq/scenario.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <sys/wait.h>

using namespace mixq;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios{MIXQ_SCENARIO_DIR};

Scenario bundled(const std::string& name) { return load_scenario(kScenarios / (name + ".ini")); }

fs::path scratch(const std::string& tag) {
    const fs::path p = fs::temp_directory_path() / ("mixq_test_cli_" + tag);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

/// Runs the CLI with `args`, output discarded; returns its exit code.
int cli(const std::string& args) {
    const char* exe = std::getenv("MIXQ_CLI");
    if (!exe) return -1;
    const int status = std::system(("\"" + std::string(exe) + "\" " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

/// Message of the first validation error in `text`, appended to a config
/// that is otherwise valid.
std::string parse_error(const std::string& text) {
    try {
        validate(parse_scenario("[scene]\nangles_deg = 10\n" + text, "test.ini"));
    } catch (const ValidationError& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("bundled scenarios round-trip through the canonical form") {
    for (const char* name : {"fig2a", "fig2b", "fig2c", "fig3a", "fig3b", "fig3c", "theory"}) {
        INFO(name);
        const Scenario s = bundled(name);
        const Scenario t = parse_scenario(serialize(s), "round-trip");
        CHECK(t == s);
        CHECK(serialize(t) == serialize(s));
        CHECK(scenario_hash(t) == scenario_hash(s));
    }
}

TEST_CASE("config errors name the offending field") {
    CHECK(parse_error("[quant]\nbitz = 4\n").find("bitz") != std::string::npos);
    CHECK(parse_error("[nonsense]\nx = 1\n").find("nonsense") != std::string::npos);
    CHECK(parse_error("[quant]\nbits = 0\n").find("quant.bits") != std::string::npos);
    CHECK(parse_error("[quant]\nbits = ten\n").find("quant.bits") != std::string::npos);
    CHECK(parse_error("[quant]\nplacement = middle\n").find("quant.placement") != std::string::npos);
    CHECK(parse_error("[svt]\ntau = -1\n").find("svt.tau") != std::string::npos);
    CHECK(parse_error("[spectrum]\nn_fft = 1000\n").find("n_fft") != std::string::npos);
    CHECK(parse_error("[geometry]\nradar1_tx = 3 1\n").find("radar1_tx") != std::string::npos);
    CHECK(parse_error("") == "");
}

TEST_CASE("placement presets") {
    const ArrayGeometry g = synthesize_virtual_array({{1, 9, 25}, {1, 6, 7, 8}}, {{51, 67, 75}, {68, 69, 70, 75}}, 25);
    auto slots = [](const BitVector& d) {
        std::vector<int> out;
        for (std::size_t k = 0; k < d.size(); ++k)
            if (d[k]) out.push_back(static_cast<int>(k) + 1);
        return out;
    };
    CHECK(slots(placement_to_delta(Placement::first4, {}, g)) == std::vector<int>{1, 6, 7, 8});
    CHECK(slots(placement_to_delta(Placement::last4, {}, g)) ==
          std::vector<int>(g.omega_prime.end() - 4, g.omega_prime.end()));
    CHECK(slots(placement_to_delta(Placement::edges, {}, g)) ==
          std::vector<int>{1, 6, g.omega_prime[g.size() - 2], 149});
    CHECK(slots(placement_to_delta(Placement::explicit_slots, {1, 7}, g)) == std::vector<int>{1, 7});
    CHECK_THROWS_AS(placement_to_delta(Placement::explicit_slots, {5}, g), ValidationError);
    CHECK_THROWS_AS(placement_to_delta(Placement::explicit_slots, {1, 1}, g), ValidationError);
    CHECK_THROWS_AS(placement_to_delta(Placement::explicit_slots, {150}, g), ValidationError);
}

TEST_CASE("fig2c run writes a consistent manifest") {
    const fs::path dir = scratch("fig2c");
    const RunRecord rec = run_scenario(bundled("fig2c"), dir);
    const auto& d = rec.manifest.at("derived");
    CHECK(d.at("M") == 149);
    CHECK(d.at("virtual_elements") == 47);
    CHECK(d.at("virtual_elements_raw") == 48);
    CHECK(d.at("omega") == 1893);
    CHECK(d.at("omega1") == 1871);
    CHECK(d.at("omega2") == 22);
    CHECK(d.at("mixed_rate").get<double>() == Catch::Approx(22.0 / 1871.0));
    for (const std::string& f : run_output_files()) CHECK(fs::exists(dir / f));
    CHECK(fs::exists(dir / "manifest.json"));
    CHECK(peaks_match({-34.0, 18.0}, rec.result.completed_peaks, 1.0));

    const auto m = nlohmann::json::parse(io::read_file(dir / "manifest.json"));
    CHECK(m.at("manifest_hash") == rec.manifest.at("manifest_hash"));
    for (const auto& o : m.at("outputs"))
        CHECK(o.at("fnv1a64") == io::hex64(io::fnv1a64(io::read_file(dir / o.at("file").get<std::string>()))));
    fs::remove_all(dir);
}

TEST_CASE("fig3a resolves three targets") {
    const PipelineResult r = run_pipeline(bundled("fig3a"));
    CHECK(r.completed_peaks.peaks.size() == 3);
    CHECK(peaks_match({-28.0, -24.0, 44.0}, r.completed_peaks, 1.0));
}

TEST_CASE("identical inputs give identical manifests") {
    Scenario s = bundled("fig2a");
    s.max_iters = 40;
    const PipelineResult a = run_pipeline(s);
    const PipelineResult b = run_pipeline(s);
    const auto oa = run_outputs(a);
    const auto ob = run_outputs(b);
    CHECK(oa == ob);
    CHECK(make_manifest(s, a, oa).at("manifest_hash") == make_manifest(s, b, ob).at("manifest_hash"));
    Scenario t = s;
    t.seed_dither = *s.seed_dither + 1;
    const PipelineResult c = run_pipeline(t);
    CHECK(make_manifest(t, c, run_outputs(c)).at("manifest_hash") != make_manifest(s, a, oa).at("manifest_hash"));
}

TEST_CASE("missing seeds are a validation error") {
    Scenario s = bundled("fig2c");
    s.seed_dither.reset();
    CHECK_THROWS_AS(run_pipeline(s), ValidationError);
}

TEST_CASE("command-line exit codes and stage-wise runs") {
    REQUIRE(std::getenv("MIXQ_CLI") != nullptr);
    const fs::path dir = scratch("exit");
    const std::string theory = (kScenarios / "theory.ini").string();
    const std::string fig2c = (kScenarios / "fig2c.ini").string();

    CHECK(cli("--help") == 0);
    CHECK(cli("no-such-command") == 2);
    CHECK(cli("verify-theory " + theory + " --trials 0 --out " + (dir / "vt").string()) == 2);

    io::write_file(dir / "bad.ini", "[quant]\nbits = 0\n");
    CHECK(cli("run " + (dir / "bad.ini").string() + " --out " + (dir / "bad").string()) == 2);
    io::write_file(dir / "unknown.ini", "[svt]\nspeed = 3\n");
    CHECK(cli("run " + (dir / "unknown.ini").string() + " --out " + (dir / "bad").string()) == 2);

    // Stage-wise: synth -> quantize -> complete -> spectrum.
    const fs::path st = dir / "stages";
    REQUIRE(cli("synth " + fig2c + " --out " + st.string()) == 0);
    REQUIRE(fs::exists(st / "snapshot_masked.csv"));
    REQUIRE(cli("quantize " + fig2c + " --snapshot " + (st / "snapshot_masked.csv").string() + " --out " + st.string()) == 0);
    REQUIRE(fs::exists(st / "hankel_quantized.csv"));
    REQUIRE(cli("complete " + fig2c + " --hankel " + (st / "hankel_quantized.csv").string() + " --out " + st.string()) == 0);
    REQUIRE(fs::exists(st / "snapshot_completed.csv"));
    REQUIRE(cli("spectrum --snapshot " + (st / "snapshot_completed.csv").string() + " --out " +
                (st / "spectrum.csv").string() + " --peaks 2") == 0);

    // The stage-wise result matches a full run of the same scenario.
    const fs::path full = dir / "full";
    REQUIRE(cli("run " + fig2c + " --quiet --out " + full.string()) == 0);
    CHECK(io::read_file(st / "hankel_quantized.csv") == io::read_file(full / "hankel_quantized.csv"));
    CHECK(io::read_file(st / "snapshot_completed.csv") == io::read_file(full / "snapshot_completed.csv"));
    CHECK(io::read_file(st / "spectrum.csv") == io::read_file(full / "spectrum_completed.csv"));

    // A corrupted snapshot is rejected.
    io::write_file(dir / "broken.csv", "index,re,im,mask\n1,0.5,x,1\n");
    CHECK(cli("spectrum --snapshot " + (dir / "broken.csv").string() + " --out " + (dir / "s.csv").string()) == 2);
    fs::remove_all(dir);
}

#include "mixq/geometry.hpp"
#include "mixq/signal.hpp"
#include "mixq/spectrum.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>

using namespace mixq;
using Catch::Matchers::WithinAbs;

TEST_CASE("broadside response peaks at u = 0") {
    const AngleSpectrum s = angle_spectrum(cvec::Ones(16), 256);
    const PeakList p = find_peaks(s, 1);
    REQUIRE(p.peaks.size() == 1);
    CHECK(p.peaks[0].u == 0.0);
    CHECK(p.peaks[0].theta_deg == 0.0);
    CHECK(p.peaks[0].level_db == 0.0);
    CHECK(*std::max_element(s.magnitude_db.begin(), s.magnitude_db.end()) == 0.0);
}

TEST_CASE("u grid") {
    const AngleSpectrum s = angle_spectrum(cvec::Ones(4), 8);
    REQUIRE(s.size() == 8);
    CHECK(s.u(0) == -1.0);
    CHECK(s.u(4) == 0.0);
    CHECK(s.u(7) == 0.75);
}

TEST_CASE("a 30 degree target lands at u = 0.5") {
    const int N = 1024;
    const AngleSpectrum s = angle_spectrum(steering_vector(30.0, 64), N);
    const Peak p = find_peaks(s, 1).peaks.at(0);
    CHECK_THAT(p.u, WithinAbs(0.5, 2.0 / N));
    CHECK_THAT(p.theta_deg, WithinAbs(30.0, 0.2));
}

TEST_CASE("zero-padded DFT keeps energy") {
    Stream rng(1, StreamTag::trial);
    cvec x(37);
    for (int m = 0; m < 37; ++m) x(m) = cplx(rng.normal(), rng.normal());
    for (int N : {64, 256, 1024}) {
        const cvec X = dft_zero_padded(x, N);
        CHECK(std::abs(X.squaredNorm() / N - x.squaredNorm()) <= 1e-9 * x.squaredNorm());
    }
}

TEST_CASE("n_fft validation") {
    CHECK_THROWS_AS(angle_spectrum(cvec::Ones(16), 100), ValidationError);
    CHECK_THROWS_AS(angle_spectrum(cvec::Ones(16), 8), ValidationError);
    CHECK_THROWS_AS(angle_spectrum(cvec::Ones(16), 0), ValidationError);
    CHECK_NOTHROW(angle_spectrum(cvec::Ones(16), 16));
}

TEST_CASE("peak search reports too few maxima") {
    const AngleSpectrum s = angle_spectrum(cvec::Ones(1), 8); // flat
    const PeakList p = find_peaks(s, 2);
    CHECK_FALSE(p.complete);
    CHECK(p.peaks.empty());
    CHECK_THROWS_AS(find_peaks(s, 0), ValidationError);

    const PeakList q = find_peaks(angle_spectrum(cvec::Ones(16), 256), 2);
    CHECK(q.complete);
    CHECK(q.peaks.size() == 2);
    CHECK(q.peaks[0].level_db > q.peaks[1].level_db);
}

TEST_CASE("sidelobe level excludes the main lobe") {
    const AngleSpectrum s = angle_spectrum(cvec::Ones(16), 1024);
    const auto peaks = find_peaks(s, 1).peaks;
    // Main lobe half-width is N / M = 64 bins; the first sidelobe of a
    // uniform aperture sits near -13.26 dB.
    const double side = max_sidelobe_db(s, peaks, resolution_bins(1024, 16));
    CHECK_THAT(side, WithinAbs(-13.2, 0.2));
    CHECK(max_sidelobe_db(s, peaks, 0) < 0.0);
    CHECK(resolution_bins(1024, 149) == 7);
}

TEST_CASE("hann window lowers sidelobes") {
    const AngleSpectrum r = angle_spectrum(cvec::Ones(32), 1024, SpectrumSource::completed, Window::rectangular);
    const AngleSpectrum h = angle_spectrum(cvec::Ones(32), 1024, SpectrumSource::completed, Window::hann);
    const auto pr = find_peaks(r, 1).peaks;
    const auto ph = find_peaks(h, 1).peaks;
    CHECK(max_sidelobe_db(h, ph, 2 * resolution_bins(1024, 32)) < max_sidelobe_db(r, pr, 2 * resolution_bins(1024, 32)));
}

TEST_CASE("two targets resolved on the full aperture over 20 seeds") {
    ArrayGeometry ula;
    ula.M = 149;
    for (int m = 1; m <= ula.M; ++m) ula.omega_prime.push_back(m);
    TargetScene scene;
    scene.angles_deg = {-34.0, 18.0};
    scene.snr_db = 20.0;
    const int N = 1024;
    int hits = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const AngleSpectrum s = angle_spectrum(synthesize_snapshot(scene, ula, seed).full.values, N);
        auto peaks = find_peaks(s, 2).peaks;
        std::sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.u < b.u; });
        bool ok = peaks.size() == 2;
        for (std::size_t k = 0; ok && k < 2; ++k)
            ok = std::abs(peaks[k].u - std::sin(deg2rad(scene.angles_deg[k]))) <= 2.0 / N;
        hits += ok;
    }
    CHECK(hits >= 18);
}

#include "mixq/geometry.hpp"
#include "mixq/signal.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace mixq;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ArrayGeometry paper_geometry() {
    return synthesize_virtual_array({{1, 9, 25}, {1, 6, 7, 8}}, {{51, 67, 75}, {68, 69, 70, 75}}, 25);
}

ArrayGeometry ula(int M) {
    ArrayGeometry g;
    g.M = M;
    for (int m = 1; m <= M; ++m) g.omega_prime.push_back(m);
    return g;
}

} // namespace

TEST_CASE("steering vector phases") {
    const cvec a0 = steering_vector(0.0, 4);
    for (int m = 0; m < 4; ++m) CHECK(std::abs(a0(m) - cplx(1.0, 0.0)) < 1e-15);

    const cvec a30 = steering_vector(30.0, 3);
    CHECK_THAT(a30(1).real(), WithinAbs(0.0, 1e-15));
    CHECK_THAT(a30(1).imag(), WithinAbs(1.0, 1e-15));

    // pi sin(-34 deg), reference value from a 30-digit evaluation.
    const double ref = -1.75675631748324463551837996392;
    const cvec a = steering_vector(-34.0, 149);
    CHECK_THAT(std::arg(a(1)), WithinAbs(ref, 1e-14));
    CHECK(a.size() == 149);
}

TEST_CASE("steering vector rejects endfire and invalid sizes") {
    CHECK_THROWS_AS(steering_vector(90.0, 4), ValidationError);
    CHECK_THROWS_AS(steering_vector(-91.0, 4), ValidationError);
    CHECK_THROWS_AS(steering_vector(10.0, 0), ValidationError);
}

TEST_CASE("noiseless broadside snapshot is all ones") {
    TargetScene scene;
    scene.angles_deg = {0.0};
    scene.amplitudes = {cplx(1.0, 0.0)};
    const SnapshotPair p = synthesize_snapshot(scene, ula(8), 1);
    for (int m = 0; m < 8; ++m) CHECK(std::abs(p.full.values(m) - cplx(1.0, 0.0)) < 1e-15);
    CHECK(p.noise_variance == 0.0);
}

TEST_CASE("noiseless snapshot lies in the steering span") {
    TargetScene scene;
    scene.angles_deg = {-34.0, 18.0, 40.0};
    const ArrayGeometry g = paper_geometry();
    const SnapshotPair p = synthesize_snapshot(scene, g, 3);
    const cmat A = steering_matrix(scene.angles_deg, g.M);
    const cvec s = A.colPivHouseholderQr().solve(p.full.values);
    CHECK((A * s - p.full.values).norm() / p.full.values.norm() <= 1e-10);
}

TEST_CASE("masked snapshot") {
    TargetScene scene;
    scene.angles_deg = {-34.0, 18.0};
    scene.snr_db = 20.0;
    const ArrayGeometry g = paper_geometry();
    const SnapshotPair p = synthesize_snapshot(scene, g, 7);
    const BitVector mask = masking_vector(g);
    CHECK(p.masked.mask == mask);
    CHECK(p.masked.kind == SnapshotKind::masked);
    CHECK(p.masked.observed() == 47);
    for (int m = 0; m < g.M; ++m) {
        if (mask[static_cast<std::size_t>(m)]) CHECK(p.masked.values(m) == p.full.values(m));
        else CHECK(p.masked.values(m) == cplx(0.0, 0.0));
    }
    CHECK(p.masked.values.squaredNorm() <= p.full.values.squaredNorm());
}

TEST_CASE("same seed gives bitwise-equal snapshots") {
    TargetScene scene;
    scene.angles_deg = {-34.0, 18.0};
    scene.snr_db = 20.0;
    const ArrayGeometry g = paper_geometry();
    const SnapshotPair a = synthesize_snapshot(scene, g, 7);
    const SnapshotPair b = synthesize_snapshot(scene, g, 7);
    CHECK(a.full.values == b.full.values);
    CHECK(a.masked.values == b.masked.values);
    const SnapshotPair c = synthesize_snapshot(scene, g, 8);
    CHECK(a.full.values != c.full.values);
}

TEST_CASE("empirical noise variance matches the SNR") {
    TargetScene scene;
    scene.angles_deg = {10.0};
    scene.amplitudes = {cplx(1.0, 0.0)};
    scene.snr_db = 5.0;
    const ArrayGeometry g = ula(100);
    TargetScene quiet = scene;
    quiet.snr_db = std::numeric_limits<double>::infinity();
    const cvec clean = synthesize_snapshot(quiet, g, 0).full.values;
    double acc = 0.0;
    long n = 0;
    double sigma2 = 0.0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) { // 100 x 100 = 10^4 draws
        const SnapshotPair p = synthesize_snapshot(scene, g, seed);
        sigma2 = p.noise_variance;
        acc += (p.full.values - clean).squaredNorm();
        n += g.M;
    }
    CHECK_THAT(sigma2, WithinRel(std::pow(10.0, -0.5), 1e-12));
    CHECK_THAT(acc / static_cast<double>(n), WithinRel(sigma2, 0.05));
}

TEST_CASE("scene validation") {
    const ArrayGeometry g = ula(3);
    TargetScene s;
    CHECK_THROWS_AS(synthesize_snapshot(s, g, 0), ValidationError);
    s.angles_deg = {1, 2, 3, 4};
    CHECK_THROWS_AS(synthesize_snapshot(s, g, 0), ValidationError);
    s.angles_deg = {95.0};
    CHECK_THROWS_AS(synthesize_snapshot(s, g, 0), ValidationError);
    s.angles_deg = {10.0};
    s.amplitudes = {cplx(1, 0), cplx(1, 0)};
    CHECK_THROWS_AS(synthesize_snapshot(s, g, 0), ValidationError);
}

#include "mixq/completion.hpp"
#include "mixq/geometry.hpp"
#include "mixq/scenario.hpp"
#include "mixq/signal.hpp"

#include <catch2/catch_amalgamated.hpp>

using namespace mixq;

namespace {

ArrayGeometry paper_geometry() {
    return synthesize_virtual_array({{1, 9, 25}, {1, 6, 7, 8}}, {{51, 67, 75}, {68, 69, 70, 75}}, 25);
}

HankelView tagged(const cmat& X, const std::vector<Cell>& observed) {
    HankelView v;
    v.M = static_cast<int>(X.rows() + X.cols() - 1);
    v.matrix = cmat::Zero(X.rows(), X.cols());
    v.tags.assign(static_cast<std::size_t>(X.size()), CellClass::unobserved);
    for (const Cell& c : observed) {
        v.matrix(c.i, c.j) = X(c.i, c.j);
        v.tags[static_cast<std::size_t>(c.i * X.cols() + c.j)] = CellClass::one_bit;
    }
    return v;
}

QuantScheme paper_scheme(const Snapshot& y, Placement placement) {
    const Scales s = design_scales(y, 0.0, 10);
    QuantScheme q;
    q.delta1 = s.delta1;
    q.delta2 = s.delta2;
    q.bits = 10;
    q.dither_seed = 2001;
    q.high_precision = placement_to_delta(placement, {}, paper_geometry());
    return q;
}

Snapshot paper_snapshot(double snr_db, std::uint64_t seed) {
    TargetScene scene;
    scene.angles_deg = {-34.0, 18.0};
    scene.snr_db = snr_db;
    return synthesize_snapshot(scene, paper_geometry(), seed).masked;
}

} // namespace

TEST_CASE("fully observed rank-one matrix is recovered") {
    const cvec u = cvec::LinSpaced(5, 1.0, 2.0);
    const cvec v = cvec::LinSpaced(5, -1.0, 1.5);
    const cmat X = u * v.adjoint();
    std::vector<Cell> all;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j) all.push_back({i, j});
    SvtConfig cfg;
    cfg.tau = 0.5;
    cfg.step = 1.0;
    cfg.tol = 1e-10;
    cfg.max_iters = 2000;
    const CompletionResult r = svt_complete(tagged(X, all), cfg);
    CHECK(r.converged);
    CHECK((r.X_hat - X).norm() <= 1e-6 * X.norm());
    CHECK(r.rank_trace.back() == 1);
}

TEST_CASE("rank-one 8x8 completion from a random mask") {
    Stream rng(17, StreamTag::trial);
    cvec u(8), v(8);
    for (int i = 0; i < 8; ++i) {
        u(i) = rng.uniform() < 0.5 ? -1.0 : 1.0;
        v(i) = rng.uniform() < 0.5 ? -1.0 : 1.0;
    }
    const cmat X = u * v.adjoint();
    std::vector<Cell> obs;
    for (int i = 0; i < 8; ++i)
        for (int j = 0; j < 8; ++j)
            if (i == j || rng.uniform() < 0.6) obs.push_back({i, j});
    SvtConfig cfg = SvtConfig::defaults(8, 8, obs.size());
    cfg.tol = 1e-8;
    cfg.max_iters = 3000;
    const CompletionResult r = svt_complete(tagged(X, obs), cfg);
    CHECK((r.X_hat - X).norm() <= 1e-3 * X.norm());
}

TEST_CASE("noiseless Hankel completion reproduces the full array") {
    const ArrayGeometry g = paper_geometry();
    TargetScene scene;
    scene.angles_deg = {-34.0, 18.0};
    const SnapshotPair p = synthesize_snapshot(scene, g, 5);
    const HankelView view = lift(p.masked);
    SvtConfig cfg = SvtConfig::defaults(view.n1(), view.n2(), view.count(Subset::omega));
    cfg.tol = 1e-6;
    cfg.max_iters = 3000;
    const CompletionResult r = svt_complete(view, cfg);
    const double err = (r.x_hat.values - p.full.values).norm() / p.full.values.norm();
    CHECK(err <= 1e-2);
}

TEST_CASE("quantized Hankel tags and values per cell") {
    const ArrayGeometry g = paper_geometry();
    const Snapshot y = paper_snapshot(20.0, 3);
    const QuantScheme q = paper_scheme(y, Placement::first4);
    const HankelView Q = build_quantized_hankel(y, q);
    CHECK(Q.count(Subset::omega) == 1893);
    CHECK(Q.count(Subset::omega2) == 22);
    CHECK(Q.count(Subset::omega1) == 1871);
    for (const Cell& c : Q.cells(Subset::omega1)) {
        REQUIRE(std::abs(std::abs(Q.matrix(c.i, c.j).real()) - q.delta1 / 2) < 1e-15);
        REQUIRE(std::abs(std::abs(Q.matrix(c.i, c.j).imag()) - q.delta1 / 2) < 1e-15);
    }
    for (const Cell& c : Q.cells(Subset::omega2)) {
        const cplx x = y.values(c.i + c.j);
        CHECK(std::abs(Q.matrix(c.i, c.j).real() - x.real()) <= q.delta2);
        CHECK(std::abs(Q.matrix(c.i, c.j).imag() - x.imag()) <= q.delta2);
    }
    // Distinct per-cell dithers: the same antenna on two anti-diagonal cells
    // does not always quantize to the same value.
    const auto cells = Q.cells(Subset::omega1);
    bool differs = false;
    for (const Cell& a : cells)
        for (const Cell& b : cells)
            if (a.i + a.j == b.i + b.j && Q.matrix(a.i, a.j) != Q.matrix(b.i, b.j)) differs = true;
    CHECK(differs);
    for (int i = 0; i < Q.n1(); ++i)
        for (int j = 0; j < Q.n2(); ++j)
            if (Q.tag(i, j) == CellClass::unobserved) REQUIRE(Q.matrix(i, j) == cplx(0.0, 0.0));
}

TEST_CASE("per-antenna dither mode lifts the antenna-level output") {
    const Snapshot y = paper_snapshot(20.0, 4);
    QuantScheme q = paper_scheme(y, Placement::edges);
    q.dither_mode = DitherMode::per_antenna;
    const HankelView Q = build_quantized_hankel(y, q);
    const Snapshot ant = quantize_mixed(y, q);
    for (const Cell& c : Q.cells(Subset::omega)) REQUIRE(Q.matrix(c.i, c.j) == ant.values(c.i + c.j));
}

TEST_CASE("all one-bit alphabet") {
    const Snapshot y = paper_snapshot(20.0, 6);
    QuantScheme q = paper_scheme(y, Placement::first4);
    q.high_precision.assign(y.mask.size(), 0);
    const HankelView Q = build_quantized_hankel(y, q);
    CHECK(Q.count(Subset::omega2) == 0);
    for (const Cell& c : Q.cells(Subset::omega)) {
        REQUIRE(std::abs(Q.matrix(c.i, c.j).real()) == q.delta1 / 2);
        REQUIRE(std::abs(Q.matrix(c.i, c.j).imag()) == q.delta1 / 2);
    }
}

TEST_CASE("completion is deterministic and ignores precision labels") {
    const Snapshot y = paper_snapshot(20.0, 7);
    const QuantScheme q = paper_scheme(y, Placement::first4);
    const HankelView Q = build_quantized_hankel(y, q);
    SvtConfig cfg = SvtConfig::defaults(Q.n1(), Q.n2(), Q.count(Subset::omega));
    cfg.max_iters = 60;
    const CompletionResult a = svt_complete(Q, cfg);
    const CompletionResult b = svt_complete(Q, cfg);
    CHECK(a.X_hat == b.X_hat);
    CHECK(a.residual_trace == b.residual_trace);

    HankelView relabeled = Q;
    for (auto& t : relabeled.tags)
        if (t != CellClass::unobserved) t = t == CellClass::one_bit ? CellClass::multi_bit : CellClass::one_bit;
    CHECK(svt_complete(relabeled, cfg).X_hat == a.X_hat);

    CHECK((a.x_hat.values - dehankelize(a.X_hat).values).norm() == 0.0);
    CHECK(a.iters == static_cast<int>(a.residual_trace.size()));
    CHECK(a.rank_trace.size() == a.residual_trace.size());
    CHECK(a.q == Catch::Approx(a.residual_trace.back() * sample(Q.matrix, Q.cells(Subset::omega)).norm()));
}

TEST_CASE("an oversized step is reported as divergence") {
    const Snapshot y = paper_snapshot(20.0, 8);
    const HankelView Q = build_quantized_hankel(y, paper_scheme(y, Placement::first4));
    SvtConfig cfg = SvtConfig::defaults(Q.n1(), Q.n2(), Q.count(Subset::omega));
    cfg.step = 50.0;
    cfg.tau = 1.0;
    cfg.max_iters = 500;
    CHECK_THROWS_AS(svt_complete(Q, cfg), NumericalError);
}

TEST_CASE("svt configuration validation") {
    const Snapshot y = paper_snapshot(20.0, 9);
    const HankelView Q = build_quantized_hankel(y, paper_scheme(y, Placement::first4));
    SvtConfig ok = SvtConfig::defaults(Q.n1(), Q.n2(), Q.count(Subset::omega));
    CHECK(ok.tau == Catch::Approx(375.0));
    CHECK(ok.step == Catch::Approx(std::min(1.2 * 5625.0 / 1893.0, 1.9)));
    SvtConfig bad = ok;
    bad.tau = 0.0;
    CHECK_THROWS_AS(svt_complete(Q, bad), ValidationError);
    bad = ok;
    bad.step = -1.0;
    CHECK_THROWS_AS(svt_complete(Q, bad), ValidationError);
    bad = ok;
    bad.max_iters = 0;
    CHECK_THROWS_AS(svt_complete(Q, bad), ValidationError);
    bad = ok;
    bad.rank_cap = 0;
    CHECK_THROWS_AS(svt_complete(Q, bad), ValidationError);

    HankelView empty = Q;
    for (auto& t : empty.tags) t = CellClass::unobserved;
    CHECK_THROWS_AS(svt_complete(empty, ok), ValidationError);
}

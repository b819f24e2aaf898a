// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mixq/hankel.hpp"
#include "mixq/quant.hpp"
#include "mixq/rng.hpp"
#include "mixq/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace mixq {

/// Bounded low-rank set: rank <= r and max-entry bound alpha (for complex
/// matrices, max(||Re X||_max, ||Im X||_max) <= alpha).
struct LowRankSpec {
    int n1 = 16;
    int n2 = 16;
    int r = 2;
    double alpha = 1.0;
    bool complex = false;
};

inline void validate(const LowRankSpec& s) {
    if (s.n1 < 1 || s.n2 < 1) throw ValidationError("low-rank spec: dimensions must be positive");
    if (s.r < 1 || s.r > std::min(s.n1, s.n2)) throw ValidationError("low-rank spec: need 1 <= r <= min(n1, n2)");
    if (!(s.alpha > 0.0)) throw ValidationError("low-rank spec: alpha must be positive");
}

enum class Part { real, imag };

inline double part_of(cplx z, Part p) { return p == Part::real ? z.real() : z.imag(); }

/// ||X||_1 as the sum of entry moduli.
inline double l1_norm(const cmat& X) { return X.cwiseAbs().sum(); }
inline double l1_norm(const rmat& X) { return X.cwiseAbs().sum(); }

inline double max_part_norm(const cmat& X) {
    return std::max(X.real().cwiseAbs().maxCoeff(), X.imag().cwiseAbs().maxCoeff());
}

/// Gaussian factor product G1 G2^H, rescaled so its max entry (or max
/// real/imag part) equals alpha.
inline cmat random_low_rank(const LowRankSpec& spec, Stream& rng) {
    validate(spec);
    cmat G1(spec.n1, spec.r), G2(spec.n2, spec.r);
    for (auto* G : {&G1, &G2})
        for (Eigen::Index c = 0; c < G->cols(); ++c)
            for (Eigen::Index i = 0; i < G->rows(); ++i) {
                const double re = rng.normal();
                const double im = spec.complex ? rng.normal() : 0.0;
                (*G)(i, c) = cplx(re, im);
            }
    cmat P = G1 * G2.adjoint();
    if (!spec.complex) P = P.real().cast<cplx>();
    const double scale = spec.complex ? max_part_norm(P) : P.real().cwiseAbs().maxCoeff();
    return P * (spec.alpha / scale);
}

/// `count` distinct cells drawn uniformly from the n1 x n2 grid.
inline std::vector<Cell> uniform_cells(int n1, int n2, std::size_t count, Stream& rng) {
    const std::size_t total = static_cast<std::size_t>(n1) * static_cast<std::size_t>(n2);
    if (count > total) throw ValidationError("uniform_cells: more cells requested than exist");
    std::vector<std::size_t> ids(total);
    std::iota(ids.begin(), ids.end(), std::size_t{0});
    for (std::size_t k = 0; k < count; ++k) std::swap(ids[k], ids[k + rng.below(total - k)]);
    std::vector<Cell> cells(count);
    for (std::size_t k = 0; k < count; ++k)
        cells[k] = {static_cast<int>(ids[k] / static_cast<std::size_t>(n2)),
                    static_cast<int>(ids[k] % static_cast<std::size_t>(n2))};
    return cells;
}

namespace detail {

/// Shared per-cell dither: identical for X and Y so quantized differences
/// only reflect the inputs.
inline double cell_tau(std::uint64_t seed, int n2, const Cell& c, Part p, double delta) {
    const auto site = static_cast<std::uint64_t>(c.i) * static_cast<std::uint64_t>(n2) + static_cast<std::uint64_t>(c.j);
    return dither(seed, StreamTag::cell_dither, site, p == Part::real ? 0 : 1, delta);
}

inline double sgn(double v) { return v >= 0.0 ? 1.0 : -1.0; }

struct MeanAcc {
    double sum = 0.0, sum_sq = 0.0;
    long n = 0;
    void add(double v) {
        sum += v;
        sum_sq += v * v;
        ++n;
    }
    double mean() const { return n ? sum / static_cast<double>(n) : 0.0; }
    double stderr_() const {
        if (n < 2) return 0.0;
        const double m = mean();
        const double var = std::max(0.0, (sum_sq - static_cast<double>(n) * m * m) / static_cast<double>(n - 1));
        return std::sqrt(var / static_cast<double>(n));
    }
};

} // namespace detail

/// Quantization consistency: X and Y quantize to the same output on every
/// observed cell, for both parts and both precision classes, under shared
/// dithers drawn from `dither_seed`.
inline bool consistency_check(const cmat& X, const cmat& Y, const std::vector<Cell>& omega1,
                              const std::vector<Cell>& omega2, const QuantScheme& scheme, std::uint64_t dither_seed) {
    if (X.rows() != Y.rows() || X.cols() != Y.cols()) throw ValidationError("consistency_check: shape mismatch");
    const int n2 = static_cast<int>(X.cols());
    const std::int64_t K = scheme.levels();
    for (Part p : {Part::real, Part::imag}) {
        for (const Cell& c : omega1) {
            const double tau = detail::cell_tau(dither_seed, n2, c, p, scheme.delta1);
            if (quantize_scalar(part_of(X(c.i, c.j), p), scheme.delta1, tau, 1) !=
                quantize_scalar(part_of(Y(c.i, c.j), p), scheme.delta1, tau, 1))
                return false;
        }
        for (const Cell& c : omega2) {
            const double tau = detail::cell_tau(dither_seed, n2, c, p, scheme.delta2);
            if (quantize_scalar(part_of(X(c.i, c.j), p), scheme.delta2, tau, K) !=
                quantize_scalar(part_of(Y(c.i, c.j), p), scheme.delta2, tau, K))
                return false;
        }
    }
    return true;
}

struct MixedDistance {
    double one_bit_term = 0.0;   ///< (delta1 / 2 m'_1) ||sgn(.) - sgn(.)||_1
    double multi_bit_term = 0.0; ///< (1 / m'_2) ||Q_delta2(.) - Q_delta2(.)||_1
    double total = 0.0;
    bool omega1_empty = false;
    bool omega2_empty = false;
};

/// Mixed quantized distance for one part (real or imaginary) with shared
/// dithers. An empty subset contributes 0 and raises its flag.
inline MixedDistance mixed_distance(const cmat& X, const cmat& Y, const std::vector<Cell>& omega1,
                                    const std::vector<Cell>& omega2, const QuantScheme& scheme,
                                    std::uint64_t dither_seed, Part part) {
    if (X.rows() != Y.rows() || X.cols() != Y.cols()) throw ValidationError("mixed_distance: shape mismatch");
    for (const Cell& a : omega1)
        for (const Cell& b : omega2)
            if (a == b) throw ValidationError("mixed_distance: omega1 and omega2 overlap");
    const int n2 = static_cast<int>(X.cols());
    const std::int64_t K = scheme.levels();
    MixedDistance d;
    d.omega1_empty = omega1.empty();
    d.omega2_empty = omega2.empty();
    if (!omega1.empty()) {
        double s = 0.0;
        for (const Cell& c : omega1) {
            const double tau = detail::cell_tau(dither_seed, n2, c, part, scheme.delta1);
            s += std::abs(detail::sgn(part_of(X(c.i, c.j), part) + tau) - detail::sgn(part_of(Y(c.i, c.j), part) + tau));
        }
        d.one_bit_term = scheme.delta1 / (2.0 * static_cast<double>(omega1.size())) * s;
    }
    if (!omega2.empty()) {
        double s = 0.0;
        for (const Cell& c : omega2) {
            const double tau = detail::cell_tau(dither_seed, n2, c, part, scheme.delta2);
            s += std::abs(quantize_scalar(part_of(X(c.i, c.j), part), scheme.delta2, tau, K) -
                          quantize_scalar(part_of(Y(c.i, c.j), part), scheme.delta2, tau, K));
        }
        d.multi_bit_term = s / static_cast<double>(omega2.size());
    }
    d.total = d.one_bit_term + d.multi_bit_term;
    return d;
}

/// Monte-Carlo estimate compared against a closed-form expectation.
struct McCheck {
    std::string name;
    double expected = 0.0;
    double mean = 0.0;
    double stderr_ = 0.0;
    long trials = 0;
    /// |mean - expected| <= 4 stderr.
    bool pass = false;
};

inline McCheck finish_check(std::string name, double expected, const detail::MeanAcc& acc) {
    McCheck c;
    c.name = std::move(name);
    c.expected = expected;
    c.mean = acc.mean();
    c.stderr_ = acc.stderr_();
    c.trials = acc.n;
    c.pass = std::abs(c.mean - c.expected) <= 4.0 * c.stderr_;
    return c;
}

/// E_tau |Q(a + tau) - Q(b + tau)| = |a - b| for tau ~ U[-delta/2, delta/2],
/// checked with an unsaturated quantizer.
inline McCheck verify_dither_identity(double a, double b, double delta, long trials, std::uint64_t seed) {
    if (trials < 10000) throw ValidationError("verify_dither_identity: need at least 10^4 trials");
    if (!(delta > 0.0)) throw ValidationError("verify_dither_identity: delta must be positive");
    Stream rng(seed, StreamTag::trial);
    detail::MeanAcc acc;
    for (long t = 0; t < trials; ++t) {
        const double tau = delta * (rng.uniform() - 0.5);
        acc.add(std::abs(quantize_scalar(a, delta, tau, kUnboundedLevels) - quantize_scalar(b, delta, tau, kUnboundedLevels)));
    }
    return finish_check("dither_identity(a=" + std::to_string(a) + ",b=" + std::to_string(b) +
                            ",delta=" + std::to_string(delta) + ")",
                        std::abs(a - b), acc);
}

/// Uniform-sampling identity: over uniform Omega of size m' and dithers,
/// E ||Q(P_Omega X) - Q(P_Omega Y)||_1 = (m' / n1 n2) ||X - Y||_1.
inline McCheck verify_uniform_sampling_identity(const rmat& X, const rmat& Y, std::size_t m_prime, double delta,
                                                std::int64_t K, long trials, std::uint64_t seed) {
    if (trials < 1) throw ValidationError("verify_uniform_sampling_identity: trials must be positive");
    const int n1 = static_cast<int>(X.rows());
    const int n2 = static_cast<int>(X.cols());
    detail::MeanAcc acc;
    for (long t = 0; t < trials; ++t) {
        Stream rng(seed, StreamTag::sampling, static_cast<std::uint64_t>(t));
        const auto cells = uniform_cells(n1, n2, m_prime, rng);
        double s = 0.0;
        for (const Cell& c : cells) {
            const double tau = delta * (rng.uniform() - 0.5);
            s += std::abs(quantize_scalar(X(c.i, c.j), delta, tau, K) - quantize_scalar(Y(c.i, c.j), delta, tau, K));
        }
        acc.add(s);
    }
    const double expected = static_cast<double>(m_prime) / (static_cast<double>(n1) * n2) * l1_norm(rmat(X - Y));
    return finish_check("uniform_sampling_identity", expected, acc);
}

/// Expectations of both mixed-distance terms under uniform Omega1/Omega2 and
/// fresh dithers: each should equal (1 / n1 n2) ||part(X - Y)||_1.
inline std::vector<McCheck> verify_mixed_expectation(const cmat& X, const cmat& Y, std::size_t m1, std::size_t m2,
                                                     const QuantScheme& scheme, Part part, long trials,
                                                     std::uint64_t seed) {
    const int n1 = static_cast<int>(X.rows());
    const int n2 = static_cast<int>(X.cols());
    detail::MeanAcc one, multi;
    for (long t = 0; t < trials; ++t) {
        Stream rng(seed, StreamTag::sampling, static_cast<std::uint64_t>(t));
        auto cells = uniform_cells(n1, n2, m1 + m2, rng);
        const std::vector<Cell> o1(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(m1));
        const std::vector<Cell> o2(cells.begin() + static_cast<std::ptrdiff_t>(m1), cells.end());
        const MixedDistance d = mixed_distance(X, Y, o1, o2, scheme, mix64(seed) + static_cast<std::uint64_t>(t), part);
        one.add(d.one_bit_term);
        multi.add(d.multi_bit_term);
    }
    const cmat D = X - Y;
    const double target = (part == Part::real ? D.real().cwiseAbs().sum() : D.imag().cwiseAbs().sum()) /
                          (static_cast<double>(n1) * n2);
    const std::string tag = part == Part::real ? "re" : "im";
    return {finish_check("mixed_one_bit_term_" + tag, target, one),
            finish_check("mixed_multi_bit_term_" + tag, target, multi)};
}

/// Quantizer scale for the embedding experiment: delta = 2 alpha / (K - 1)
/// keeps every |Q(x) - Q(y)| with |x|, |y| <= alpha below K delta and the
/// quantizer unsaturated.
inline double embedding_delta(double alpha, std::int64_t K) {
    if (K < 2) throw ValidationError("embedding_delta: need K >= 2");
    return 2.0 * alpha / static_cast<double>(K - 1);
}

/// Frobenius diameter surrogate for the low-rank set: 2 alpha sqrt(n1 n2).
inline double set_diameter_surrogate(int n1, int n2, double alpha) {
    return 2.0 * alpha * std::sqrt(static_cast<double>(n1) * n2);
}

struct EmbeddingRow {
    double epsilon = 0.0;
    double empirical = 0.0;        ///< violation frequency
    double bound = 0.0;            ///< 2 exp(-eps^2 m' / (K delta)^2), the looser stated form
    double bound_concentration = 0.0; ///< 2 exp(-2 eps^2 m' / (K delta)^2)
    double sample_count = 0.0;     ///< eps^-2 r (n1+n2) log(1 + diameter / rho), rho = eps
    bool pass = false;             ///< empirical <= bound
};

struct EmbeddingReport {
    std::vector<EmbeddingRow> rows;
    double gaussian_complexity = 0.0; ///< r (n1 + n2)
    double diameter_surrogate = 0.0;
    double delta = 0.0;
    std::int64_t K = 0;
    std::size_t m_prime = 0;
    long trials = 0;

    bool pass() const {
        return std::all_of(rows.begin(), rows.end(), [](const EmbeddingRow& r) { return r.pass; });
    }
};

/// Monte-Carlo of the quantized embedding: per trial a fresh rank-r pair,
/// a fresh uniform Omega of size m' and fresh dithers; counts how often
/// |D(X, Y) - ||X - Y||_1 / n1 n2| exceeds each epsilon.
inline EmbeddingReport verify_embedding(const LowRankSpec& spec, std::size_t m_prime, double delta, std::int64_t K,
                                        const std::vector<double>& epsilons, long trials, std::uint64_t seed) {
    validate(spec);
    if (trials < 1) throw ValidationError("verify_embedding: trials must be positive");
    if (m_prime < 1) throw ValidationError("verify_embedding: m' must be positive");
    LowRankSpec real_spec = spec;
    real_spec.complex = false;

    std::vector<long> violations(epsilons.size(), 0);
    for (long t = 0; t < trials; ++t) {
        Stream rng(seed, StreamTag::low_rank, static_cast<std::uint64_t>(t));
        const rmat X = random_low_rank(real_spec, rng).real();
        const rmat Y = random_low_rank(real_spec, rng).real();
        const auto cells = uniform_cells(spec.n1, spec.n2, m_prime, rng);
        double s = 0.0;
        for (const Cell& c : cells) {
            const double tau = delta * (rng.uniform() - 0.5);
            s += std::abs(quantize_scalar(X(c.i, c.j), delta, tau, K) - quantize_scalar(Y(c.i, c.j), delta, tau, K));
        }
        const double D = s / static_cast<double>(m_prime);
        const double dev = std::abs(D - l1_norm(rmat(X - Y)) / (static_cast<double>(spec.n1) * spec.n2));
        for (std::size_t e = 0; e < epsilons.size(); ++e) violations[e] += dev > epsilons[e];
    }

    EmbeddingReport rep;
    rep.gaussian_complexity = static_cast<double>(spec.r) * (spec.n1 + spec.n2);
    rep.diameter_surrogate = set_diameter_surrogate(spec.n1, spec.n2, spec.alpha);
    rep.delta = delta;
    rep.K = K;
    rep.m_prime = m_prime;
    rep.trials = trials;
    const double range = static_cast<double>(K) * delta;
    for (std::size_t e = 0; e < epsilons.size(); ++e) {
        const double eps = epsilons[e];
        EmbeddingRow row;
        row.epsilon = eps;
        row.empirical = static_cast<double>(violations[e]) / static_cast<double>(trials);
        row.bound = 2.0 * std::exp(-eps * eps * static_cast<double>(m_prime) / (range * range));
        row.bound_concentration = 2.0 * std::exp(-2.0 * eps * eps * static_cast<double>(m_prime) / (range * range));
        row.sample_count = rep.gaussian_complexity * std::log(1.0 + rep.diameter_surrogate / eps) / (eps * eps);
        row.pass = row.empirical <= row.bound;
        rep.rows.push_back(row);
    }
    return rep;
}

/// ||X - Y||_1 <= 2 n1 n2 (eps1 + eps2) for consistent pairs.
inline double theorem_bound(int n1, int n2, double eps1, double eps2) {
    return 2.0 * static_cast<double>(n1) * static_cast<double>(n2) * (eps1 + eps2);
}

/// 1 - 4 max(exp(-eps1^2 m'_1 / delta1^2), exp(-eps2^2 m'_2 / (K delta2)^2)).
inline double theorem_probability_floor(double eps1, double eps2, std::size_t m1, std::size_t m2, double delta1,
                                        double delta2, std::int64_t K) {
    const double a = std::exp(-eps1 * eps1 * static_cast<double>(m1) / (delta1 * delta1));
    const double kd = static_cast<double>(K) * delta2;
    const double b = std::exp(-eps2 * eps2 * static_cast<double>(m2) / (kd * kd));
    return 1.0 - 4.0 * std::max(a, b);
}

/// min(eps1, eps2)^-2 r (n1 + n2) log(1 + diameter / rho), diameter from
/// set_diameter_surrogate; rho must lie in (0, 2 n1 n2 (eps1 + eps2)].
inline double theorem_sample_count(double eps1, double eps2, int r, int n1, int n2, double alpha, double rho) {
    if (!(rho > 0.0) || rho > theorem_bound(n1, n2, eps1, eps2))
        throw ValidationError("theorem_sample_count: rho must lie in (0, 2 n1 n2 (eps1 + eps2)]");
    const double e = std::min(eps1, eps2);
    if (!(e > 0.0)) throw ValidationError("theorem_sample_count: eps1 and eps2 must be positive");
    return static_cast<double>(r) * (n1 + n2) * std::log(1.0 + set_diameter_surrogate(n1, n2, alpha) / rho) / (e * e);
}

struct TheoremReport {
    long pairs = 0;
    long consistent = 0;
    long within_bound = 0;
    double bound = 0.0;
    double probability_floor = 0.0;
    double max_error = 0.0; ///< largest ||X - Y||_1 among consistent pairs
    /// Frequency of the bound holding among consistent pairs.
    double frequency() const { return consistent ? static_cast<double>(within_bound) / consistent : 0.0; }
    /// One-sided: the bound must hold at least as often as the floor says.
    bool pass() const { return consistent > 0 && frequency() >= probability_floor; }
};

/// Consistent-pair Monte-Carlo for the recovery bound. Each trial draws a
/// complex rank-r X, a nearby Y from perturbed factors, uniform Omega1/Omega2
/// of sizes m1/m2 and shared dithers; pairs that pass consistency_check are
/// tested against the bound.
inline TheoremReport verify_theorem(const LowRankSpec& spec, std::size_t m1, std::size_t m2, const QuantScheme& scheme,
                                    double eps1, double eps2, double perturbation, long trials, std::uint64_t seed) {
    validate(spec);
    TheoremReport rep;
    rep.bound = theorem_bound(spec.n1, spec.n2, eps1, eps2);
    rep.probability_floor = theorem_probability_floor(eps1, eps2, m1, m2, scheme.delta1, scheme.delta2, scheme.levels());
    LowRankSpec cs = spec;
    cs.complex = true;
    for (long t = 0; t < trials; ++t) {
        Stream rng(seed, StreamTag::low_rank, static_cast<std::uint64_t>(t));
        const cmat X = random_low_rank(cs, rng);
        // Y = X plus a small same-rank move along perturbed factors.
        cmat E1(cs.n1, cs.r), E2(cs.n2, cs.r);
        for (auto* E : {&E1, &E2})
            for (Eigen::Index c = 0; c < E->cols(); ++c)
                for (Eigen::Index i = 0; i < E->rows(); ++i) (*E)(i, c) = cplx(rng.normal(), rng.normal());
        Eigen::JacobiSVD<cmat> dec(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
        const cmat U = dec.matrixU().leftCols(cs.r) * dec.singularValues().head(cs.r).cast<cplx>().asDiagonal();
        const cmat V = dec.matrixV().leftCols(cs.r);
        cmat Y = (U + perturbation * E1 * (U.norm() / E1.norm())) * (V + perturbation * E2 * (V.norm() / E2.norm())).adjoint();
        const double beta = max_part_norm(Y);
        if (beta > cs.alpha) Y *= cs.alpha / beta;

        const auto cells = uniform_cells(cs.n1, cs.n2, m1 + m2, rng);
        const std::vector<Cell> o1(cells.begin(), cells.begin() + static_cast<std::ptrdiff_t>(m1));
        const std::vector<Cell> o2(cells.begin() + static_cast<std::ptrdiff_t>(m1), cells.end());
        ++rep.pairs;
        if (!consistency_check(X, Y, o1, o2, scheme, mix64(seed ^ static_cast<std::uint64_t>(t)))) continue;
        ++rep.consistent;
        const double err = l1_norm(cmat(X - Y));
        rep.max_error = std::max(rep.max_error, err);
        rep.within_bound += err <= rep.bound;
    }
    return rep;
}

} // namespace mixq

// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "mixq/signal.hpp"
#include "mixq/types.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace mixq {

enum class SpectrumSource { sla_zero_filled, completed };

inline const char* to_string(SpectrumSource s) {
    return s == SpectrumSource::sla_zero_filled ? "sla_zero_filled" : "completed";
}

enum class Window { rectangular, hann };

inline const char* to_string(Window w) { return w == Window::rectangular ? "rectangular" : "hann"; }

/// Normalized FFT beam spectrum over u = sin(theta).
struct AngleSpectrum {
    rvec u;            ///< u_t = 2 (t - N/2) / N, ascending over [-1, 1)
    rvec magnitude_db; ///< peak-normalized, max = 0 dB
    SpectrumSource source = SpectrumSource::completed;

    int size() const { return static_cast<int>(u.size()); }
};

/// Levels below this are clamped (avoids -inf in CSV output).
inline constexpr double kSpectrumFloorDb = -300.0;

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

/// Length-n_fft DFT X_k = sum_m x_m exp(-j 2 pi k m / N) of the zero-padded
/// input, natural (unshifted) order.
inline cvec dft_zero_padded(const cvec& x, int n_fft) {
    if (!is_power_of_two(n_fft)) throw ValidationError("spectrum: n_fft must be a power of two");
    if (n_fft < x.size()) throw ValidationError("spectrum: n_fft must be at least the array length");
    std::vector<cplx> in(static_cast<std::size_t>(n_fft), cplx{0.0, 0.0});
    std::copy(x.data(), x.data() + x.size(), in.begin());
    std::vector<cplx> out;
    Eigen::FFT<double> fft;
    fft.fwd(out, in);
    return Eigen::Map<const cvec>(out.data(), static_cast<Eigen::Index>(out.size()));
}

/// FFT angle spectrum of a length-M array response with half-wavelength
/// spacing. Bin k maps to u = 2k/N after fftshift.
inline AngleSpectrum angle_spectrum(const cvec& x, int n_fft, SpectrumSource source = SpectrumSource::completed,
                                    Window window = Window::rectangular) {
    cvec xw = x;
    if (window == Window::hann && x.size() > 1) {
        const double L = static_cast<double>(x.size() - 1);
        for (Eigen::Index m = 0; m < x.size(); ++m)
            xw(m) *= 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(m) / L);
    }
    const cvec X = dft_zero_padded(xw, n_fft);

    AngleSpectrum s;
    s.source = source;
    s.u.resize(n_fft);
    s.magnitude_db.resize(n_fft);
    const int half = n_fft / 2;
    double peak = 0.0;
    for (int t = 0; t < n_fft; ++t) peak = std::max(peak, std::abs(X(t)));
    for (int t = 0; t < n_fft; ++t) {
        const int k = t - half;
        const int bin = (k + n_fft) % n_fft;
        s.u(t) = 2.0 * k / n_fft;
        const double rel = peak > 0.0 ? std::abs(X(bin)) / peak : 1.0;
        s.magnitude_db(t) = rel > 0.0 ? std::max(20.0 * std::log10(rel), kSpectrumFloorDb) : kSpectrumFloorDb;
    }
    return s;
}

struct Peak {
    double theta_deg = 0.0;
    double u = 0.0;
    double level_db = 0.0;
    int index = 0; ///< position in the spectrum arrays
};

struct PeakList {
    std::vector<Peak> peaks;
    /// False when fewer strict local maxima exist than were requested.
    bool complete = true;
};

inline double u_to_deg(double u) { return rad2deg(std::asin(std::clamp(u, -1.0, 1.0))); }

/// The `count` largest strict local maxima (circular in u), strongest first;
/// ties go to the smaller |u|.
inline PeakList find_peaks(const AngleSpectrum& spec, int count) {
    if (count < 1) throw ValidationError("find_peaks: count must be at least 1");
    const int n = spec.size();
    std::vector<Peak> all;
    for (int t = 0; t < n; ++t) {
        const double v = spec.magnitude_db(t);
        const double l = spec.magnitude_db((t + n - 1) % n);
        const double r = spec.magnitude_db((t + 1) % n);
        if (v > l && v > r) all.push_back({u_to_deg(spec.u(t)), spec.u(t), v, t});
    }
    std::stable_sort(all.begin(), all.end(), [](const Peak& a, const Peak& b) {
        if (a.level_db != b.level_db) return a.level_db > b.level_db;
        return std::abs(a.u) < std::abs(b.u);
    });
    PeakList out;
    out.complete = static_cast<int>(all.size()) >= count;
    all.resize(std::min<std::size_t>(all.size(), static_cast<std::size_t>(count)));
    out.peaks = std::move(all);
    return out;
}

/// Width in FFT bins of one native resolution cell (2/M in u) of an M-slot aperture.
inline int resolution_bins(int n_fft, int M) {
    return static_cast<int>(std::lround(static_cast<double>(n_fft) / static_cast<double>(M)));
}

/// Highest level outside +-`exclusion` bins (circular) around each peak.
inline double max_sidelobe_db(const AngleSpectrum& spec, const std::vector<Peak>& peaks, int exclusion) {
    const int n = spec.size();
    std::vector<char> excluded(static_cast<std::size_t>(n), 0);
    for (const Peak& p : peaks)
        for (int d = -exclusion; d <= exclusion; ++d) excluded[static_cast<std::size_t>(((p.index + d) % n + n) % n)] = 1;
    double best = -std::numeric_limits<double>::infinity();
    for (int t = 0; t < n; ++t)
        if (!excluded[static_cast<std::size_t>(t)]) best = std::max(best, spec.magnitude_db(t));
    return best;
}

} // namespace mixq

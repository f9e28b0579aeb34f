#pragma once

// One-sided Welch power spectral density estimator with a Hann window.
//
// Normalization: with window w_n, W = sum w_n^2, segment FFT X_j,
//   P_j = (2 - [j==0 or j==N/2]) |X_j|^2 / (fs * W)
// so that sum_j P_j * df equals the (per-segment mean-removed) series
// variance up to windowing leakage. Segment length must be a power of two
// (radix-2 FFT).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdio>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "csl/simulator.hpp"

namespace csl {

namespace detail {

// In-place iterative radix-2 Cooley-Tukey FFT; n must be a power of two.
inline void fft_radix2(std::vector<std::complex<double>>& a) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = -2.0 * std::numbers::pi / static_cast<double>(len);
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const auto u = a[i + k];
                const auto v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
}

}  // namespace detail

struct PsdEstimate {
    std::vector<double> frequency;  // Hz, 0 .. fs/2
    std::vector<double> psd;        // input units squared per Hz
    std::size_t segments = 0;
};

// Welch estimate over segments of `segment_length` samples with fractional
// `overlap` in [0, 0.9]. Per-segment mean removal, Hann window.
inline PsdEstimate psd_welch(const std::vector<double>& x, double dt,
                             std::size_t segment_length, double overlap) {
    if (!(dt > 0.0)) throw std::invalid_argument("psd_welch: dt must be positive");
    if (segment_length < 4 || (segment_length & (segment_length - 1)) != 0)
        throw std::invalid_argument("psd_welch: segment length must be a power of two >= 4");
    if (segment_length > x.size())
        throw std::invalid_argument("psd_welch: segment longer than the series");
    if (!(overlap >= 0.0) || !(overlap <= 0.9))
        throw std::invalid_argument("psd_welch: overlap must be in [0, 0.9]");

    const std::size_t n = segment_length;
    const std::size_t stride =
        std::max<std::size_t>(1, static_cast<std::size_t>(std::lround((1.0 - overlap) * n)));

    std::vector<double> window(n);
    double wsum_sq = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        window[i] = 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * i / n));
        wsum_sq += window[i] * window[i];
    }

    const double fs = 1.0 / dt;
    PsdEstimate out;
    out.frequency.resize(n / 2 + 1);
    for (std::size_t j = 0; j <= n / 2; ++j)
        out.frequency[j] = static_cast<double>(j) * fs / static_cast<double>(n);
    out.psd.assign(n / 2 + 1, 0.0);

    std::vector<std::complex<double>> buf(n);
    for (std::size_t start = 0; start + n <= x.size(); start += stride) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += x[start + i];
        mean /= static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) buf[i] = (x[start + i] - mean) * window[i];
        detail::fft_radix2(buf);
        for (std::size_t j = 0; j <= n / 2; ++j) {
            const double mag2 = std::norm(buf[j]);
            const double one_sided = (j == 0 || j == n / 2) ? 1.0 : 2.0;
            out.psd[j] += one_sided * mag2 / (fs * wsum_sq);
        }
        ++out.segments;
    }
    if (out.segments == 0) throw std::invalid_argument("psd_welch: no complete segment fits");
    for (auto& p : out.psd) p /= static_cast<double>(out.segments);
    return out;
}

inline PsdEstimate psd_welch(const TimeSeries& ts, std::size_t segment_length, double overlap) {
    return psd_welch(ts.x, ts.dt, segment_length, overlap);
}

// Inverse of the displacement transfer function: an estimate of the driving
// force PSD from the position PSD,
//   S_ff(f) = S_xx(f) * m^2 [ (omega^2 - w^2)^2 + (omega w / Q)^2 ],  w = 2 pi f.
inline double force_psd_from_position_psd(double s_xx, double f, const ResonatorSpec& r) {
    const double w = 2.0 * std::numbers::pi * f;
    const double det = (r.omega * r.omega - w * w);
    const double damp = r.omega * w / r.quality;
    return s_xx * r.mass * r.mass * (det * det + damp * damp);
}

inline std::string psd_to_csv(const PsdEstimate& p) {
    std::string s = "f_Hz,psd\n";
    for (std::size_t i = 0; i < p.frequency.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", p.frequency[i], p.psd[i]);
        s += buf;
    }
    return s;
}

}  // namespace csl

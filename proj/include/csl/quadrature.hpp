#pragma once

// Adaptive quadrature used by the diffusion integrals.
//
//  - integrate_1d: globally adaptive 15-point Gauss-Kronrod (embedded 7-point
//    Gauss rule for the error estimate), largest-error-first interval
//    subdivision.
//  - integrate_nd<N>: globally adaptive Genz-Malik degree-7 cubature with the
//    embedded degree-5 rule for the error estimate (N = 2 or 3), splitting the
//    box with the largest error along the axis with the largest fourth
//    divided difference.
//
// Both engines share the evaluation-budget contract: if the tolerance is not
// reached within the budget they throw QuadratureError carrying the best
// estimate and its error bound.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <string>
#include <vector>

#include "csl/errors.hpp"

namespace csl {

struct QuadratureOptions {
    double rel_tol = 1e-6;
    double abs_tol = 0.0;  // floor for integrals that cancel to ~zero
    std::size_t max_evals = std::size_t{1} << 20;
};

struct QuadratureResult {
    double value = 0.0;
    double abs_error = 0.0;   // estimated absolute error
    std::size_t evals = 0;

    double rel_error() const {
        const double scale = std::abs(value);
        return scale > 0.0 ? abs_error / scale : abs_error;
    }
};

class QuadratureError : public NumericalError {
public:
    QuadratureError(const std::string& what, double best, double error_bound)
        : NumericalError(what), best_estimate(best), error_bound(error_bound) {}
    double best_estimate;
    double error_bound;
};

namespace detail {

// Nodes/weights of the 15-point Kronrod rule with embedded 7-point Gauss rule
// (QUADPACK dqk15 constants), on [-1, 1].
inline constexpr std::array<double, 8> kGk15Nodes = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};

inline constexpr std::array<double, 8> kGk15WeightsK = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};

inline constexpr std::array<double, 4> kGk15WeightsG = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

struct Interval {
    double a, b;
    double value;
    double error;
    bool operator<(const Interval& o) const { return error < o.error; }
};

// One GK15 evaluation over [a,b]. 15 integrand evaluations.
template <typename F>
Interval gk15(const F& f, double a, double b) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);

    std::array<double, 7> flo, fhi;
    const double fc = f(mid);
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kGk15Nodes[j];
        flo[j] = f(mid - dx);
        fhi[j] = f(mid + dx);
    }

    double result_k = fc * kGk15WeightsK[7];
    double result_g = fc * kGk15WeightsG[3];
    for (int j = 0; j < 7; ++j) {
        result_k += kGk15WeightsK[j] * (flo[j] + fhi[j]);
        if (j % 2 == 1) result_g += kGk15WeightsG[j / 2] * (flo[j] + fhi[j]);
    }

    // QUADPACK-style scaled error: resasc measures the variation of f over the
    // interval; the raw |K - G| difference is inflated on rough integrands.
    const double mean = 0.5 * result_k;
    double resasc = kGk15WeightsK[7] * std::abs(fc - mean);
    for (int j = 0; j < 7; ++j)
        resasc += kGk15WeightsK[j] * (std::abs(flo[j] - mean) + std::abs(fhi[j] - mean));
    resasc *= half;

    Interval out;
    out.a = a;
    out.b = b;
    out.value = result_k * half;
    double err = std::abs((result_k - result_g) * half);
    if (resasc != 0.0 && err != 0.0)
        err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    out.error = err;
    return out;
}

}  // namespace detail

// Globally adaptive 1D quadrature of f over [a, b].
template <typename F>
QuadratureResult integrate_1d(const F& f, double a, double b,
                              const QuadratureOptions& opts = {},
                              int initial_intervals = 8) {
    std::priority_queue<detail::Interval> heap;
    double total = 0.0, total_err = 0.0;
    std::size_t evals = 0;

    const double w = (b - a) / initial_intervals;
    for (int i = 0; i < initial_intervals; ++i) {
        auto iv = detail::gk15(f, a + i * w, a + (i + 1) * w);
        evals += 15;
        total += iv.value;
        total_err += iv.error;
        heap.push(iv);
    }

    auto converged = [&] {
        return total_err <=
               std::max(opts.rel_tol * std::max(std::abs(total), 1e-300), opts.abs_tol);
    };

    while (!converged()) {
        if (evals + 30 > opts.max_evals || heap.empty()) {
            throw QuadratureError(
                "quadrature did not reach relative tolerance " +
                    std::to_string(opts.rel_tol) + " within " +
                    std::to_string(opts.max_evals) +
                    " evaluations; best estimate " + std::to_string(total) +
                    " +/- " + std::to_string(total_err),
                total, total_err);
        }
        detail::Interval worst = heap.top();
        heap.pop();
        total -= worst.value;
        total_err -= worst.error;
        const double mid = 0.5 * (worst.a + worst.b);
        for (auto [lo, hi] : {std::pair{worst.a, mid}, std::pair{mid, worst.b}}) {
            auto iv = detail::gk15(f, lo, hi);
            evals += 15;
            total += iv.value;
            total_err += iv.error;
            heap.push(iv);
        }
    }

    return {total, total_err, evals};
}

namespace detail {

// Genz-Malik degree-7 rule with embedded degree-5 error rule on an
// N-dimensional box. 33 points for N=3, 17 for N=2.
template <std::size_t N>
struct GmBox {
    std::array<double, N> lo, hi;
    double value;
    double error;
    std::size_t split_dim;
    bool operator<(const GmBox& o) const { return error < o.error; }
};

template <std::size_t N, typename F>
GmBox<N> genz_malik(const F& f, const std::array<double, N>& lo,
                    const std::array<double, N>& hi, std::size_t& evals) {
    static constexpr double l2 = 0.358568582800318073;   // sqrt(9/70)
    static constexpr double l4 = 0.948683298050513800;   // sqrt(9/10)
    static constexpr double l5 = 0.688247201611685289;   // sqrt(9/19)
    constexpr double n = static_cast<double>(N);

    const double w1 = (12824.0 - 9120.0 * n + 400.0 * n * n) / 19683.0;
    const double w2 = 980.0 / 6561.0;
    const double w3 = (1820.0 - 400.0 * n) / 19683.0;
    const double w4 = 200.0 / 19683.0;
    const double w5 = 6859.0 / 19683.0 / static_cast<double>(1u << N);
    const double e1 = (729.0 - 950.0 * n + 50.0 * n * n) / 729.0;
    const double e2 = 245.0 / 486.0;
    const double e3 = (265.0 - 100.0 * n) / 1458.0;
    const double e4 = 25.0 / 729.0;

    std::array<double, N> c, h;
    double volume = 1.0;
    for (std::size_t i = 0; i < N; ++i) {
        c[i] = 0.5 * (lo[i] + hi[i]);
        h[i] = 0.5 * (hi[i] - lo[i]);
        volume *= 2.0 * h[i];
    }

    auto eval_at = [&](const std::array<double, N>& offsets) {
        std::array<double, N> x;
        for (std::size_t i = 0; i < N; ++i) x[i] = c[i] + offsets[i] * h[i];
        ++evals;
        return f(x);
    };

    const double f0 = eval_at(std::array<double, N>{});

    double sum2 = 0.0, sum3 = 0.0;
    std::array<double, N> divdiff{};
    for (std::size_t i = 0; i < N; ++i) {
        std::array<double, N> off{};
        off[i] = l2;
        const double fp2 = eval_at(off);
        off[i] = -l2;
        const double fm2 = eval_at(off);
        off[i] = l4;
        const double fp4 = eval_at(off);
        off[i] = -l4;
        const double fm4 = eval_at(off);
        sum2 += fp2 + fm2;
        sum3 += fp4 + fm4;
        // Fourth divided difference along axis i; picks the split direction.
        constexpr double ratio = (l2 * l2) / (l4 * l4);
        divdiff[i] = std::abs(fp2 + fm2 - 2.0 * f0 - ratio * (fp4 + fm4 - 2.0 * f0));
    }

    double sum4 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
        for (std::size_t j = i + 1; j < N; ++j) {
            for (double si : {l4, -l4}) {
                for (double sj : {l4, -l4}) {
                    std::array<double, N> off{};
                    off[i] = si;
                    off[j] = sj;
                    sum4 += eval_at(off);
                }
            }
        }
    }

    double sum5 = 0.0;
    for (std::size_t corner = 0; corner < (1u << N); ++corner) {
        std::array<double, N> off;
        for (std::size_t i = 0; i < N; ++i)
            off[i] = (corner & (1u << i)) ? l5 : -l5;
        sum5 += eval_at(off);
    }

    const double res7 = volume * (w1 * f0 + w2 * sum2 + w3 * sum3 + w4 * sum4 + w5 * sum5);
    const double res5 = volume * (e1 * f0 + e2 * sum2 + e3 * sum3 + e4 * sum4);

    GmBox<N> out;
    out.lo = lo;
    out.hi = hi;
    out.value = res7;
    out.error = std::abs(res7 - res5);
    out.split_dim = 0;
    double best = -1.0;
    for (std::size_t i = 0; i < N; ++i) {
        // Break divided-difference ties toward the widest axis.
        const double score = divdiff[i] * h[i] * h[i];
        if (score > best) {
            best = score;
            out.split_dim = i;
        }
    }
    return out;
}

}  // namespace detail

// Globally adaptive N-dimensional cubature over an axis-aligned box.
template <std::size_t N, typename F>
QuadratureResult integrate_nd(const F& f, const std::array<double, N>& lo,
                              const std::array<double, N>& hi,
                              const QuadratureOptions& opts = {},
                              std::size_t min_boxes = 32) {
    static_assert(N == 2 || N == 3, "Genz-Malik cubature implemented for N=2,3");
    std::priority_queue<detail::GmBox<N>> heap;
    double total = 0.0, total_err = 0.0;
    std::size_t evals = 0, boxes = 1;

    auto first = detail::genz_malik<N>(f, lo, hi, evals);
    total = first.value;
    total_err = first.error;
    heap.push(first);

    constexpr std::size_t evals_per_box = (N == 3) ? 33 : 17;

    auto converged = [&] {
        return boxes >= min_boxes &&
               total_err <=
                   std::max(opts.rel_tol * std::max(std::abs(total), 1e-300), opts.abs_tol);
    };

    while (!converged()) {
        if (evals + 2 * evals_per_box > opts.max_evals || heap.empty()) {
            throw QuadratureError(
                "cubature did not reach relative tolerance " +
                    std::to_string(opts.rel_tol) + " within " +
                    std::to_string(opts.max_evals) +
                    " evaluations; best estimate " + std::to_string(total) +
                    " +/- " + std::to_string(total_err),
                total, total_err);
        }
        auto worst = heap.top();
        heap.pop();
        total -= worst.value;
        total_err -= worst.error;
        const std::size_t d = worst.split_dim;
        const double mid = 0.5 * (worst.lo[d] + worst.hi[d]);
        for (int side = 0; side < 2; ++side) {
            auto lo2 = worst.lo;
            auto hi2 = worst.hi;
            (side == 0 ? hi2[d] : lo2[d]) = mid;
            auto box = detail::genz_malik<N>(f, lo2, hi2, evals);
            total += box.value;
            total_err += box.error;
            heap.push(box);
        }
        ++boxes;
    }

    return {total, total_err, evals};
}

}  // namespace csl

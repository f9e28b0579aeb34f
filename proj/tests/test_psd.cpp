#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "csl/psd.hpp"
#include "csl/rng.hpp"
#include "csl/simulator.hpp"

using namespace csl;

namespace {

double integrate_psd(const PsdEstimate& est) {
    const double df = est.frequency[1] - est.frequency[0];
    double acc = 0.0;
    for (double p : est.psd) acc += p * df;
    return acc;
}

}  // namespace

TEST_CASE("fft of a pure tone lands in one bin", "[psd]") {
    const std::size_t n = 256;
    std::vector<std::complex<double>> a(n);
    for (std::size_t i = 0; i < n; ++i)
        a[i] = std::cos(2.0 * std::numbers::pi * 16.0 * i / n);
    detail::fft_radix2(a);
    CHECK(std::abs(a[16]) == Catch::Approx(n / 2.0).epsilon(1e-9));
    CHECK(std::abs(a[n - 16]) == Catch::Approx(n / 2.0).epsilon(1e-9));
    double rest = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        if (j != 16 && j != n - 16) rest = std::max(rest, std::abs(a[j]));
    CHECK(rest < 1e-9 * n);
}

TEST_CASE("sinusoid integrates to half the squared amplitude", "[psd]") {
    const double amp = 2.5e-9, freq = 37.3, fs = 1000.0;
    const std::size_t n = 32768;
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = amp * std::sin(2.0 * std::numbers::pi * freq * i / fs);
    const auto est = psd_welch(x, 1.0 / fs, 4096, 0.5);
    CHECK(integrate_psd(est) == Catch::Approx(0.5 * amp * amp).epsilon(0.02));
}

TEST_CASE("white noise has a flat psd at 2 sigma^2 dt", "[psd]") {
    const double sigma = 3e-8, dt = 1e-3;
    PhiloxRng rng(11);
    std::vector<double> x(1 << 17);
    for (auto& v : x) v = sigma * rng.gaussian();
    const auto est = psd_welch(x, dt, 1024, 0.5);

    // average level across bins away from DC/Nyquist
    double level = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 4; j + 4 < est.psd.size(); ++j) {
        level += est.psd[j];
        ++count;
    }
    level /= static_cast<double>(count);
    const double expected = 2.0 * sigma * sigma * dt;
    CHECK(level == Catch::Approx(expected).epsilon(0.02));

    // Parseval: integral equals the variance
    CHECK(integrate_psd(est) == Catch::Approx(sigma * sigma).epsilon(0.02));
}

TEST_CASE("transfer-function inversion recovers the injected force psd", "[psd]") {
    SimConfig cfg;
    cfg.resonator = {1e-12, 2.0 * std::numbers::pi * 50.0, 10.0, 0.3};
    cfg.s_ff_total = 1e-36;
    cfg.dt = 1e-3;
    cfg.duration = 70.0;
    cfg.seed = 321;
    const auto ts = simulate(cfg);
    const auto est = psd_welch(ts, 4096, 0.5);

    // inverse-filter average over a band clear of DC and aliasing
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t j = 0; j < est.frequency.size(); ++j) {
        const double f = est.frequency[j];
        if (f < 5.0 || f > 120.0) continue;
        acc += force_psd_from_position_psd(est.psd[j], f, cfg.resonator);
        ++count;
    }
    REQUIRE(count > 50);
    CHECK(acc / count == Catch::Approx(cfg.s_ff_total).epsilon(0.10));
}

TEST_CASE("segmentation errors", "[psd]") {
    std::vector<double> x(1000, 0.0);
    CHECK_THROWS_AS(psd_welch(x, 1e-3, 2048, 0.5), std::invalid_argument);  // too long
    CHECK_THROWS_AS(psd_welch(x, 1e-3, 300, 0.5), std::invalid_argument);   // not a power of 2
    CHECK_THROWS_AS(psd_welch(x, 1e-3, 256, 0.95), std::invalid_argument);  // overlap > 0.9
    CHECK_THROWS_AS(psd_welch(x, 0.0, 256, 0.5), std::invalid_argument);    // bad dt
    CHECK_THROWS_AS(psd_welch(x, 1e-3, 2, 0.5), std::invalid_argument);     // too short
}

TEST_CASE("welch output grid", "[psd]") {
    std::vector<double> x(4096, 1.0);
    const auto est = psd_welch(x, 1e-3, 512, 0.5);
    REQUIRE(est.frequency.size() == 257);
    CHECK(est.frequency.front() == 0.0);
    CHECK(est.frequency.back() == Catch::Approx(500.0));
    CHECK(est.segments == 15);
    // constant series: mean removal leaves nothing
    for (double p : est.psd) CHECK(p < 1e-25);
}

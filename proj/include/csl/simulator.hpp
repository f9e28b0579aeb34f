#pragma once

// Time-domain simulation of a damped harmonic oscillator driven by white
// force noise of one-sided PSD S_ff:
//
//   m xdd = -m omega^2 x - (m omega / Q) xd + F(t),   <F(t)F(t')> = (S_ff/2) delta(t-t')
//
// The integrator is the exact exponential update of the linear SDE, with the
// per-step transition matrix and noise covariance in closed form (derivation
// in docs/langevin_integrator.md), so the drift carries no discretization
// bias:
//
//   X_{n+1} = M(dt) X_n + N(0, Sigma(dt)),   X = (x, v)
//
// with, writing alpha = omega/(2Q), wd = sqrt(omega^2 - alpha^2),
// c = cos(wd dt), s = sin(wd dt), E = e^{-alpha dt}:
//
//   M = E [ c + (alpha/wd) s        s/wd
//           -(omega^2/wd) s         c - (alpha/wd) s ]
//
// and Sigma from the standard damped-oscillator Ito integrals (I1, I2, I3
// below). Q >= 1 keeps the oscillator underdamped.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <string>
#include <vector>

#include "csl/budgets.hpp"
#include "csl/errors.hpp"
#include "csl/rng.hpp"

namespace csl {

struct SimConfig {
    ResonatorSpec resonator;
    double s_ff_total;  // N^2/Hz, one-sided
    double dt;          // s
    double duration;    // s
    std::uint64_t seed = 0;
    double x0 = 0.0;    // m
    double v0 = 0.0;    // m/s
};

struct TimeSeries {
    double dt = 0.0;
    std::vector<double> x;  // positions, sample i at t = i*dt (x[0] = x0)
    SimConfig config;       // echo
    std::vector<std::string> warnings;
};

inline void validate(const SimConfig& c) {
    validate(c.resonator);
    if (!(c.s_ff_total >= 0.0)) throw std::invalid_argument("sim: S_ff must be >= 0");
    if (!(c.dt > 0.0)) throw std::invalid_argument("sim: dt must be positive");
    if (!(c.duration > 0.0)) throw std::invalid_argument("sim: duration must be positive");
    const double period = 2.0 * std::numbers::pi / c.resonator.omega;
    if (c.dt > 0.05 * period)
        throw std::invalid_argument("sim: dt must be <= 0.05 * (2 pi / omega) = " +
                                    std::to_string(0.05 * period) + " s");
}

struct OscillatorState {
    double x = 0.0;
    double v = 0.0;
};

// Precomputed one-step propagator for fixed dt.
class OscillatorStepper {
public:
    OscillatorStepper(const ResonatorSpec& r, double s_ff_total, double dt) {
        const double omega = r.omega;
        const double alpha = 0.5 * omega / r.quality;
        const double wd = std::sqrt(omega * omega - alpha * alpha);
        const double c = std::cos(wd * dt), s = std::sin(wd * dt);
        const double decay = std::exp(-alpha * dt);

        m_xx_ = decay * (c + alpha / wd * s);
        m_xv_ = decay * s / wd;
        m_vx_ = -decay * omega * omega / wd * s;
        m_vv_ = decay * (c - alpha / wd * s);

        // White-noise intensity: v' = ... + sigma xi(t), <xi xi'> = delta,
        // sigma^2 = S_ff / (2 m^2) for a one-sided force PSD.
        const double sigma2 = s_ff_total / (2.0 * r.mass * r.mass);

        // Ito covariance of the exact update over one step:
        //   E0 = int_0^dt e^{-2 alpha s} ds, and the cos/sin(2 wd s) variants.
        const double e2 = std::exp(-2.0 * alpha * dt);
        const double c2 = std::cos(2.0 * wd * dt), s2 = std::sin(2.0 * wd * dt);
        const double omega2 = omega * omega;
        const double E0 = (1.0 - e2) / (2.0 * alpha);
        const double Ec = (alpha - e2 * (alpha * c2 - wd * s2)) / (2.0 * omega2);
        const double Es = (wd - e2 * (wd * c2 + alpha * s2)) / (2.0 * omega2);
        const double I1 = 0.5 * (E0 - Ec);
        const double I2 = 0.5 * Es;
        const double I3 = 0.5 * (E0 + Ec);

        const double wd2 = wd * wd;
        const double cov_xx = sigma2 * I1 / wd2;
        const double cov_xv = sigma2 * (I2 / wd - alpha * I1 / wd2);
        const double cov_vv =
            sigma2 * (I3 - 2.0 * alpha / wd * I2 + alpha * alpha / wd2 * I1);

        // Cholesky factor of Sigma.
        noise_xx_ = std::sqrt(std::max(0.0, cov_xx));
        noise_vx_ = noise_xx_ > 0.0 ? cov_xv / noise_xx_ : 0.0;
        noise_vv_ = std::sqrt(std::max(0.0, cov_vv - noise_vx_ * noise_vx_));
    }

    OscillatorState step(const OscillatorState& in, PhiloxRng& rng) const {
        OscillatorState out;
        out.x = m_xx_ * in.x + m_xv_ * in.v;
        out.v = m_vx_ * in.x + m_vv_ * in.v;
        if (noise_xx_ > 0.0 || noise_vv_ > 0.0) {
            const double z1 = rng.gaussian();
            const double z2 = rng.gaussian();
            out.x += noise_xx_ * z1;
            out.v += noise_vx_ * z1 + noise_vv_ * z2;
        }
        return out;
    }

    // Deterministic part only (used by the step-doubling exactness check).
    OscillatorState drift(const OscillatorState& in) const {
        return {m_xx_ * in.x + m_xv_ * in.v, m_vx_ * in.x + m_vv_ * in.v};
    }

private:
    double m_xx_, m_xv_, m_vx_, m_vv_;
    double noise_xx_, noise_vx_, noise_vv_;
};

// Run the simulation; floor(duration/dt) samples, deterministic for a fixed
// seed. Throws NumericalError identifying the step if the state leaves the
// finite range.
inline TimeSeries simulate(const SimConfig& cfg) {
    validate(cfg);
    TimeSeries ts;
    ts.dt = cfg.dt;
    ts.config = cfg;

    const double relaxation = 2.0 * cfg.resonator.quality / cfg.resonator.omega;
    if (cfg.duration < 100.0 * relaxation)
        ts.warnings.push_back(
            "duration below 100 relaxation times (2Q/omega); averages will be noisy");

    const auto n = static_cast<std::size_t>(cfg.duration / cfg.dt);
    ts.x.reserve(n);

    OscillatorStepper stepper(cfg.resonator, cfg.s_ff_total, cfg.dt);
    PhiloxRng rng(cfg.seed);
    OscillatorState state{cfg.x0, cfg.v0};
    for (std::size_t i = 0; i < n; ++i) {
        ts.x.push_back(state.x);
        if (!std::isfinite(state.x) || !std::isfinite(state.v))
            throw NumericalError("simulate: non-finite state at step " + std::to_string(i));
        state = stepper.step(state, rng);
    }
    return ts;
}

// CSV export `t_s,x_m` (metadata goes to a JSON sidecar, written by the CLI).
inline std::string series_to_csv(const TimeSeries& ts) {
    std::string s = "t_s,x_m\n";
    s.reserve(s.size() + 48 * ts.x.size());
    for (std::size_t i = 0; i < ts.x.size(); ++i) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", i * ts.dt, ts.x[i]);
        s += buf;
    }
    return s;
}

}  // namespace csl

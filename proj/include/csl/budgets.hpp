#pragma once

// Measurable budgets: force-noise PSD for a resonator, bulk heating power,
// and per-atom energy gain for cold-atom clouds.
//
// One-sided PSD convention throughout: the thermal force noise of a resonator
// is 4 k_B T m omega / Q. Heating outputs probe the effective collapse rate
// lambda_eff (equal to lambda only for white collapse noise); the frequency
// mapping itself is not modeled here.

#include <cmath>
#include <stdexcept>

#include "csl/constants.hpp"

namespace csl {

struct ResonatorSpec {
    double mass;         // kg
    double omega;        // rad/s
    double quality;      // dimensionless Q
    double temperature;  // K
};

inline void validate(const ResonatorSpec& r) {
    if (!(r.mass > 0.0) || !(r.omega > 0.0) || !(r.temperature > 0.0))
        throw std::invalid_argument("resonator: mass, omega, temperature must be positive");
    if (!(r.quality >= 1.0))
        throw std::invalid_argument("resonator: Q must be >= 1");
    if (!std::isfinite(r.mass) || !std::isfinite(r.omega) || !std::isfinite(r.quality) ||
        !std::isfinite(r.temperature))
        throw std::invalid_argument("resonator: non-finite field");
}

struct CalorimeterSpec {
    double mass;               // kg
    double heat_leak_ceiling;  // W/kg
};

inline void validate(const CalorimeterSpec& c) {
    if (!(c.mass > 0.0) || !(c.heat_leak_ceiling > 0.0))
        throw std::invalid_argument("calorimeter: mass and heat-leak ceiling must be positive");
}

struct CloudSpec {
    double atom_mass;            // kg
    int nucleons_per_atom;       // used for per-nucleon reporting only
    double energy_rate_ceiling;  // W per atom
};

inline void validate(const CloudSpec& c) {
    if (!(c.atom_mass > 0.0) || !(c.energy_rate_ceiling > 0.0))
        throw std::invalid_argument("cloud: atom mass and energy-rate ceiling must be positive");
    if (c.nucleons_per_atom < 1)
        throw std::invalid_argument("cloud: nucleons_per_atom must be >= 1");
}

struct ForceNoisePsd {
    double total;    // N^2/Hz
    double thermal;  // 4 k_B T m omega / Q
    double csl;      // 2 hbar^2 eta
};

// S_ff = 4 k_B T m omega / Q + 2 hbar^2 eta, with the two addends reported
// separately for budget breakdowns. eta in m^-2 s^-1.
inline ForceNoisePsd force_noise_psd(const ResonatorSpec& r, double eta,
                                     const PhysicalConstants& pc = constants()) {
    validate(r);
    if (!(eta >= 0.0)) throw std::invalid_argument("force_noise_psd: eta must be >= 0");
    ForceNoisePsd out;
    out.thermal = 4.0 * pc.k_B * r.temperature * r.mass * r.omega / r.quality;
    out.csl = 2.0 * pc.hbar * pc.hbar * eta;
    out.total = out.thermal + out.csl;
    return out;
}

// Bulk heating power dE/dt = (3/4) lambda hbar^2 M / (r_C^2 m_N^2).
inline double heating_power(const CalorimeterSpec& c, double lambda, double r_c,
                            const PhysicalConstants& pc = constants()) {
    validate(c);
    if (!(lambda >= 0.0)) throw std::invalid_argument("heating_power: lambda must be >= 0");
    if (!(r_c > 0.0)) throw std::invalid_argument("heating_power: r_c must be positive");
    const double mn = pc.m_nucleon;
    return 0.75 * lambda * pc.hbar * pc.hbar * c.mass / (r_c * r_c * mn * mn);
}

// Same heating rate obtained through the diffusion route,
// dE/dt = (3/2) hbar^2 eta(point of mass M) / M with eta = lambda M^2/(2 m0^2 r_C^2).
// Must equal heating_power identically; both routes are kept as a cross-check.
inline double heating_power_via_diffusion(double mass, double lambda, double r_c,
                                          const PhysicalConstants& pc = constants()) {
    if (!(mass > 0.0)) throw std::invalid_argument("heating_power_via_diffusion: mass > 0");
    if (!(lambda >= 0.0) || !(r_c > 0.0))
        throw std::invalid_argument("heating_power_via_diffusion: bad lambda or r_c");
    const double m_ratio = mass / pc.m_nucleon;
    const double eta = lambda * m_ratio * m_ratio / (2.0 * r_c * r_c);
    return 1.5 * pc.hbar * pc.hbar * eta / mass;
}

// Per-atom energy gain rate for a dilute cloud; the gas heating law applied
// with M = one atom mass. Atoms are treated as point-like, which assumes the
// atomic size is far below r_C.
inline double cloud_energy_rate(const CloudSpec& c, double lambda, double r_c,
                                const PhysicalConstants& pc = constants()) {
    validate(c);
    if (!(lambda >= 0.0)) throw std::invalid_argument("cloud_energy_rate: lambda must be >= 0");
    if (!(r_c > 0.0)) throw std::invalid_argument("cloud_energy_rate: r_c must be positive");
    const double mn = pc.m_nucleon;
    return 0.75 * lambda * pc.hbar * pc.hbar * c.atom_mass / (r_c * r_c * mn * mn);
}

// Convenience conversion: kinetic temperature drift dT/dt = (2/3) (dE/dt)/k_B.
inline double cloud_temperature_drift(const CloudSpec& c, double lambda, double r_c,
                                      const PhysicalConstants& pc = constants()) {
    return (2.0 / 3.0) * cloud_energy_rate(c, lambda, r_c, pc) / pc.k_B;
}

inline double cloud_energy_rate_per_nucleon(const CloudSpec& c, double lambda, double r_c,
                                            const PhysicalConstants& pc = constants()) {
    return cloud_energy_rate(c, lambda, r_c, pc) / c.nucleons_per_atom;
}

}  // namespace csl

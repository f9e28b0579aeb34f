#pragma once

// Physical constants in SI units. Single authoritative table; every module
// takes the table as a (defaulted) argument so a scenario file can override
// individual values.

namespace csl {

struct PhysicalConstants {
    double hbar = 1.054571817e-34;       // J s       (reduced Planck constant)
    double k_B = 1.380649e-23;           // J/K       (exact SI definition)
    double G = 6.67430e-11;              // m^3 kg^-1 s^-2
    // CSL reference mass m0. Fixed to the neutron mass: conventional in the
    // collapse-model literature and within 0.15% of the proton mass. Changing
    // it rescales every lambda bound by the square of the ratio.
    double m_nucleon = 1.67492749e-27;   // kg
    double amu = 1.66053906660e-27;      // kg        (unified atomic mass unit)
};

// Immutable default table; repeated calls return identical values.
inline const PhysicalConstants& constants() {
    static const PhysicalConstants table{};
    return table;
}

}  // namespace csl

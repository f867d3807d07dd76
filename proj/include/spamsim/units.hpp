#pragma once

// Physical constants in the unit system used throughout the library:
// energies in µeV, times in ns unless a field name says otherwise.

namespace spamsim::units {

inline constexpr double kBoltzmann_ueV_per_K = 86.173332621;
inline constexpr double kBohrMagneton_ueV_per_T = 57.883818060;
inline constexpr double kHbar_ueV_ns = 0.6582119569;
inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double thermal_energy_ueV(double temperature_mK) {
    return kBoltzmann_ueV_per_K * temperature_mK * 1e-3;
}

}  // namespace spamsim::units

#pragma once

#include <array>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spamsim {

/// Physical constants of one simulated device.
struct DeviceParams {
    double E_o_ueV = 160.0;        ///< two-electron orbital splitting
    double E_v_ueV = 250.0;        ///< excited valley splitting, outer dot
    double E_v_gauge_ueV = 250.0;  ///< gauge-electron valley splitting
    double T_e_mK = 220.0;         ///< effective electron temperature
    double B_mT = 1.5;
    double t_c_ueV = 20.0;         ///< tunnel coupling
    double g_factor = 2.0;

    double beta() const;  ///< 1/(k_B T_e) in 1/µeV
    double delta_st_ueV() const;
};

/// Returns one message per violated invariant, each naming the field path
/// under `prefix`.
std::vector<std::string> validate(const DeviceParams& params, const std::string& prefix = "device");

class EmptyWindowError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Branch energies near the (1,1)-(2,0) anticrossing. Positive detuning
/// favours (2,0); the (1,1) singlet sits at zero energy.
struct LevelDiagram {
    std::vector<double> detuning_ueV;
    std::vector<double> singlet_ground;
    std::vector<double> singlet_excited;
    /// Zeeman sublevels ordered m = -1, 0, +1.
    std::array<std::vector<double>, 3> triplet_ground;
    std::array<std::vector<double>, 3> triplet_excited;
    std::vector<double> orbital_20;  ///< diabatic (2,0) orbital triplet, degeneracy 3
    std::vector<double> valley_20;   ///< diabatic (2,0) valley manifold, degeneracy 4
};

LevelDiagram level_diagram(const DeviceParams& params, std::span<const double> grid);

double zeeman_splitting_ueV(const DeviceParams& params);

/// Ground-state (2,0) weight of a two-level avoided crossing.
double charge_character(double detuning_ueV, double t_c_ueV);

double singlet_ground_energy(double detuning_ueV, double t_c_ueV);

/// Thermal probability of finding the (2,0) charge configuration for a
/// state in the singlet (or triplet) sector at the given detuning.
double p20_singlet(const DeviceParams& params, double detuning_ueV);
double p20_triplet(const DeviceParams& params, double detuning_ueV);

/// Difference in (2,0) probability between singlet and triplet.
double spin_charge_contrast(const DeviceParams& params, double detuning_ueV);

struct DetuningInterval {
    double lo_ueV = 0.0;
    double hi_ueV = 0.0;
    double center() const { return 0.5 * (lo_ueV + hi_ueV); }
    double width() const { return hi_ueV - lo_ueV; }
};

/// Detuning interval where the spin-charge contrast is at least
/// `contrast_threshold`. Throws EmptyWindowError when none exists.
DetuningInterval measure_window(const DeviceParams& params, double contrast_threshold = 0.5);

/// Detuning of the crossing between the singlet ground branch and the
/// T-(1,1) branch; none at zero field.
std::optional<double> singlet_tminus_crossing(const DeviceParams& params);

}  // namespace spamsim

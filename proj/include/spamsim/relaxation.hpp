#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "spamsim/spectrum.hpp"

namespace spamsim {

struct HotSpot {
    /// Unset: placed at the singlet / T-(1,1) crossing of the level diagram.
    std::optional<double> center_ueV;
    double width_ueV = 10.0;
    double depth_ms = 1.0;  ///< T1 at the center
};

/// T1 over measurement detuning and source-drain bias. Rates add:
/// 1/T1 = 1/baseline + Σ Lorentzian hot-spot dips + c·max(0, V - V_onset)³.
struct T1Landscape {
    double baseline_ms = 20.0;
    std::vector<HotSpot> hot_spots;
    double V_onset_uV = 75.0;
    double cubic_per_ms_uV3 = 1e-6;

    /// Copy with every automatic hot-spot center filled in from `device`.
    T1Landscape resolved(const DeviceParams& device) const;
};

std::vector<std::string> validate(const T1Landscape& landscape, const std::string& prefix = "landscape");

/// T1 in ms. Hot-spot centers must be resolved.
double t1_at(const T1Landscape& landscape, double detuning_ueV, double V_sd_uV);

/// ½(1 - exp(-t_meas/T1)); both arguments in the same unit.
double t1_fidelity_bound(double t_meas, double t1);

/// Pointwise sum of the SNR and relaxation bounds; T1 and t_meas in ms.
std::vector<double> composite_fidelity_limit(std::span<const double> snr, std::span<const double> t1_ms,
                                             double t_meas_ms);

struct T1Fit {
    double t1_ns = 0.0;
    double t1_err_ns = 0.0;
    double amplitude = 0.0;
    bool censored = false;  ///< no resolvable decay within the duration grid
};

struct TrialMeasurementResult {
    std::vector<double> detuning_ueV;
    std::vector<double> duration_ns;
    std::vector<std::vector<double>> p_singlet;  ///< [detuning][duration]
    std::vector<T1Fit> fits;
};

/// Dephased state parked at each trial detuning for each duration, then read
/// with an ideal reference measurement; an exponential is fitted per detuning.
TrialMeasurementResult trial_measurement_experiment(const T1Landscape& landscape, double V_sd_uV,
                                                    std::span<const double> detuning_ueV,
                                                    std::span<const double> duration_ns,
                                                    std::size_t shots_per_point, std::uint64_t seed,
                                                    double triplet_fraction = 0.5);

/// Weighted exponential fit of P_T(t) = a·exp(-t/T1).
T1Fit fit_exponential_decay(std::span<const double> t_ns, std::span<const double> p_triplet,
                            std::size_t shots_per_point);

}  // namespace spamsim

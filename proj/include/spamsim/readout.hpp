#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "spamsim/spectrum.hpp"
#include "spamsim/state.hpp"

namespace spamsim {

struct WhiteSource {
    std::string name;
    double density_pV_rtHz = 250.0;
};

/// Dot-charge-sensor signal chain. Currents are in pA, the gain G_m in pA
/// per µV of DCS-gate-referred potential at the nominal bias V_sd.
struct ChainParams {
    double R_s_kOhm = 20.0;
    double C_p_pF = 8.0;
    double f_mod_MHz = 2.0;
    double V_sd_uV = 50.0;
    double G_m_pA_per_uV = 0.3;
    double A_uV_rtHz = 5.0;  ///< 1/f amplitude at 1 Hz
    std::vector<WhiteSource> white_sources = {
        {"hemt", 250.0}, {"johnson", 250.0}, {"shot", 250.0}};
    double delta_mu_uV = 355.0;  ///< DCS potential shift between charge states
    double t_settle_us = 7.02;
    double t_int_ns = 980.0;
    double T_experiment_s = 1.0;  ///< low-frequency cutoff for unreferenced 1/f noise
    double divider = 0.5;         ///< source-drain bias to DCS-potential lever
    double s2c_steepness = 10.0;
    double baseline_current_pA = 0.0;
    bool referenced = false;
};

std::vector<std::string> validate(const ChainParams& chain, const std::string& prefix = "readout");

/// Quadrature sum of the white sources, pV/√Hz.
double total_white_density_pV(const ChainParams& chain);

/// Equivalent noise bandwidth of boxcar demodulation times t_int
/// (dimensionless); evaluated by quadrature once.
double demodulation_enbw_factor();

/// Std-dev of the demodulated mean current from white noise alone.
double white_noise_sigma_pA(const ChainParams& chain, double t_int_ns);

/// ∫ sinc²(π f T)/f df from f = 1/T_experiment upward.
double unreferenced_flicker_factor(double t_int_ns, double T_experiment_s);

/// Reference-subtracted 1/f coefficient: σ² contribution is factor·G_m²A².
inline constexpr double kReferencedFlickerFactorBound = 16.0 * 0.69314718055994530942;

/// Histogram variance in pA². Referenced: 2σ_SD² + 16 ln2 G_m²A².
/// Unreferenced: σ_SD² + G_m²A² times the cutoff integral. `gain` overrides
/// G_m (used when sweeping bias).
double histogram_variance(const ChainParams& chain, double t_int_ns, bool referenced,
                          std::optional<double> gain_pA_per_uV = std::nullopt);

/// Spin-to-charge conversion efficiency from the splitting and the thermal
/// plus tunnel width.
double conversion_efficiency(const DeviceParams& device, double steepness = 10.0);

/// DCS gain at source-drain bias V: linear in V, compressed by the sech²
/// Coulomb-peak lineshape; equals G_m at the nominal V_sd.
double gain_at_bias(const ChainParams& chain, const DeviceParams& device, double V_sd_uV);

/// Singlet-to-triplet current separation.
double signal_pA(const ChainParams& chain, const DeviceParams& device, double V_sd_uV);

double snr(const ChainParams& chain, const DeviceParams& device, double t_int_ns, double V_sd_uV,
           bool referenced);

/// Nominal SNR scaled by the spin-charge contrast at each detuning, relative
/// to its value at the window center.
std::vector<double> snr_vs_detuning(const ChainParams& chain, const DeviceParams& device,
                                    std::span<const double> detuning_ueV);

/// Row-major [t_int][V_sd].
std::vector<std::vector<double>> snr_surface(const ChainParams& chain, const DeviceParams& device,
                                             std::span<const double> t_int_ns,
                                             std::span<const double> V_sd_uV, bool referenced);

/// ½ erfc(SNR / 2√2).
double snr_fidelity_bound(double snr);

/// Stationary Gaussian series with one-sided PSD A²/f (µV²/Hz), sampled at
/// `sample_rate_Hz`; spectral synthesis on the periodic FFT grid.
std::vector<double> synthesize_1f(double A_uV_rtHz, double duration_s, double sample_rate_Hz,
                                  std::uint64_t seed, std::uint64_t counter = 0);

struct Periodogram {
    std::vector<double> freq_Hz;
    std::vector<double> psd;  ///< one-sided, units²/Hz
};

Periodogram periodogram(std::span<const double> series, double sample_rate_Hz);

/// Time-domain Monte Carlo of the reference-subtracted demodulated current:
/// white voltage noise and synthesized 1/f potential noise, boxcar-demodulated
/// over two consecutive windows. Returns the sample variance in pA².
double simulate_referenced_variance(const ChainParams& chain, double t_int_ns, std::size_t n_shots,
                                    std::uint64_t seed);

struct Histogram {
    std::vector<double> edges;
    std::vector<std::size_t> counts;
    std::vector<double> shots;
};

Histogram make_histogram(std::vector<double> shots, std::size_t n_bins);
Histogram make_histogram(std::vector<double> shots, std::vector<double> edges);

/// Parameters of the generative shot model.
struct ShotModel {
    double mu_S_pA = 0.0;
    double mu_T_pA = 65.0;
    double sigma_pA = 10.0;
    double efficiency = 1.0;
    std::optional<double> t1_ns;  ///< relaxation T->S during settle + integration
    double t_settle_ns = 0.0;
    double t_int_ns = 980.0;
};

ShotModel shot_model(const ChainParams& chain, const DeviceParams& device,
                     std::optional<double> t1_ns = std::nullopt);

struct ShotRecord {
    std::vector<double> current_pA;
    std::vector<std::uint8_t> spin_triplet;  ///< prepared spin (leak counts as triplet)
    std::vector<std::uint8_t> charge_11;     ///< charge after conversion
    std::vector<std::uint8_t> relaxed;       ///< decayed before the end of integration
};

ShotRecord simulate_shots(const ShotModel& model, const EncodedState& state, std::size_t n_shots,
                          std::uint64_t seed, std::uint64_t stream = stream_tag("shots"));

struct GaussianPairFit {
    double mu_S = 0.0;
    double mu_T = 0.0;
    double sigma_S = 0.0;
    double sigma_T = 0.0;
    double weight_S = 0.0;
    double weight_T = 0.0;
    double snr = 0.0;
    double log_likelihood = 0.0;
    double chi2_per_bin = 0.0;
    int iterations = 0;
};

class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DegenerateFitError : public FitError {
public:
    using FitError::FitError;
};

/// Maximum-likelihood two-Gaussian fit (EM) on the retained shots, seeded by
/// a two-cluster split starting at the median. The singlet component is the
/// lower-current one.
GaussianPairFit fit_double_gaussian(const Histogram& hist);

struct SpectroscopyMap {
    std::vector<double> detuning_ueV;
    std::vector<double> edges_pA;
    std::vector<std::vector<std::size_t>> counts;  ///< [detuning][bin]
    std::vector<double> triplet_branch_fraction;   ///< fraction of shots in (1,1)
};

SpectroscopyMap spin_blockade_spectroscopy(const ChainParams& chain, const DeviceParams& device,
                                           std::span<const double> detuning_ueV,
                                           std::size_t shots_per_point, std::uint64_t seed,
                                           const EncodedState& state, std::size_t n_bins = 80);

}  // namespace spamsim

#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "spamsim/spectrum.hpp"
#include "spamsim/state.hpp"

namespace spamsim {

enum class ChargeBoundary { b10_20, b20_30 };

std::string to_string(ChargeBoundary b);
ChargeBoundary parse_boundary(const std::string& text);

struct InitConfig {
    ChargeBoundary boundary = ChargeBoundary::b20_30;
    double gamma0_per_us = 5.0;
    double barrier_factor = 20.0;
    double flush_ns = 500.0;
    double offset_mV = 0.0;           ///< plunger bias relative to the boundary center
    double lever_ueV_per_mV = 100.0;  ///< plunger lever arm
    double drift_amplitude_mV = 0.0;
    double drift_tau_ns = 50.0;
    /// Plunger positions of the two boundaries on a shared axis (sweep maps).
    double boundary_10_20_mV = -2.0;
    double boundary_20_30_mV = 2.0;
    double dephased_triplet_fraction = 0.5;
};

std::vector<std::string> validate(const InitConfig& init, const std::string& prefix = "init");

/// Boltzmann populations: p0 = 1/Z, orbital triplet in p1, valley manifold in
/// leak.valley.
EncodedState equilibrium_population(const DeviceParams& params);

/// Two-level Boltzmann excited fraction of the gauge electron.
double gauge_excited_fraction(const DeviceParams& params);

/// Spin-dependent tunneling weight (S+1)/(2S+1) or S/(2S+1). Spins are passed doubled (2S) so half-integers stay exact.
double spin_tunnel_weight(int two_S_i, int two_S_j);

/// Modeled levels: S(2,0), T(2,0) orbital, valley singlet, valley triplet,
/// and the intermediate N±1 state K.
inline constexpr int kInitLevels = 5;

struct RateModel {
    std::array<double, kInitLevels> energy_ueV{};
    std::array<double, kInitLevels> degeneracy{};
    std::array<int, kInitLevels> two_S{};
    bool frozen = false;
    /// Generator Q[to][from] in 1/ns; columns sum to zero.
    std::array<std::array<double, kInitLevels>, kInitLevels> Q{};
};

/// Energy of K above S(2,0) at a bias offset.
double intermediate_energy_ueV(const InitConfig& init, const DeviceParams& params, double offset_mV);

RateModel rate_model(const InitConfig& init, const DeviceParams& params, double offset_mV);

/// 1/|slowest nonzero eigenvalue| of the generator at the nominal offset, ns.
double flush_time_constant_ns(const InitConfig& init, const DeviceParams& params);

/// Offset including the exponential settling transient.
double settle_distortion(const InitConfig& init, double t_ns);

struct FlushTrace {
    std::vector<double> t_ns;
    std::vector<EncodedState> state;
    std::vector<std::array<double, kInitLevels>> levels;  ///< raw level populations
    bool frozen = false;  ///< true if the bias never entered the window
};

/// Rate-equation evolution from `initial` sampled at each time of the
/// nondecreasing grid. Reported states are the two-electron populations
/// renormalized after the exit from the boundary.
FlushTrace flush_dynamics(const InitConfig& init, const DeviceParams& params, std::span<const double> t_ns,
                          const EncodedState& initial);

/// Triplet-like fraction, row-major [duration][bias], on the shared plunger axis.
std::vector<std::vector<double>> init_sweep_map(const InitConfig& init, const DeviceParams& params,
                                                std::span<const double> bias_mV,
                                                std::span<const double> duration_ns);

}  // namespace spamsim

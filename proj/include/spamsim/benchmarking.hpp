#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace spamsim {

struct ChannelModel {
    double depolarizing = 0.0;  ///< per-Clifford contrast loss inside the qubit space
    double leak_in = 0.0;       ///< per Clifford, qubit -> leaked
    double leak_out = 0.0;      ///< per Clifford, leaked -> qubit (split evenly)
    double init_error = 0.0;    ///< prepared in the wrong qubit state
    double measure_error = 0.0; ///< symmetric readout flip
    double mapping_error = 0.0; ///< wrong qubit state after the ramp into (1,1)
    double init_leak = 0.0;     ///< prepared outside the qubit space
    double gauge_excited = 0.0; ///< fraction of runs with a scrambling gauge electron
    double leak_reads_triplet = 1.0;
    bool leak_reads_as_prepared = false;  ///< assignment-fidelity convention only

    /// Depolarizing strength that gives a total contrast decay p per Clifford.
    static double depolarizing_for(double p, double leak_in);
};

std::vector<std::string> validate(const ChannelModel& c, const std::string& prefix = "channel");

/// Populations (correct, wrong, leaked) relative to the ideal outcome.
using Populations = std::array<double, 3>;

Populations initial_populations(const ChannelModel& c);
Populations apply_clifford(const ChannelModel& c, const Populations& pops);

/// Expected outcomes after N Cliffords: probability of reading |0> for the
/// identity-compiling (y0) and inversion-compiling (y1) sequences.
struct RbExpectation {
    double y0 = 0.0;
    double y1 = 0.0;
};
RbExpectation blind_rb_expectation(const ChannelModel& c, int length);

struct RbCurves {
    std::vector<int> lengths;
    std::vector<double> y0, y0_err, y1, y1_err;
};

RbCurves run_blind_rb(const ChannelModel& c, std::span<const int> lengths, std::size_t sequences,
                      std::size_t shots, std::uint64_t seed);

struct RbParams {
    double A = 0.0, B = 0.0, C = 0.0, p = 0.0, q = 0.0;
};

/// Closed-form fit parameters of the channel.
RbParams channel_truth(const ChannelModel& c);

struct RbFit {
    RbParams params;
    RbParams errors;
    Eigen::Matrix<double, 5, 5> covariance = Eigen::Matrix<double, 5, 5>::Zero();
    double chi2 = 0.0;
    int dof = 0;
    int iterations = 0;
    std::vector<std::string> warnings;

    double f_bc_infidelity() const { return 0.5 - params.B; }
    double f_bc_error() const { return errors.B; }
    double per_clifford_error() const { return 0.5 * params.p; }
};

class RbFitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Joint weighted fit of y0 = A + B(1-p)^N + C(1-q)^N and
/// y1 = A - B(1-p)^N + C(1-q)^N.
RbFit fit_brb(const RbCurves& curves);

/// 1 - F_BC = 0.5 - B.
double f_bc(const RbFit& fit);

double assignment_fidelity(const ChannelModel& c, std::size_t shots, std::uint64_t seed);

struct ExchangeResult {
    std::vector<double> theta_rad;
    std::vector<double> p_singlet;
    double contrast = 0.0;
    double contrast_err = 0.0;
    double implied_infidelity = 0.0;
};

/// Ideal contrast of an n-axis rotation sweep of a singlet.
inline constexpr double kIdealExchangeContrast = 0.75;

/// Rotation sweep from a prepared singlet fraction; SPAM infidelity enters
/// as a flip probability chosen so the contrast drops by twice its value.
ExchangeResult exchange_contrast(double spam_infidelity, std::span<const double> theta_rad, std::size_t shots,
                                 std::uint64_t seed, double input_singlet = 1.0);

}  // namespace spamsim

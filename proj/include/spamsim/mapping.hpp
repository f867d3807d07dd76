#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spamsim/initialization.hpp"
#include "spamsim/readout.hpp"
#include "spamsim/relaxation.hpp"
#include "spamsim/spectrum.hpp"

namespace spamsim {

enum class SegmentMode { jump, ramp };

struct RampSegment {
    double start_ueV = 0.0;
    double end_ueV = 0.0;
    double duration_ns = 0.0;  ///< 0 for jumps
    SegmentMode mode = SegmentMode::jump;
};

struct RampPlan {
    std::vector<RampSegment> segments;
};

/// Detuning coordinates of the two mapping plans. The (1,1)-(2,0) singlet
/// crossing sits at zero; idle lies deep in (1,1).
struct MappingParams {
    double init_ueV = 300.0;
    double entry_out_ueV = 80.0;
    double entry_in_ueV = -80.0;
    double idle_ueV = -1000.0;
    double measure_ueV = 80.0;
    double ramp_ns = 100.0;
    double dwell_ns = 0.0;
    double T2_idle_ns = 2000.0;
    double J_scale_ueV = 0.0271;
    double readout_t_int_ns = 10000.0;
    std::size_t shots = 1000000;
};

std::vector<std::string> validate(const MappingParams& m, const std::string& prefix = "mapping");
std::vector<std::string> validate(const RampPlan& plan, const std::string& prefix = "plan");

RampPlan direct_plan(const MappingParams& m);
/// Jump to the outer entry point, ramp across the anticrossing, jump to idle,
/// dwell, and retrace to the measure point.
RampPlan via_idle_plan(const MappingParams& m);

double total_duration_ns(const RampPlan& plan);

/// exp(-2π t_c² / (ħ v)), v in µeV/ns.
double lz_probability(double t_c_ueV, double sweep_rate_ueV_per_ns);

/// Singlet-triplet splitting on the singlet ground branch.
double exchange_splitting_ueV(double detuning_ueV, double t_c_ueV);

/// T2*_idle (1 + J(ε)/J_scale).
double t2star_ns(const MappingParams& m, double detuning_ueV, double t_c_ueV);

/// ∫ dt / T2*(ε(t)) over all segments of nonzero duration.
double dephasing_exponent(const RampPlan& plan, const MappingParams& m, double t_c_ueV);

/// 1 - exp(-dephasing exponent).
double ramp_dephasing(const RampPlan& plan, const MappingParams& m, double t_c_ueV);

/// Probability of at least one diabatic passage at the singlet crossing.
/// Ramps use the Landau-Zener formula at their sweep rate; jumps across the
/// crossing are fully diabatic.
double lz_accumulated(const RampPlan& plan, double t_c_ueV);

/// 1 - (1 - P_LZ)(1 - dephasing).
double mapping_error(const RampPlan& plan, const MappingParams& m, double t_c_ueV);

struct MappingResult {
    double init_triplet_like = 0.0;
    double error_direct = 0.0;
    double error_via_idle = 0.0;
    double fraction_direct = 0.0;
    double fraction_via_idle = 0.0;
    std::size_t shots = 0;
    double difference() const { return fraction_via_idle - fraction_direct; }
};

/// Flush, map with each plan, and read out with a thresholded shot model.
/// Both plans share per-shot random numbers.
MappingResult mapping_error_experiment(const MappingParams& m, const DeviceParams& device, const ChainParams& chain,
                                       const T1Landscape& landscape, const InitConfig& init, std::uint64_t seed);

}  // namespace spamsim

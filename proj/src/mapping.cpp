#include "spamsim/mapping.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <stdexcept>

#include "spamsim/units.hpp"

namespace spamsim {

std::vector<std::string> validate(const MappingParams& m, const std::string& prefix) {
    std::vector<std::string> out;
    if (!(m.entry_out_ueV > 0.0)) out.push_back(prefix + ".entry_out must be > 0 ((2,0) side)");
    if (!(m.entry_in_ueV < 0.0)) out.push_back(prefix + ".entry_in must be < 0 ((1,1) side)");
    if (!(m.idle_ueV <= m.entry_in_ueV)) out.push_back(prefix + ".idle must not lie above entry_in");
    if (!(m.ramp_ns > 0.0)) out.push_back(prefix + ".ramp must be > 0");
    if (!(m.dwell_ns >= 0.0)) out.push_back(prefix + ".dwell must be >= 0");
    if (!(m.T2_idle_ns > 0.0)) out.push_back(prefix + ".T2_idle must be > 0");
    if (!(m.J_scale_ueV > 0.0)) out.push_back(prefix + ".J_scale must be > 0");
    if (!(m.readout_t_int_ns > 0.0)) out.push_back(prefix + ".readout_t_int must be > 0");
    if (m.shots < 1) out.push_back(prefix + ".shots must be >= 1");
    return out;
}

std::vector<std::string> validate(const RampPlan& plan, const std::string& prefix) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < plan.segments.size(); ++i) {
        const auto& s = plan.segments[i];
        const std::string p = prefix + ".segments[" + std::to_string(i) + "]";
        if (s.mode == SegmentMode::jump && s.duration_ns != 0.0) out.push_back(p + " jump must have duration 0");
        if (s.mode == SegmentMode::ramp && !(s.duration_ns > 0.0)) out.push_back(p + " ramp must have duration > 0");
        if (i > 0 && plan.segments[i - 1].end_ueV != s.start_ueV)
            out.push_back(p + " does not start where the previous segment ends");
    }
    return out;
}

RampPlan direct_plan(const MappingParams& m) {
    return {{{m.init_ueV, m.measure_ueV, 0.0, SegmentMode::jump}}};
}

RampPlan via_idle_plan(const MappingParams& m) {
    RampPlan p;
    p.segments = {
        {m.init_ueV, m.entry_out_ueV, 0.0, SegmentMode::jump},
        {m.entry_out_ueV, m.entry_in_ueV, m.ramp_ns, SegmentMode::ramp},
        {m.entry_in_ueV, m.idle_ueV, 0.0, SegmentMode::jump},
        {m.idle_ueV, m.idle_ueV, m.dwell_ns, m.dwell_ns > 0.0 ? SegmentMode::ramp : SegmentMode::jump},
        {m.idle_ueV, m.entry_in_ueV, 0.0, SegmentMode::jump},
        {m.entry_in_ueV, m.entry_out_ueV, m.ramp_ns, SegmentMode::ramp},
        {m.entry_out_ueV, m.measure_ueV, 0.0, SegmentMode::jump},
    };
    return p;
}

double total_duration_ns(const RampPlan& plan) {
    double t = 0.0;
    for (const auto& s : plan.segments) t += s.duration_ns;
    return t;
}

double lz_probability(double t_c, double rate) {
    if (!(t_c > 0.0) || !(rate >= 0.0)) throw std::invalid_argument("lz_probability: need t_c > 0 and rate >= 0");
    if (rate == 0.0) return 0.0;
    return std::exp(-2.0 * units::kPi * t_c * t_c / (units::kHbar_ueV_ns * rate));
}

double exchange_splitting_ueV(double eps, double t_c) {
    return 0.5 * eps + std::sqrt(0.25 * eps * eps + t_c * t_c);
}

double t2star_ns(const MappingParams& m, double eps, double t_c) {
    return m.T2_idle_ns * (1.0 + exchange_splitting_ueV(eps, t_c) / m.J_scale_ueV);
}

double dephasing_exponent(const RampPlan& plan, const MappingParams& m, double t_c) {
    double total = 0.0;
    for (const auto& s : plan.segments) {
        if (s.duration_ns <= 0.0) continue;
        const double slope = (s.end_ueV - s.start_ueV) / s.duration_ns;
        auto f = [&](double t) { return 1.0 / t2star_ns(m, s.start_ueV + slope * t, t_c); };
        total += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, 0.0, s.duration_ns, 15, 1e-12);
    }
    return total;
}

double ramp_dephasing(const RampPlan& plan, const MappingParams& m, double t_c) {
    return -std::expm1(-dephasing_exponent(plan, m, t_c));
}

double lz_accumulated(const RampPlan& plan, double t_c) {
    double survive = 1.0;
    for (const auto& s : plan.segments) {
        const bool crosses = (s.start_ueV > 0.0) != (s.end_ueV > 0.0);
        if (!crosses) continue;
        const double p = s.duration_ns > 0.0
                             ? lz_probability(t_c, std::abs(s.end_ueV - s.start_ueV) / s.duration_ns)
                             : 1.0;
        survive *= 1.0 - p;
    }
    return 1.0 - survive;
}

double mapping_error(const RampPlan& plan, const MappingParams& m, double t_c) {
    return 1.0 - (1.0 - lz_accumulated(plan, t_c)) * std::exp(-dephasing_exponent(plan, m, t_c));
}

namespace {

EncodedState apply_flip(const EncodedState& s, double e) {
    EncodedState out = s;
    out.p1 = s.p1 * (1.0 - e) + s.p0 * e;
    out.p0 = 1.0 - out.p1 - out.p_leak();
    return out;
}

double triplet_fraction(const ShotModel& model, const EncodedState& state, std::size_t shots, std::uint64_t seed) {
    const ShotRecord rec = simulate_shots(model, state, shots, seed, stream_tag("mapping"));
    const double threshold = 0.5 * (model.mu_S_pA + model.mu_T_pA);
    std::size_t n = 0;
    for (double x : rec.current_pA) n += (x > threshold) == (model.mu_T_pA > model.mu_S_pA);
    return static_cast<double>(n) / static_cast<double>(shots);
}

}  // namespace

MappingResult mapping_error_experiment(const MappingParams& m, const DeviceParams& device, const ChainParams& chain,
                                       const T1Landscape& landscape, const InitConfig& init, std::uint64_t seed) {
    MappingResult r;
    const std::vector<double> t{init.flush_ns};
    const EncodedState prepared =
        flush_dynamics(init, device, t, EncodedState::mixture(init.dephased_triplet_fraction)).state.back();
    r.init_triplet_like = prepared.triplet_like();
    r.error_direct = mapping_error(direct_plan(m), m, device.t_c_ueV);
    r.error_via_idle = mapping_error(via_idle_plan(m), m, device.t_c_ueV);

    ChainParams readout = chain;
    readout.t_int_ns = m.readout_t_int_ns;
    const double t1_ms = t1_at(landscape.resolved(device), m.measure_ueV, chain.V_sd_uV);
    const ShotModel model = shot_model(readout, device, t1_ms * 1e6);
    r.shots = m.shots;
    r.fraction_direct = triplet_fraction(model, apply_flip(prepared, r.error_direct), m.shots, seed);
    r.fraction_via_idle = triplet_fraction(model, apply_flip(prepared, r.error_via_idle), m.shots, seed);
    return r;
}

}  // namespace spamsim

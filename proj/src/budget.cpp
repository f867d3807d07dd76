#include "spamsim/budget.hpp"

#include <cmath>
#include <fmt/format.h>

#include "spamsim/units.hpp"

namespace spamsim {

ErrorBudget assemble_budget(const DeviceParams& device, const ChainParams& chain, const T1Landscape& landscape,
                            const MappingParams& mapping, const BudgetOptions& options) {
    ErrorBudget b;
    b.boltzmann_exact = 1.0 - equilibrium_population(device).p0;
    const double boltzmann = options.boltzmann_quoted.value_or(b.boltzmann_exact);

    const double s = snr(chain, device, chain.t_int_ns, chain.V_sd_uV, chain.referenced);
    const double t1_ns = t1_at(landscape.resolved(device), mapping.measure_ueV, chain.V_sd_uV) * 1e6;
    const double t_meas_ns = chain.t_settle_us * 1e3 + chain.t_int_ns;

    b.entries = {
        {"Boltzmann", boltzmann, "initialization"},
        {"SNR", snr_fidelity_bound(s), "readout"},
        {"T1 (measurement & settle)", t1_fidelity_bound(t_meas_ns, t1_ns), "relaxation"},
        {"(1,1) mapping", mapping_error(via_idle_plan(mapping), mapping, device.t_c_ueV), "mapping"},
    };
    for (const auto& e : b.entries) b.total += e.contribution;
    return b;
}

void compare_budget(ErrorBudget& b, double observed) {
    if (!(observed >= 0.0 && observed <= 1.0)) throw std::invalid_argument("compare: observed must lie in [0, 1]");
    b.observed = observed;
    b.missing = std::max(0.0, observed - b.total);
}

double invert_missing_error(double missing, double T_e_mK) {
    if (!(T_e_mK > 0.0)) throw std::invalid_argument("invert_missing_error: T_e must be > 0");
    if (!(missing > 0.0)) throw std::invalid_argument("invert_missing_error: missing must be > 0");
    if (missing >= 0.5) throw NoSolutionError("invert_missing_error: no energy gives a fraction >= 0.5");
    return units::thermal_energy_ueV(T_e_mK) * std::log((1.0 - missing) / missing);
}

std::string format_budget(const ErrorBudget& b) {
    std::size_t width = 5;
    for (const auto& e : b.entries) width = std::max(width, e.label.size());
    std::string out = fmt::format("{:<{}}  {:>10}  {}\n", "Error", width, "1-F_BC", "source");
    for (const auto& e : b.entries)
        out += fmt::format("{:<{}}  {:>10.2e}  {}\n", e.label, width, e.contribution, e.source);
    out += fmt::format("{:<{}}  {:>10.2e}\n", "Total", width, b.total);
    if (b.observed) out += fmt::format("{:<{}}  {:>10.2e}\n", "Observed", width, *b.observed);
    if (b.missing) out += fmt::format("{:<{}}  {:>10.2e}\n", "Missing", width, *b.missing);
    out += fmt::format("Boltzmann, exact partition function: {:.3e}\n", b.boltzmann_exact);
    return out;
}

}  // namespace spamsim

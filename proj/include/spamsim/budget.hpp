#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "spamsim/initialization.hpp"
#include "spamsim/mapping.hpp"
#include "spamsim/readout.hpp"
#include "spamsim/relaxation.hpp"
#include "spamsim/spectrum.hpp"

namespace spamsim {

struct BudgetEntry {
    std::string label;
    double contribution = 0.0;
    std::string source;
};

struct ErrorBudget {
    std::vector<BudgetEntry> entries;
    double total = 0.0;
    double boltzmann_exact = 0.0;  ///< always reported next to a quoted override
    std::optional<double> observed;
    std::optional<double> missing;  ///< observed - total, floored at 0
};

struct BudgetOptions {
    /// Replaces the Boltzmann line item when set.
    std::optional<double> boltzmann_quoted;
};

ErrorBudget assemble_budget(const DeviceParams& device, const ChainParams& chain, const T1Landscape& landscape,
                            const MappingParams& mapping, const BudgetOptions& options = {});

/// Fills observed and missing.
void compare_budget(ErrorBudget& budget, double observed);

class NoSolutionError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Energy E with e^(-E/kT) / (1 + e^(-E/kT)) = missing, µeV.
double invert_missing_error(double missing, double T_e_mK);

/// Aligned plain-text table.
std::string format_budget(const ErrorBudget& budget);

}  // namespace spamsim

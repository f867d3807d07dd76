#pragma once

#include <cmath>
#include <stdexcept>

#include "spamsim/random.hpp"

namespace spamsim {

/// Population outside the qubit space, by origin.
struct LeakBreakdown {
    double valley = 0.0;  ///< excited valley states of the outer pair
    double gauge = 0.0;   ///< gauge electron in an excited state
    double total() const { return valley + gauge; }
};

/// Occupancy of the encoded qubit: singlet |0>, triplet |1>, and leaked.
struct EncodedState {
    double p0 = 1.0;
    double p1 = 0.0;
    LeakBreakdown leak;

    double p_leak() const { return leak.total(); }
    /// Fraction read out as triplet-like (blocked states read like triplets).
    double triplet_like() const { return p1 + p_leak(); }

    static EncodedState singlet() { return {}; }
    static EncodedState triplet() { return {0.0, 1.0, {}}; }
    static EncodedState mixture(double triplet_fraction) {
        return {1.0 - triplet_fraction, triplet_fraction, {}};
    }

    void check() const {
        auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
        if (!in_unit(p0) || !in_unit(p1) || !in_unit(leak.valley) || !in_unit(leak.gauge))
            throw std::invalid_argument("EncodedState: probabilities must lie in [0, 1]");
        if (std::abs(p0 + p1 + p_leak() - 1.0) > 1e-12)
            throw std::invalid_argument("EncodedState: probabilities must sum to 1");
    }
};

}  // namespace spamsim

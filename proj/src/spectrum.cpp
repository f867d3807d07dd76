#include "spamsim/spectrum.hpp"

#include <algorithm>
#include <cmath>

#include "spamsim/units.hpp"

namespace spamsim {

double DeviceParams::beta() const { return 1.0 / units::thermal_energy_ueV(T_e_mK); }

double DeviceParams::delta_st_ueV() const { return std::min(E_o_ueV, E_v_ueV); }

std::vector<std::string> validate(const DeviceParams& p, const std::string& prefix) {
    std::vector<std::string> out;
    auto positive = [&](double v, const char* name) {
        if (!(v > 0.0)) out.push_back(prefix + "." + name + " must be > 0");
    };
    positive(p.E_o_ueV, "E_o");
    positive(p.E_v_ueV, "E_v");
    positive(p.E_v_gauge_ueV, "E_v_gauge");
    positive(p.T_e_mK, "T_e");
    positive(p.t_c_ueV, "t_c");
    positive(p.g_factor, "g_factor");
    if (!(p.B_mT >= 0.0)) out.push_back(prefix + ".B must be >= 0");
    return out;
}

double zeeman_splitting_ueV(const DeviceParams& params) {
    return params.g_factor * units::kBohrMagneton_ueV_per_T * params.B_mT * 1e-3;
}

double charge_character(double detuning, double t_c) {
    const double gap = std::hypot(detuning, 2.0 * t_c);
    if (gap == 0.0) return 0.5;
    return 0.5 * (1.0 + detuning / gap);
}

double singlet_ground_energy(double detuning, double t_c) {
    return -0.5 * detuning - std::hypot(0.5 * detuning, t_c);
}

namespace {

double thermal_p20(double detuning, double t_c, double beta) {
    const double gap = std::hypot(detuning, 2.0 * t_c);
    const double c = charge_character(detuning, t_c);
    const double p_excited = 1.0 / (1.0 + std::exp(beta * gap));
    return c * (1.0 - p_excited) + (1.0 - c) * p_excited;
}

// Lower/upper eigenvalue of the coupled {(1,1), (2,0)} pair whose (2,0)
// member sits `offset` above the singlet (2,0) line.
std::pair<double, double> coupled_pair(double detuning, double offset, double t_c) {
    const double mid = 0.5 * (offset - detuning);
    const double half = std::hypot(0.5 * (offset - detuning), t_c);
    return {mid - half, mid + half};
}

}  // namespace

double p20_singlet(const DeviceParams& p, double detuning) {
    return thermal_p20(detuning, p.t_c_ueV, p.beta());
}

double p20_triplet(const DeviceParams& p, double detuning) {
    return thermal_p20(detuning - p.delta_st_ueV(), p.t_c_ueV, p.beta());
}

double spin_charge_contrast(const DeviceParams& p, double detuning) {
    return p20_singlet(p, detuning) - p20_triplet(p, detuning);
}

LevelDiagram level_diagram(const DeviceParams& p, std::span<const double> grid) {
    if (grid.empty()) throw std::invalid_argument("level_diagram: empty detuning grid");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] > grid[i - 1]))
            throw std::invalid_argument("level_diagram: detuning grid must be strictly increasing");
    }
    const double ez = zeeman_splitting_ueV(p);
    const double dst = p.delta_st_ueV();
    LevelDiagram d;
    d.detuning_ueV.assign(grid.begin(), grid.end());
    const std::size_t n = grid.size();
    d.singlet_ground.resize(n);
    d.singlet_excited.resize(n);
    for (auto& v : d.triplet_ground) v.resize(n);
    for (auto& v : d.triplet_excited) v.resize(n);
    d.orbital_20.resize(n);
    d.valley_20.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double eps = grid[i];
        auto [sg, se] = coupled_pair(eps, 0.0, p.t_c_ueV);
        d.singlet_ground[i] = sg;
        d.singlet_excited[i] = se;
        auto [tg, te] = coupled_pair(eps, dst, p.t_c_ueV);
        for (int m = -1; m <= 1; ++m) {
            d.triplet_ground[m + 1][i] = tg + m * ez;
            d.triplet_excited[m + 1][i] = te + m * ez;
        }
        d.orbital_20[i] = -eps + p.E_o_ueV;
        d.valley_20[i] = -eps + p.E_v_ueV;
    }
    return d;
}

DetuningInterval measure_window(const DeviceParams& p, double threshold) {
    const double center = 0.5 * p.delta_st_ueV();
    auto excess = [&](double eps) { return spin_charge_contrast(p, eps) - threshold; };
    if (!(excess(center) >= 0.0)) {
        throw EmptyWindowError("measure window is empty: singlet-triplet splitting does not exceed "
                               "the thermal and tunnel broadening");
    }
    // Contrast is symmetric about the center and falls off monotonically.
    double inside = center;
    double outside = center - p.delta_st_ueV() - 50.0 * (p.t_c_ueV + units::thermal_energy_ueV(p.T_e_mK));
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (inside + outside);
        (excess(mid) >= 0.0 ? inside : outside) = mid;
    }
    const double half = center - inside;
    return {center - half, center + half};
}

std::optional<double> singlet_tminus_crossing(const DeviceParams& p) {
    const double ez = zeeman_splitting_ueV(p);
    if (!(ez > 0.0)) return std::nullopt;
    auto diff = [&](double eps) {
        const double tminus = coupled_pair(eps, p.delta_st_ueV(), p.t_c_ueV).first - ez;
        return singlet_ground_energy(eps, p.t_c_ueV) - tminus;
    };
    double hi = 0.0;
    if (diff(hi) >= 0.0) return std::nullopt;
    double lo = -1.0;
    while (diff(lo) < 0.0) {
        lo *= 2.0;
        if (lo < -1e12) return std::nullopt;
    }
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (diff(mid) < 0.0 ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

}  // namespace spamsim

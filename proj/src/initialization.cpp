#include "spamsim/initialization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unsupported/Eigen/MatrixFunctions>

#include "spamsim/units.hpp"

namespace spamsim {

namespace {

enum Level { kS = 0, kT = 1, kVS = 2, kVT = 3, kK = 4 };

double fermi(double energy_cost, double beta) {
    const double x = beta * energy_cost;
    if (x > 0) {
        const double e = std::exp(-x);
        return e / (1.0 + e);
    }
    return 1.0 / (1.0 + std::exp(x));
}

Eigen::Matrix<double, kInitLevels, kInitLevels> to_eigen(const RateModel& m) {
    Eigen::Matrix<double, kInitLevels, kInitLevels> q;
    for (int i = 0; i < kInitLevels; ++i)
        for (int j = 0; j < kInitLevels; ++j) q(i, j) = m.Q[i][j];
    return q;
}

}  // namespace

std::string to_string(ChargeBoundary b) { return b == ChargeBoundary::b10_20 ? "1,0-2,0" : "2,0-3,0"; }

ChargeBoundary parse_boundary(const std::string& text) {
    if (text == "1,0-2,0" || text == "10-20") return ChargeBoundary::b10_20;
    if (text == "2,0-3,0" || text == "20-30") return ChargeBoundary::b20_30;
    throw std::invalid_argument("unknown charge boundary '" + text + "' (expected 1,0-2,0 or 2,0-3,0)");
}

std::vector<std::string> validate(const InitConfig& c, const std::string& prefix) {
    std::vector<std::string> out;
    if (!(c.gamma0_per_us > 0.0)) out.push_back(prefix + ".gamma0 must be > 0");
    if (!(c.barrier_factor >= 1.0)) out.push_back(prefix + ".barrier_factor must be >= 1");
    if (!(c.flush_ns >= 0.0)) out.push_back(prefix + ".flush must be >= 0");
    if (!(c.lever_ueV_per_mV > 0.0)) out.push_back(prefix + ".lever must be > 0");
    if (!(c.drift_tau_ns > 0.0)) out.push_back(prefix + ".drift_tau must be > 0");
    if (!std::isfinite(c.offset_mV)) out.push_back(prefix + ".offset must be finite");
    if (!std::isfinite(c.drift_amplitude_mV)) out.push_back(prefix + ".drift_amplitude must be finite");
    if (!(c.dephased_triplet_fraction >= 0.0 && c.dephased_triplet_fraction <= 1.0))
        out.push_back(prefix + ".dephased_triplet_fraction must lie in [0, 1]");
    return out;
}

EncodedState equilibrium_population(const DeviceParams& p) {
    const double beta = p.beta();
    const double w_o = 3.0 * std::exp(-beta * p.E_o_ueV);
    const double w_v = 4.0 * std::exp(-beta * p.E_v_ueV);
    const double z = 1.0 + w_o + w_v;
    EncodedState s;
    s.p1 = w_o / z;
    s.leak.valley = w_v / z;
    s.p0 = 1.0 - s.p1 - s.leak.valley;
    return s;
}

double gauge_excited_fraction(const DeviceParams& p) {
    const double e = std::exp(-p.beta() * p.E_v_gauge_ueV);
    return e / (1.0 + e);
}

double spin_tunnel_weight(int two_S_i, int two_S_j) {
    if (two_S_i < 0 || two_S_j < 0) throw std::invalid_argument("spin_tunnel_weight: spins must be >= 0");
    const double S = 0.5 * two_S_i;
    if (two_S_j == two_S_i + 1) return (S + 1.0) / (2.0 * S + 1.0);
    if (two_S_j == two_S_i - 1) return S / (2.0 * S + 1.0);
    return 0.0;
}

double intermediate_energy_ueV(const InitConfig& init, const DeviceParams& p, double offset_mV) {
    const double sign = init.boundary == ChargeBoundary::b20_30 ? -1.0 : 1.0;
    return 0.5 * p.delta_st_ueV() + sign * init.lever_ueV_per_mV * offset_mV;
}

RateModel rate_model(const InitConfig& init, const DeviceParams& p, double offset_mV) {
    RateModel m;
    const double ek = intermediate_energy_ueV(init, p, offset_mV);
    m.energy_ueV = {0.0, p.E_o_ueV, p.E_v_ueV, p.E_v_ueV, ek};
    m.degeneracy = {1.0, 3.0, 1.0, 3.0, 2.0};
    m.two_S = {0, 2, 0, 2, 1};
    m.frozen = !(ek > 0.0 && ek < p.delta_st_ueV());
    if (m.frozen) return m;

    const double gamma = init.gamma0_per_us * init.barrier_factor * 1e-3;
    const double beta = p.beta();
    for (int i = kS; i <= kVT; ++i) {
        // The spin weight applies in the direction that adds an electron; the reverse
        // weight follows from degeneracy so that the rates obey detailed balance.
        double w_out, w_in;
        if (init.boundary == ChargeBoundary::b20_30) {
            w_out = spin_tunnel_weight(m.two_S[i], 1);
            w_in = m.degeneracy[i] * w_out / m.degeneracy[kK];
        } else {
            w_in = spin_tunnel_weight(1, m.two_S[i]);
            w_out = m.degeneracy[kK] * w_in / m.degeneracy[i];
        }
        const double cost = ek - m.energy_ueV[i];
        const double r_out = gamma * w_out * fermi(cost, beta);
        const double r_in = gamma * w_in * fermi(-cost, beta);
        m.Q[kK][i] += r_out;
        m.Q[i][i] -= r_out;
        m.Q[i][kK] += r_in;
        m.Q[kK][kK] -= r_in;
    }
    return m;
}

double flush_time_constant_ns(const InitConfig& init, const DeviceParams& p) {
    const RateModel m = rate_model(init, p, init.offset_mV);
    if (m.frozen) return std::numeric_limits<double>::infinity();
    Eigen::EigenSolver<Eigen::Matrix<double, kInitLevels, kInitLevels>> es(to_eigen(m));
    std::vector<double> rates;
    for (int i = 0; i < kInitLevels; ++i) rates.push_back(-es.eigenvalues()[i].real());
    std::sort(rates.begin(), rates.end());
    return 1.0 / rates[1];
}

double settle_distortion(const InitConfig& init, double t_ns) {
    if (t_ns < 0.0) throw std::invalid_argument("settle_distortion: t must be >= 0");
    return init.offset_mV + init.drift_amplitude_mV * std::exp(-t_ns / init.drift_tau_ns);
}

FlushTrace flush_dynamics(const InitConfig& init, const DeviceParams& p, std::span<const double> t_ns,
                          const EncodedState& initial) {
    initial.check();
    FlushTrace trace;
    using Vec = Eigen::Matrix<double, kInitLevels, 1>;
    Vec pop;
    pop << initial.p0, initial.p1, 0.25 * initial.leak.valley, 0.75 * initial.leak.valley, 0.0;
    const double gauge = initial.leak.gauge;
    const double two_e = 1.0 - gauge;
    if (two_e > 0.0) pop /= two_e;

    const bool drifting = init.drift_amplitude_mV != 0.0;
    const double max_step = drifting ? std::min(init.drift_tau_ns / 100.0, 0.5) : 0.0;
    bool ever_active = false;
    double t_prev = 0.0;

    auto advance = [&](double t0, double t1) {
        const double span = t1 - t0;
        if (span <= 0.0) return;
        const int steps = drifting ? static_cast<int>(std::ceil(span / max_step)) : 1;
        const double h = span / steps;
        for (int k = 0; k < steps; ++k) {
            const double offset = drifting ? settle_distortion(init, t0 + (k + 0.5) * h) : init.offset_mV;
            const RateModel m = rate_model(init, p, offset);
            if (m.frozen) continue;
            ever_active = true;
            const Eigen::Matrix<double, kInitLevels, kInitLevels> q = to_eigen(m) * h;
            pop = q.exp() * pop;
            pop = pop.cwiseMax(0.0);
            pop /= pop.sum();
        }
    };

    for (double t : t_ns) {
        if (!(t >= t_prev)) throw std::invalid_argument("flush_dynamics: time grid must be nondecreasing and >= 0");
        advance(t_prev, t);
        t_prev = t;
        std::array<double, kInitLevels> raw{};
        for (int i = 0; i < kInitLevels; ++i) raw[i] = pop[i];
        const double sector = pop[kS] + pop[kT] + pop[kVS] + pop[kVT];
        EncodedState s;
        s.leak.gauge = gauge;
        s.p1 = two_e * pop[kT] / sector;
        s.leak.valley = two_e * (pop[kVS] + pop[kVT]) / sector;
        s.p0 = 1.0 - s.p1 - s.leak.total();
        trace.t_ns.push_back(t);
        trace.state.push_back(s);
        trace.levels.push_back(raw);
    }
    trace.frozen = !ever_active;
    if (trace.frozen && !drifting) {
        // Never in the window: nothing moved, report the input exactly.
        std::fill(trace.state.begin(), trace.state.end(), initial);
    }
    return trace;
}

std::vector<std::vector<double>> init_sweep_map(const InitConfig& init, const DeviceParams& p,
                                                std::span<const double> bias_mV,
                                                std::span<const double> duration_ns) {
    std::vector<double> durations(duration_ns.begin(), duration_ns.end());
    if (!std::is_sorted(durations.begin(), durations.end()))
        throw std::invalid_argument("init_sweep_map: duration grid must be nondecreasing");
    std::vector<std::vector<double>> out(durations.size(), std::vector<double>(bias_mV.size()));
    const EncodedState start = EncodedState::mixture(init.dephased_triplet_fraction);
    for (std::size_t j = 0; j < bias_mV.size(); ++j) {
        InitConfig local = init;
        const double d10 = std::abs(bias_mV[j] - init.boundary_10_20_mV);
        const double d30 = std::abs(bias_mV[j] - init.boundary_20_30_mV);
        if (d10 < d30) {
            local.boundary = ChargeBoundary::b10_20;
            local.offset_mV = bias_mV[j] - init.boundary_10_20_mV;
        } else {
            local.boundary = ChargeBoundary::b20_30;
            local.offset_mV = bias_mV[j] - init.boundary_20_30_mV;
        }
        const FlushTrace trace = flush_dynamics(local, p, durations, start);
        for (std::size_t i = 0; i < durations.size(); ++i) out[i][j] = trace.state[i].triplet_like();
    }
    return out;
}

}  // namespace spamsim

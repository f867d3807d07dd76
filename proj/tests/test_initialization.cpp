#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "spamsim/initialization.hpp"

using namespace spamsim;

namespace {

using Vec = Eigen::Matrix<double, kInitLevels, 1>;
using Mat = Eigen::Matrix<double, kInitLevels, kInitLevels>;

constexpr double kB = 86.173332621e-3;  // µeV/mK

Mat generator(const InitConfig& init, const DeviceParams& d, double offset) {
    const RateModel m = rate_model(init, d, offset);
    Mat q;
    for (int i = 0; i < kInitLevels; ++i)
        for (int j = 0; j < kInitLevels; ++j) q(i, j) = m.Q[i][j];
    return q;
}

// Classical RK4 on dp/dt = Q(t) p.
Vec rk4(const InitConfig& init, const DeviceParams& d, Vec p, double t_end, double h) {
    auto offset = [&](double t) {
        return init.offset_mV + init.drift_amplitude_mV * std::exp(-t / init.drift_tau_ns);
    };
    auto f = [&](double t, const Vec& x) -> Vec {
        const RateModel m = rate_model(init, d, offset(t));
        if (m.frozen) return Vec::Zero();
        return generator(init, d, offset(t)) * x;
    };
    const int n = static_cast<int>(std::ceil(t_end / h));
    const double dt = t_end / n;
    double t = 0.0;
    for (int k = 0; k < n; ++k) {
        const Vec k1 = f(t, p);
        const Vec k2 = f(t + dt / 2, p + dt / 2 * k1);
        const Vec k3 = f(t + dt / 2, p + dt / 2 * k2);
        const Vec k4 = f(t + dt, p + dt * k3);
        p += dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4);
        t += dt;
    }
    return p;
}

Vec start_levels(double triplet) {
    Vec p;
    p << 1.0 - triplet, triplet, 0.0, 0.0, 0.0;
    return p;
}

double triplet_like(const Vec& p) {
    const double sector = p[0] + p[1] + p[2] + p[3];
    return (p[1] + p[2] + p[3]) / sector;
}

}  // namespace

TEST_CASE("boundary names") {
    CHECK(parse_boundary("1,0-2,0") == ChargeBoundary::b10_20);
    CHECK(parse_boundary("20-30") == ChargeBoundary::b20_30);
    CHECK(parse_boundary(to_string(ChargeBoundary::b20_30)) == ChargeBoundary::b20_30);
    CHECK_THROWS_AS(parse_boundary("3,0-4,0"), std::invalid_argument);
}

TEST_CASE("validation") {
    InitConfig c;
    CHECK(validate(c).empty());
    c.gamma0_per_us = 0.0;
    c.dephased_triplet_fraction = 2.0;
    const auto v = validate(c, "init");
    REQUIRE(v.size() == 2);
    CHECK(v[0].find("init.gamma0") == 0);
    CHECK(v[1].find("init.dephased_triplet_fraction") == 0);
}

TEST_CASE("equilibrium populations") {
    DeviceParams d;
    const double kT = kB * d.T_e_mK;
    const double z = 1.0 + 3.0 * std::exp(-d.E_o_ueV / kT) + 4.0 * std::exp(-d.E_v_ueV / kT);
    const EncodedState s = equilibrium_population(d);
    CHECK(s.p0 == doctest::Approx(1.0 / z).epsilon(1e-12));
    CHECK(s.p1 == doctest::Approx(3.0 * std::exp(-d.E_o_ueV / kT) / z).epsilon(1e-9));
    CHECK(s.leak.valley == doctest::Approx(4.0 * std::exp(-d.E_v_ueV / kT) / z).epsilon(1e-9));
    CHECK(s.triplet_like() == doctest::Approx(6.554e-4).epsilon(1e-3));
    CHECK(gauge_excited_fraction(d) ==
          doctest::Approx(1.0 / (1.0 + std::exp(d.E_v_gauge_ueV / kT))).epsilon(1e-12));

    // Colder device, smaller error.
    DeviceParams cold = d;
    cold.T_e_mK = 100.0;
    CHECK(equilibrium_population(cold).triplet_like() < s.triplet_like());
}

TEST_CASE("spin tunneling weights") {
    CHECK(spin_tunnel_weight(0, 1) == doctest::Approx(1.0));
    CHECK(spin_tunnel_weight(1, 2) == doctest::Approx(0.75));
    CHECK(spin_tunnel_weight(1, 0) == doctest::Approx(0.25));
    CHECK(spin_tunnel_weight(2, 1) == doctest::Approx(1.0 / 3.0));
    CHECK(spin_tunnel_weight(2, 3) == doctest::Approx(2.0 / 3.0));
    CHECK(spin_tunnel_weight(0, 2) == 0.0);
    CHECK(spin_tunnel_weight(1, 1) == 0.0);
    // Adding and removing weights sum to one from any spin.
    for (int s = 1; s < 9; ++s) CHECK(spin_tunnel_weight(s, s + 1) + spin_tunnel_weight(s, s - 1) == doctest::Approx(1.0));
    CHECK_THROWS_AS(spin_tunnel_weight(-1, 0), std::invalid_argument);
}

TEST_CASE("rate model obeys detailed balance") {
    DeviceParams d;
    for (auto b : {ChargeBoundary::b10_20, ChargeBoundary::b20_30}) {
        InitConfig init;
        init.boundary = b;
        for (double off : {-0.5, 0.0, 0.3}) {
            const RateModel m = rate_model(init, d, off);
            REQUIRE_FALSE(m.frozen);
            const double beta = 1.0 / (kB * d.T_e_mK);
            std::array<double, kInitLevels> pi{};
            for (int i = 0; i < kInitLevels; ++i) pi[i] = m.degeneracy[i] * std::exp(-beta * m.energy_ueV[i]);
            for (int i = 0; i < kInitLevels; ++i) {
                double col = 0.0;
                for (int j = 0; j < kInitLevels; ++j) col += m.Q[j][i];
                CHECK(col == doctest::Approx(0.0).scale(1e-6));
                for (int j = 0; j < kInitLevels; ++j) {
                    if (i == j) continue;
                    CHECK(m.Q[j][i] >= 0.0);
                    CHECK(m.Q[j][i] * pi[i] == doctest::Approx(m.Q[i][j] * pi[j]).epsilon(1e-9).scale(1e-30));
                }
            }
        }
    }
}

TEST_CASE("intermediate level and freezing") {
    DeviceParams d;
    InitConfig init;
    CHECK(intermediate_energy_ueV(init, d, 0.0) == doctest::Approx(0.5 * d.delta_st_ueV()));
    CHECK(intermediate_energy_ueV(init, d, 0.1) == doctest::Approx(0.5 * d.delta_st_ueV() - 10.0));
    init.boundary = ChargeBoundary::b10_20;
    CHECK(intermediate_energy_ueV(init, d, 0.1) == doctest::Approx(0.5 * d.delta_st_ueV() + 10.0));
    CHECK(rate_model(init, d, 50.0).frozen);
    CHECK(std::isinf(flush_time_constant_ns(InitConfig{.offset_mV = 50.0}, d)));
}

TEST_CASE("flush matches RK4 without drift") {
    DeviceParams d;
    for (auto b : {ChargeBoundary::b10_20, ChargeBoundary::b20_30}) {
        InitConfig init;
        init.boundary = b;
        init.offset_mV = 0.2;
        const std::vector<double> t{10.0, 60.0, 200.0};
        const FlushTrace tr = flush_dynamics(init, d, t, EncodedState::mixture(0.5));
        CHECK_FALSE(tr.frozen);
        for (std::size_t i = 0; i < t.size(); ++i) {
            const Vec ref = rk4(init, d, start_levels(0.5), t[i], 0.02);
            for (int k = 0; k < kInitLevels; ++k) CHECK(tr.levels[i][k] == doctest::Approx(ref[k]).epsilon(1e-6).scale(1e-9));
            CHECK(tr.state[i].triplet_like() == doctest::Approx(triplet_like(ref)).epsilon(1e-6));
        }
    }
}

TEST_CASE("flush matches RK4 under drift") {
    DeviceParams d;
    InitConfig init;
    init.offset_mV = 0.6;
    init.drift_amplitude_mV = 0.5;
    const std::vector<double> t{20.0, 100.0, 400.0};
    const FlushTrace tr = flush_dynamics(init, d, t, EncodedState::mixture(0.5));
    for (std::size_t i = 0; i < t.size(); ++i) {
        const Vec ref = rk4(init, d, start_levels(0.5), t[i], 0.01);
        CHECK(tr.state[i].triplet_like() == doctest::Approx(triplet_like(ref)).epsilon(0.02).scale(1e-4));
    }
}

TEST_CASE("long flush reaches equilibrium") {
    DeviceParams d;
    InitConfig init;
    const std::vector<double> t{5000.0};
    const FlushTrace tr = flush_dynamics(init, d, t, EncodedState::triplet());
    const EncodedState eq = equilibrium_population(d);
    CHECK(tr.state[0].triplet_like() == doctest::Approx(eq.triplet_like()).epsilon(1e-3));
    CHECK(tr.state[0].p1 == doctest::Approx(eq.p1).epsilon(1e-3));
}

TEST_CASE("gauge leakage passes through") {
    DeviceParams d;
    EncodedState s = EncodedState::mixture(0.4);
    s.p0 -= 0.01;
    s.leak.gauge = 0.01;
    const std::vector<double> t{0.0, 3000.0};
    const FlushTrace tr = flush_dynamics(InitConfig{}, d, t, s);
    for (const auto& st : tr.state) {
        CHECK(st.leak.gauge == doctest::Approx(0.01));
        CHECK(st.p0 + st.p1 + st.p_leak() == doctest::Approx(1.0));
    }
    CHECK(tr.state[0].p1 == doctest::Approx(0.4));
}

TEST_CASE("frozen bias leaves the state alone") {
    DeviceParams d;
    InitConfig init;
    init.offset_mV = 10.0;
    const std::vector<double> t{0.0, 1000.0};
    const FlushTrace tr = flush_dynamics(init, d, t, EncodedState::mixture(0.3));
    CHECK(tr.frozen);
    CHECK(tr.state[1].p1 == 0.3);
    CHECK_THROWS_AS(flush_dynamics(init, d, std::vector<double>{5.0, 1.0}, EncodedState{}), std::invalid_argument);
}

TEST_CASE("drift near the window edge breaks monotonicity") {
    DeviceParams d;
    std::vector<double> t;
    for (int i = 0; i <= 400; ++i) t.push_back(2.0 * i);
    auto sign_changes = [&](const InitConfig& init) {
        const FlushTrace tr = flush_dynamics(init, d, t, EncodedState::mixture(0.5));
        int changes = 0;
        double prev = 0.0;
        for (std::size_t i = 1; i < tr.state.size(); ++i) {
            const double dy = tr.state[i].triplet_like() - tr.state[i - 1].triplet_like();
            if (std::abs(dy) < 1e-9) continue;
            if (prev * dy < 0.0) ++changes;
            prev = dy;
        }
        return changes;
    };
    InitConfig still;
    still.offset_mV = 0.6;
    CHECK(sign_changes(still) == 0);
    InitConfig centered;
    centered.drift_amplitude_mV = 0.5;
    CHECK(sign_changes(centered) == 0);
    InitConfig edge;
    edge.offset_mV = 0.6;
    edge.drift_amplitude_mV = 0.5;
    CHECK(sign_changes(edge) >= 1);
}

TEST_CASE("2,0-3,0 flushes faster than 1,0-2,0") {
    DeviceParams d;
    InitConfig a, b;
    a.boundary = ChargeBoundary::b20_30;
    b.boundary = ChargeBoundary::b10_20;
    const double ta = flush_time_constant_ns(a, d);
    const double tb = flush_time_constant_ns(b, d);
    CHECK(ta < tb);
    // Slowest mode against the eigenvalues of the oracle generator.
    Eigen::EigenSolver<Mat> es(generator(a, d, 0.0));
    std::vector<double> r;
    for (int i = 0; i < kInitLevels; ++i) r.push_back(-es.eigenvalues()[i].real());
    std::sort(r.begin(), r.end());
    CHECK(r[0] == doctest::Approx(0.0).scale(1e-6));
    CHECK(ta == doctest::Approx(1.0 / r[1]));
}

TEST_CASE("init sweep map") {
    DeviceParams d;
    InitConfig init;
    const std::vector<double> bias{-10.0, -2.0, 2.0, 10.0};
    const std::vector<double> dur{0.0, 3000.0};
    const auto map = init_sweep_map(init, d, bias, dur);
    REQUIRE(map.size() == 2);
    REQUIRE(map[0].size() == 4);
    for (double v : map[0]) CHECK(v == doctest::Approx(0.5));
    CHECK(map[1][0] == doctest::Approx(0.5));
    CHECK(map[1][3] == doctest::Approx(0.5));
    const double eq = equilibrium_population(d).triplet_like();
    CHECK(map[1][1] == doctest::Approx(eq).epsilon(1e-3));
    CHECK(map[1][2] == doctest::Approx(eq).epsilon(1e-3));
    CHECK_THROWS_AS(init_sweep_map(init, d, bias, std::vector<double>{5.0, 1.0}), std::invalid_argument);
}

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "spamsim/benchmarking.hpp"

using namespace spamsim;

namespace {

// Per-Clifford transfer matrix on (correct, wrong, leaked): leakage, then
// depolarization inside the qubit space.
Eigen::Matrix3d transfer(const ChannelModel& c) {
    Eigen::Matrix3d leak;
    leak << 1 - c.leak_in, 0, c.leak_out / 2,
            0, 1 - c.leak_in, c.leak_out / 2,
            c.leak_in, c.leak_in, 1 - c.leak_out;
    const double h = c.depolarizing / 2;
    Eigen::Matrix3d dep;
    dep << 1 - h, h, 0,
           h, 1 - h, 0,
           0, 0, 1;
    return dep * leak;
}

RbExpectation oracle(const ChannelModel& c, int n) {
    const double e = c.init_error + c.mapping_error - 2 * c.init_error * c.mapping_error;
    Eigen::Vector3d x((1 - c.init_leak) * (1 - e), (1 - c.init_leak) * e, c.init_leak);
    Eigen::Matrix3d m = Eigen::Matrix3d::Identity();
    for (int k = 0; k < n; ++k) m = transfer(c) * m;
    x = m * x;
    const double r = c.measure_error;
    const double lz = x[2] * (1 - c.leak_reads_triplet);
    double y0 = x[0] * (1 - r) + x[1] * r + lz;
    double y1 = x[1] * (1 - r) + x[0] * r + lz;
    if (n > 0) {
        y0 = (1 - c.gauge_excited) * y0 + c.gauge_excited / 2;
        y1 = (1 - c.gauge_excited) * y1 + c.gauge_excited / 2;
    }
    return {y0, y1};
}

ChannelModel random_channel(std::mt19937_64& g) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    ChannelModel c;
    c.depolarizing = 0.02 * u(g);
    c.leak_in = 0.01 * u(g);
    c.leak_out = 0.05 * u(g);
    c.init_error = 0.02 * u(g);
    c.measure_error = 0.02 * u(g);
    c.mapping_error = 0.01 * u(g);
    c.init_leak = 0.01 * u(g);
    c.gauge_excited = 0.01 * u(g);
    c.leak_reads_triplet = u(g);
    return c;
}

ChannelModel reference_channel() {
    ChannelModel c;
    c.leak_in = 3.3e-4;
    c.depolarizing = ChannelModel::depolarizing_for(3.4e-3, c.leak_in);
    c.init_error = 1e-3;
    c.mapping_error = 2e-4;
    c.measure_error = 1.3e-3;
    return c;
}

std::vector<int> lengths() {
    std::vector<int> n;
    for (int k = 1; k <= 512; k *= 2) n.push_back(k);
    return n;
}

RbCurves exact_curves(const ChannelModel& c, double sd) {
    RbCurves cv;
    for (int n : lengths()) {
        const auto e = blind_rb_expectation(c, n);
        cv.lengths.push_back(n);
        cv.y0.push_back(e.y0);
        cv.y1.push_back(e.y1);
        cv.y0_err.push_back(sd);
        cv.y1_err.push_back(sd);
    }
    return cv;
}

}  // namespace

TEST_CASE("channel validation") {
    CHECK(validate(ChannelModel{}).empty());
    ChannelModel c;
    c.leak_in = 0.7;
    c.leak_out = 0.7;
    c.measure_error = -0.1;
    const auto v = validate(c);
    REQUIRE(v.size() == 2);
    CHECK(v[0] == "channel.measure_error must lie in [0, 1]");
    CHECK(v[1].find("channel.leak_in + leak_out") == 0);
}

TEST_CASE("expectation matches matrix-power oracle") {
    std::mt19937_64 g(42);
    for (int trial = 0; trial < 50; ++trial) {
        const ChannelModel c = random_channel(g);
        for (int n : {0, 1, 2, 7, 64, 333}) {
            const auto a = blind_rb_expectation(c, n);
            const auto b = oracle(c, n);
            CHECK(a.y0 == doctest::Approx(b.y0).epsilon(1e-12));
            CHECK(a.y1 == doctest::Approx(b.y1).epsilon(1e-12));
        }
    }
    CHECK_THROWS_AS(blind_rb_expectation(ChannelModel{}, -1), std::invalid_argument);
}

TEST_CASE("closed form parameters reproduce the decay") {
    std::mt19937_64 g(7);
    for (int trial = 0; trial < 50; ++trial) {
        const ChannelModel c = random_channel(g);
        const RbParams t = channel_truth(c);
        for (int n : {1, 3, 50, 400}) {
            const auto b = oracle(c, n);
            const double dp = std::pow(1 - t.p, n), dq = std::pow(1 - t.q, n);
            CHECK(t.A + t.B * dp + t.C * dq == doctest::Approx(b.y0).epsilon(1e-10));
            CHECK(t.A - t.B * dp + t.C * dq == doctest::Approx(b.y1).epsilon(1e-10));
        }
    }
}

TEST_CASE("population invariants") {
    std::mt19937_64 g(9);
    for (int trial = 0; trial < 100; ++trial) {
        const ChannelModel c = random_channel(g);
        Populations x = initial_populations(c);
        for (int n = 0; n < 50; ++n) {
            x = apply_clifford(c, x);
            CHECK(x[0] + x[1] + x[2] == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(x[0] >= x[1]);
            CHECK(x[2] >= 0.0);
        }
    }
}

TEST_CASE("depolarizing strength for a target decay") {
    const double d = ChannelModel::depolarizing_for(3.4e-3, 3.3e-4);
    CHECK(d == doctest::Approx(3.0710e-3).epsilon(1e-4));
    ChannelModel c;
    c.depolarizing = d;
    c.leak_in = 3.3e-4;
    CHECK(channel_truth(c).p == doctest::Approx(3.4e-3).epsilon(1e-12));
}

TEST_CASE("untilted leakage gives no C term") {
    ChannelModel c = reference_channel();
    c.leak_out = 0.01;
    c.leak_reads_triplet = 0.5;
    CHECK(channel_truth(c).C == 0.0);
    c.leak_reads_triplet = 1.0;
    CHECK(channel_truth(c).C > 0.0);
}

TEST_CASE("leakage alone leaves B and F_BC unchanged") {
    ChannelModel c;
    c.leak_in = 0.003;
    c.leak_out = 0.01;
    const RbParams t = channel_truth(c);
    CHECK(t.B == doctest::Approx(0.5));
    CHECK(t.p == doctest::Approx(0.003));
    CHECK(t.q == doctest::Approx(0.013));
    const RbFit f = fit_brb(exact_curves(c, 1e-4));
    CHECK(f.f_bc_infidelity() == doctest::Approx(0.0).scale(1e-7));
    CHECK(f.params.q == doctest::Approx(0.013).epsilon(1e-6));
}

TEST_CASE("noiseless curves fit exactly") {
    std::mt19937_64 g(11);
    for (int trial = 0; trial < 20; ++trial) {
        ChannelModel c = random_channel(g);
        c.depolarizing += 2e-3;
        c.leak_in += 1e-3;
        const RbParams t = channel_truth(c);
        const RbFit f = fit_brb(exact_curves(c, 1e-4));
        CHECK(f.chi2 < 1e-8);
        CHECK(f.params.B == doctest::Approx(t.B).epsilon(1e-6));
        CHECK(f.params.p == doctest::Approx(t.p).epsilon(1e-5));
        CHECK(f_bc(f) == doctest::Approx(0.5 - t.B).epsilon(1e-4));
        CHECK(f.dof == 2 * 10 - 5);
    }
}

TEST_CASE("decay-free data pin p at a bound") {
    ChannelModel c;
    c.init_error = 1e-3;
    c.measure_error = 1e-3;
    const RbFit f = fit_brb(exact_curves(c, 1e-4));
    CHECK(f.params.B == doctest::Approx(channel_truth(c).B).epsilon(1e-6));
    bool warned = false;
    for (const auto& w : f.warnings) warned |= w == "p at bound";
    CHECK(warned);
}

TEST_CASE("gauge scramble lowers B") {
    ChannelModel c = reference_channel();
    const double b0 = channel_truth(c).B;
    c.gauge_excited = 2e-3;
    CHECK(channel_truth(c).B == doctest::Approx(b0 * (1 - 2e-3)));
}

TEST_CASE("simulated blind RB recovers the channel") {
    const ChannelModel c = reference_channel();
    const auto n = lengths();
    const RbCurves cv = run_blind_rb(c, n, 100, 100, 3);
    const RbCurves again = run_blind_rb(c, n, 100, 100, 3);
    CHECK(cv.y0 == again.y0);
    const RbFit f = fit_brb(cv);
    const RbParams t = channel_truth(c);
    CHECK(std::abs(f.params.B - t.B) < 4 * f.errors.B);
    CHECK(std::abs(f.params.p - t.p) < 4 * f.errors.p);
    CHECK(f.per_clifford_error() == doctest::Approx(f.params.p / 2));
    CHECK(f.chi2 / f.dof < 4.0);

    CHECK_THROWS_AS(run_blind_rb(c, std::vector<int>{1, 2}, 10, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(run_blind_rb(c, std::vector<int>{0, 1, 2}, 10, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(fit_brb(RbCurves{}), std::invalid_argument);
}

TEST_CASE("assignment fidelity") {
    ChannelModel c = reference_channel();
    c.init_leak = 0.01;
    const auto x = initial_populations(c);
    const double m = c.measure_error;
    const double wrong = x[0] * m + x[1] * (1 - m);
    const std::size_t shots = 1000000;
    const double tol = 5 * std::sqrt(0.02 / shots);
    // Leaked runs read triplet: an error for |0>, correct for |1>.
    CHECK(assignment_fidelity(c, shots, 1) == doctest::Approx(1 - wrong - 0.5 * x[2]).epsilon(tol));
    c.leak_reads_as_prepared = true;
    CHECK(assignment_fidelity(c, shots, 1) == doctest::Approx(1 - wrong).epsilon(tol));
    CHECK_THROWS_AS(assignment_fidelity(c, 0, 1), std::invalid_argument);
}

TEST_CASE("exchange contrast") {
    std::vector<double> theta;
    for (int i = 0; i < 400; ++i) theta.push_back(4 * M_PI * i / 399.0);
    const ExchangeResult ideal = exchange_contrast(0.0, theta, 1000000, 2);
    CHECK(ideal.contrast == doctest::Approx(kIdealExchangeContrast).epsilon(1e-3));
    const ExchangeResult r = exchange_contrast(2.8e-3, theta, 1000000, 2);
    CHECK(std::abs(r.implied_infidelity - 2.8e-3) < 4 * 0.5 * r.contrast_err);
    CHECK(r.implied_infidelity == doctest::Approx(0.5 * (kIdealExchangeContrast - r.contrast)));
    const ExchangeResult half = exchange_contrast(0.0, theta, 1000000, 2, 0.75);
    CHECK(half.contrast == doctest::Approx(0.375).epsilon(3e-3));
    CHECK_THROWS_AS(exchange_contrast(0.0, std::vector<double>{0, 1, 2}, 10, 1), std::invalid_argument);
    CHECK_THROWS_AS(exchange_contrast(0.5, theta, 10, 1), std::invalid_argument);
}

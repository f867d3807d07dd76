#include "spamsim/benchmarking.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "spamsim/lsq.hpp"
#include "spamsim/random.hpp"

namespace spamsim {

namespace {

bool is_probability(double v) { return v >= 0.0 && v <= 1.0; }

double draw_fraction(RandomStream& rng, std::size_t shots, double p) {
    std::binomial_distribution<std::size_t> draw(shots, std::clamp(p, 0.0, 1.0));
    return static_cast<double>(draw(rng)) / static_cast<double>(shots);
}

double binomial_se(double y, std::size_t n) {
    const double nn = static_cast<double>(n);
    const double floor = 0.5 / nn;
    const double p = std::clamp(y, floor, 1.0 - floor);
    return std::sqrt(p * (1.0 - p) / nn);
}

}  // namespace

double ChannelModel::depolarizing_for(double p, double leak_in) { return 1.0 - (1.0 - p) / (1.0 - leak_in); }

std::vector<std::string> validate(const ChannelModel& c, const std::string& prefix) {
    std::vector<std::string> out;
    const std::pair<const char*, double> fields[] = {
        {"depolarizing", c.depolarizing}, {"leak_in", c.leak_in},
        {"leak_out", c.leak_out},         {"init_error", c.init_error},
        {"measure_error", c.measure_error}, {"mapping_error", c.mapping_error},
        {"init_leak", c.init_leak},       {"gauge_excited", c.gauge_excited},
        {"leak_reads_triplet", c.leak_reads_triplet}};
    for (const auto& [name, v] : fields)
        if (!is_probability(v)) out.push_back(prefix + "." + name + " must lie in [0, 1]");
    if (!(c.leak_in + c.leak_out <= 1.0)) out.push_back(prefix + ".leak_in + leak_out must be <= 1");
    return out;
}

Populations initial_populations(const ChannelModel& c) {
    const double wrong = c.init_error * (1.0 - c.mapping_error) + (1.0 - c.init_error) * c.mapping_error;
    const double qubit = 1.0 - c.init_leak;
    return {qubit * (1.0 - wrong), qubit * wrong, c.init_leak};
}

Populations apply_clifford(const ChannelModel& c, const Populations& x) {
    const double back = 0.5 * c.leak_out * x[2];
    double correct = x[0] * (1.0 - c.leak_in) + back;
    double wrong = x[1] * (1.0 - c.leak_in) + back;
    const double leaked = x[2] * (1.0 - c.leak_out) + (x[0] + x[1]) * c.leak_in;
    const double shift = 0.5 * c.depolarizing * (correct - wrong);
    correct -= shift;
    wrong += shift;
    return {correct, wrong, leaked};
}

RbExpectation blind_rb_expectation(const ChannelModel& c, int length) {
    if (length < 0) throw std::invalid_argument("blind_rb_expectation: length must be >= 0");
    Populations x = initial_populations(c);
    for (int n = 0; n < length; ++n) x = apply_clifford(c, x);
    const double m = c.measure_error;
    const double leak_zero = x[2] * (1.0 - c.leak_reads_triplet);
    RbExpectation e{x[0] * (1.0 - m) + x[1] * m + leak_zero, x[0] * m + x[1] * (1.0 - m) + leak_zero};
    if (length >= 1) {
        // The scrambled gauge randomizes every outcome after the first gate.
        e.y0 = (1.0 - c.gauge_excited) * e.y0 + 0.5 * c.gauge_excited;
        e.y1 = (1.0 - c.gauge_excited) * e.y1 + 0.5 * c.gauge_excited;
    }
    return e;
}

RbCurves run_blind_rb(const ChannelModel& c, std::span<const int> lengths, std::size_t sequences,
                      std::size_t shots, std::uint64_t seed) {
    std::set<int> distinct(lengths.begin(), lengths.end());
    if (distinct.size() < 3) throw std::invalid_argument("run_blind_rb: need at least 3 distinct lengths");
    if (*distinct.begin() < 1) throw std::invalid_argument("run_blind_rb: lengths must be >= 1");
    if (sequences < 1 || shots < 1) throw std::invalid_argument("run_blind_rb: need sequences and shots >= 1");

    RbCurves out;
    const std::size_t total = sequences * shots;
    for (std::size_t i = 0; i < lengths.size(); ++i) {
        const RbExpectation e = blind_rb_expectation(c, lengths[i]);
        double sum0 = 0.0, sum1 = 0.0;
        for (std::size_t k = 0; k < sequences; ++k) {
            const std::uint64_t counter = (i * sequences + k) * 2;
            RandomStream r0(seed, stream_tag("blind_rb"), counter);
            RandomStream r1(seed, stream_tag("blind_rb"), counter + 1);
            sum0 += draw_fraction(r0, shots, e.y0);
            sum1 += draw_fraction(r1, shots, e.y1);
        }
        const double y0 = sum0 / static_cast<double>(sequences);
        const double y1 = sum1 / static_cast<double>(sequences);
        out.lengths.push_back(lengths[i]);
        out.y0.push_back(y0);
        out.y1.push_back(y1);
        out.y0_err.push_back(binomial_se(y0, total));
        out.y1_err.push_back(binomial_se(y1, total));
    }
    return out;
}

RbParams channel_truth(const ChannelModel& c) {
    const Populations x0 = initial_populations(c);
    const double g = c.gauge_excited;
    const double u0 = x0[0] - x0[1];
    const double tilt = 0.5 - c.leak_reads_triplet;
    RbParams t;
    t.p = 1.0 - (1.0 - c.depolarizing) * (1.0 - c.leak_in);
    t.q = c.leak_in + c.leak_out;
    t.B = (1.0 - g) * 0.5 * u0 * (1.0 - 2.0 * c.measure_error);
    const double L_inf = t.q > 0.0 ? c.leak_in / t.q : x0[2];
    t.A = (1.0 - g) * (0.5 + L_inf * tilt) + 0.5 * g;
    t.C = (1.0 - g) * (x0[2] - L_inf) * tilt;
    return t;
}

RbFit fit_brb(const RbCurves& cv) {
    const std::size_t n = cv.lengths.size();
    if (n < 3 || cv.y0.size() != n || cv.y1.size() != n || cv.y0_err.size() != n || cv.y1_err.size() != n)
        throw std::invalid_argument("fit_brb: curves must share at least 3 lengths");

    // Log-linear regression of the difference curve for B and p.
    double sw = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = 0.5 * (cv.y0[i] - cv.y1[i]);
        if (d <= 0.0) continue;
        const double sd = 0.5 * std::hypot(cv.y0_err[i], cv.y1_err[i]);
        const double w = (d / sd) * (d / sd);
        const double x = cv.lengths[i];
        const double y = std::log(d);
        sw += w; sx += w * x; sy += w * y; sxx += w * x * x; sxy += w * x * y;
    }
    double B0 = 0.25, p0 = 0.01;
    const double det = sw * sxx - sx * sx;
    if (sw > 0.0 && det > 0.0) {
        const double slope = (sw * sxy - sx * sy) / det;
        const double icpt = (sy - slope * sx) / sw;
        p0 = std::clamp(-std::expm1(slope), 1e-9, 0.99);
        B0 = std::clamp(std::exp(icpt), 0.0, 0.5);
    }

    // Grid search on q for the sum curve, with A and C solved linearly.
    double A0 = 0.5, C0 = 0.0, q0 = 1e-3, best = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 240; ++k) {
        const double q = std::pow(10.0, -7.0 + 7.0 * k / 240.0) * 0.5;
        Eigen::Matrix2d M = Eigen::Matrix2d::Zero();
        Eigen::Vector2d b = Eigen::Vector2d::Zero();
        for (std::size_t i = 0; i < n; ++i) {
            const double s = 0.5 * (cv.y0[i] + cv.y1[i]);
            const double sd = 0.5 * std::hypot(cv.y0_err[i], cv.y1_err[i]);
            const Eigen::Vector2d row(1.0, std::pow(1.0 - q, cv.lengths[i]));
            M += row * row.transpose() / (sd * sd);
            b += row * s / (sd * sd);
        }
        if (std::abs(M.determinant()) < 1e-12 * M.norm() * M.norm()) continue;
        const Eigen::Vector2d ac = M.ldlt().solve(b);
        double chi2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double s = 0.5 * (cv.y0[i] + cv.y1[i]);
            const double sd = 0.5 * std::hypot(cv.y0_err[i], cv.y1_err[i]);
            const double r = (ac[0] + ac[1] * std::pow(1.0 - q, cv.lengths[i]) - s) / sd;
            chi2 += r * r;
        }
        if (chi2 < best) {
            best = chi2;
            A0 = ac[0];
            C0 = ac[1];
            q0 = q;
        }
    }

    ResidualFn fn = [&](const Eigen::VectorXd& th, Eigen::VectorXd& r, Eigen::MatrixXd& J) {
        const auto m = static_cast<Eigen::Index>(n);
        r.resize(2 * m);
        J.resize(2 * m, 5);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double N = cv.lengths[static_cast<std::size_t>(i)];
            const double dp = std::pow(1.0 - th[3], N);
            const double dq = std::pow(1.0 - th[4], N);
            const double dp_d = N > 0 ? -N * std::pow(1.0 - th[3], N - 1) : 0.0;
            const double dq_d = N > 0 ? -N * std::pow(1.0 - th[4], N - 1) : 0.0;
            for (int curve = 0; curve < 2; ++curve) {
                const double sign = curve == 0 ? 1.0 : -1.0;
                const auto idx = static_cast<std::size_t>(i);
                const double y = curve == 0 ? cv.y0[idx] : cv.y1[idx];
                const double sd = curve == 0 ? cv.y0_err[idx] : cv.y1_err[idx];
                const Eigen::Index row = 2 * i + curve;
                r[row] = (th[0] + sign * th[1] * dp + th[2] * dq - y) / sd;
                J(row, 0) = 1.0 / sd;
                J(row, 1) = sign * dp / sd;
                J(row, 2) = dq / sd;
                J(row, 3) = sign * th[1] * dp_d / sd;
                J(row, 4) = th[2] * dq_d / sd;
            }
        }
    };

    LsqOptions opt;
    opt.lower = (Eigen::VectorXd(5) << -0.5, 0.0, -1.0, 0.0, 0.0).finished();
    opt.upper = (Eigen::VectorXd(5) << 1.5, 0.5, 1.0, 1.0, 1.0).finished();
    Eigen::VectorXd start(5);
    start << A0, B0, C0, p0, q0;

    LsqResult res = levenberg_marquardt(fn, start, opt);
    std::vector<double> tried{res.chi2};
    for (int attempt = 0; !res.converged && attempt < 5; ++attempt) {
        RandomStream rng(0, stream_tag("brb_restart"), static_cast<std::uint64_t>(attempt));
        Eigen::VectorXd s = start;
        s[3] *= std::exp(0.5 * rng.normal());
        s[4] *= std::exp(0.5 * rng.normal());
        res = levenberg_marquardt(fn, s, opt);
        tried.push_back(res.chi2);
    }
    if (!res.converged) {
        std::string msg = "fit_brb: no convergence after restarts; chi2 per attempt:";
        for (double c : tried) msg += " " + std::to_string(c);
        throw RbFitError(msg);
    }

    RbFit fit;
    fit.params = {res.params[0], res.params[1], res.params[2], res.params[3], res.params[4]};
    fit.covariance = res.covariance;
    auto se = [&](int i) { return std::sqrt(std::max(res.covariance(i, i), 0.0)); };
    fit.errors = {se(0), se(1), se(2), se(3), se(4)};
    fit.chi2 = res.chi2;
    fit.dof = static_cast<int>(2 * n) - 5;
    fit.iterations = res.iterations;
    if (res.at_bound[3]) fit.warnings.push_back("p at bound");
    if (res.at_bound[4]) fit.warnings.push_back("q at bound");
    return fit;
}

double f_bc(const RbFit& fit) { return fit.f_bc_infidelity(); }

double assignment_fidelity(const ChannelModel& c, std::size_t shots, std::uint64_t seed) {
    if (shots < 1) throw std::invalid_argument("assignment_fidelity: shots must be >= 1");
    const Populations x = initial_populations(c);
    const double m = c.measure_error;
    const double leak_1_given_0 = c.leak_reads_as_prepared ? 0.0 : c.leak_reads_triplet;
    const double leak_0_given_1 = c.leak_reads_as_prepared ? 0.0 : 1.0 - c.leak_reads_triplet;
    const double p01 = x[0] * m + x[1] * (1.0 - m) + x[2] * leak_1_given_0;
    const double p10 = x[0] * m + x[1] * (1.0 - m) + x[2] * leak_0_given_1;
    RandomStream r0(seed, stream_tag("assignment"), 0);
    RandomStream r1(seed, stream_tag("assignment"), 1);
    return 1.0 - 0.5 * (draw_fraction(r0, shots, p01) + draw_fraction(r1, shots, p10));
}

ExchangeResult exchange_contrast(double spam, std::span<const double> theta, std::size_t shots,
                                 std::uint64_t seed, double input_singlet) {
    if (!(spam >= 0.0 && spam <= 0.375)) throw std::invalid_argument("exchange_contrast: infidelity must lie in [0, 0.375]");
    if (theta.size() < 3 || shots < 1) throw std::invalid_argument("exchange_contrast: need >= 3 sweep points and shots >= 1");
    const auto [lo, hi] = std::minmax_element(theta.begin(), theta.end());
    if (*hi - *lo < 2.0 * 3.14159265358979323846)
        throw std::invalid_argument("exchange_contrast: sweep must cover a full oscillation");

    const double flip = 4.0 * spam / 3.0;
    const double depth = kIdealExchangeContrast * (2.0 * input_singlet - 1.0);
    ExchangeResult out;
    const auto n = static_cast<Eigen::Index>(theta.size());
    Eigen::MatrixXd X(n, 2);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double th = theta[static_cast<std::size_t>(i)];
        const double s2 = std::pow(std::sin(0.5 * th), 2);
        const double ideal = 1.0 - depth * s2;
        const double p = flip + (1.0 - 2.0 * flip) * ideal;
        RandomStream rng(seed, stream_tag("exchange"), static_cast<std::uint64_t>(i));
        const double obs = draw_fraction(rng, shots, p);
        out.theta_rad.push_back(th);
        out.p_singlet.push_back(obs);
        X(i, 0) = 1.0;
        X(i, 1) = s2;
        y[i] = obs;
    }
    const Eigen::Vector2d beta = X.colPivHouseholderQr().solve(y);
    const double dof = static_cast<double>(n - 2);
    const double s2_res = dof > 0 ? (X * beta - y).squaredNorm() / dof : 0.0;
    const Eigen::Matrix2d cov = s2_res * (X.transpose() * X).inverse();
    out.contrast = -beta[1];
    out.contrast_err = std::sqrt(cov(1, 1));
    out.implied_infidelity = 0.5 * (kIdealExchangeContrast - out.contrast);
    return out;
}

}  // namespace spamsim

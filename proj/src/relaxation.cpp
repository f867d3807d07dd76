#include "spamsim/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "spamsim/lsq.hpp"
#include "spamsim/random.hpp"
#include "spamsim/readout.hpp"

namespace spamsim {

T1Landscape T1Landscape::resolved(const DeviceParams& device) const {
    T1Landscape out = *this;
    for (auto& h : out.hot_spots) {
        if (h.center_ueV) continue;
        const auto crossing = singlet_tminus_crossing(device);
        if (!crossing)
            throw std::invalid_argument("hot spot placement: no singlet/T- crossing at zero field");
        h.center_ueV = *crossing;
    }
    return out;
}

std::vector<std::string> validate(const T1Landscape& l, const std::string& prefix) {
    std::vector<std::string> out;
    if (!(l.baseline_ms > 0.0)) out.push_back(prefix + ".baseline must be > 0");
    if (!(l.cubic_per_ms_uV3 >= 0.0)) out.push_back(prefix + ".cubic must be >= 0");
    if (!(l.V_onset_uV >= 0.0)) out.push_back(prefix + ".V_onset must be >= 0");
    for (std::size_t i = 0; i < l.hot_spots.size(); ++i) {
        const auto& h = l.hot_spots[i];
        const std::string p = prefix + ".hot_spots[" + std::to_string(i) + "]";
        if (!(h.width_ueV > 0.0)) out.push_back(p + ".width must be > 0");
        if (!(h.depth_ms > 0.0)) out.push_back(p + ".depth must be > 0");
        if (!(h.depth_ms < l.baseline_ms)) out.push_back(p + ".depth must be < baseline");
    }
    return out;
}

double t1_at(const T1Landscape& l, double detuning, double V) {
    double rate = 1.0 / l.baseline_ms;
    for (const auto& h : l.hot_spots) {
        if (!h.center_ueV) throw std::invalid_argument("t1_at: hot-spot center not resolved");
        const double u = (detuning - *h.center_ueV) / h.width_ueV;
        rate += (1.0 / h.depth_ms - 1.0 / l.baseline_ms) / (1.0 + u * u);
    }
    const double excess = std::max(0.0, V - l.V_onset_uV);
    rate += l.cubic_per_ms_uV3 * excess * excess * excess;
    return 1.0 / rate;
}

double t1_fidelity_bound(double t_meas, double t1) {
    if (!(t_meas >= 0.0) || !(t1 > 0.0))
        throw std::invalid_argument("t1_fidelity_bound: need t_meas >= 0 and T1 > 0");
    return -0.5 * std::expm1(-t_meas / t1);
}

std::vector<double> composite_fidelity_limit(std::span<const double> snr, std::span<const double> t1_ms,
                                             double t_meas_ms) {
    if (snr.size() != t1_ms.size())
        throw std::invalid_argument("composite_fidelity_limit: grids are not aligned");
    std::vector<double> out(snr.size());
    for (std::size_t i = 0; i < snr.size(); ++i)
        out[i] = snr_fidelity_bound(snr[i]) + t1_fidelity_bound(t_meas_ms, t1_ms[i]);
    return out;
}

T1Fit fit_exponential_decay(std::span<const double> t, std::span<const double> y, std::size_t shots) {
    if (t.size() != y.size() || t.size() < 3)
        throw std::invalid_argument("fit_exponential_decay: need at least 3 aligned points");
    const double n = static_cast<double>(std::max<std::size_t>(shots, 1));
    const double t_max = *std::max_element(t.begin(), t.end());
    Eigen::VectorXd sd(static_cast<Eigen::Index>(t.size()));
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double p = std::clamp(y[i], 0.5 / n, 1.0 - 0.5 / n);
        sd[static_cast<Eigen::Index>(i)] = std::sqrt(p * (1.0 - p) / n);
    }
    // Parametrized by the rate so a flat trace sits at the k = 0 boundary.
    ResidualFn fn = [&](const Eigen::VectorXd& q, Eigen::VectorXd& r, Eigen::MatrixXd& J) {
        const auto m = static_cast<Eigen::Index>(t.size());
        r.resize(m);
        J.resize(m, 2);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double e = std::exp(-q[1] * t[i]);
            r[i] = (q[0] * e - y[i]) / sd[i];
            J(i, 0) = e / sd[i];
            J(i, 1) = -q[0] * t[i] * e / sd[i];
        }
    };
    // Start from a log-linear slope between first and last points.
    const double y0 = std::max(y.front(), 1e-6);
    const double y1 = std::max(y.back(), 1e-6);
    const double span = std::max(t.back() - t.front(), 1e-12);
    const double k0 = std::max(std::log(y0 / y1) / span, 1e-3 / std::max(t_max, 1e-12));
    LsqOptions opt;
    opt.lower = Eigen::Vector2d(0.0, 0.0);
    opt.upper = Eigen::Vector2d(1.0, 1e6 / std::max(t_max, 1e-12));
    const auto res = levenberg_marquardt(fn, Eigen::Vector2d(y0 * std::exp(k0 * t.front()), k0), opt);
    T1Fit fit;
    fit.amplitude = res.params[0];
    const double k = res.params[1];
    const double k_err = std::sqrt(std::max(res.covariance(1, 1), 0.0));
    fit.censored = !(k > 3.0 * k_err) || !res.converged;
    fit.t1_ns = k > 0.0 ? 1.0 / k : std::numeric_limits<double>::infinity();
    fit.t1_err_ns = k > 0.0 ? k_err / (k * k) : std::numeric_limits<double>::infinity();
    return fit;
}

TrialMeasurementResult trial_measurement_experiment(const T1Landscape& l, double V,
                                                    std::span<const double> detuning,
                                                    std::span<const double> duration,
                                                    std::size_t shots, std::uint64_t seed,
                                                    double triplet_fraction) {
    if (duration.size() < 3)
        throw std::invalid_argument("trial_measurement_experiment: need at least 3 durations");
    TrialMeasurementResult res;
    res.detuning_ueV.assign(detuning.begin(), detuning.end());
    res.duration_ns.assign(duration.begin(), duration.end());
    for (std::size_t i = 0; i < detuning.size(); ++i) {
        const double t1_ns = t1_at(l, detuning[i], V) * 1e6;
        std::vector<double> p_s(duration.size());
        std::vector<double> p_t(duration.size());
        for (std::size_t j = 0; j < duration.size(); ++j) {
            const double expected_t = triplet_fraction * std::exp(-duration[j] / t1_ns);
            RandomStream rng(seed, stream_tag("trial_measurement"), i * duration.size() + j);
            std::binomial_distribution<std::size_t> draw(shots, expected_t);
            const double frac_t = shots ? static_cast<double>(draw(rng)) / shots : expected_t;
            p_t[j] = frac_t;
            p_s[j] = 1.0 - frac_t;
        }
        res.p_singlet.push_back(std::move(p_s));
        res.fits.push_back(fit_exponential_decay(duration, p_t, shots));
    }
    return res;
}

}  // namespace spamsim

#include "spamsim/readout.hpp"

#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <complex>
#include <numeric>
#include <unsupported/Eigen/FFT>

#include "spamsim/units.hpp"

namespace spamsim {

namespace {

constexpr double kLn2 = 0.69314718055994530942;

using boost::math::quadrature::gauss_kronrod;

// ∫_a^b f over consecutive half-period segments, then an analytic tail.
template <class F>
double integrate_oscillatory(F f, double a, double b) {
    double sum = 0.0;
    double lo = a;
    while (lo < b) {
        const double hi = std::min(b, lo + units::kPi / 2.0);
        sum += gauss_kronrod<double, 31>::integrate(f, lo, hi, 0, 0.0);
        lo = hi;
    }
    return sum;
}

double sech2(double x) {
    const double c = std::cosh(x);
    return 1.0 / (c * c);
}

}  // namespace

std::vector<std::string> validate(const ChainParams& c, const std::string& prefix) {
    std::vector<std::string> out;
    auto positive = [&](double v, const char* name) {
        if (!(v > 0.0)) out.push_back(prefix + "." + name + " must be > 0");
    };
    positive(c.R_s_kOhm, "R_s");
    positive(c.C_p_pF, "C_p");
    positive(c.f_mod_MHz, "f_mod");
    positive(c.V_sd_uV, "V_sd");
    positive(c.G_m_pA_per_uV, "G_m");
    if (!(c.A_uV_rtHz >= 0.0)) out.push_back(prefix + ".A must be >= 0");
    positive(c.delta_mu_uV, "delta_mu");
    positive(c.t_int_ns, "t_int");
    positive(c.T_experiment_s, "T_experiment");
    positive(c.divider, "divider");
    positive(c.s2c_steepness, "s2c_steepness");
    if (!(c.t_settle_us >= 0.0)) out.push_back(prefix + ".t_settle must be >= 0");
    if (c.white_sources.empty()) out.push_back(prefix + ".white_sources must be nonempty");
    for (const auto& s : c.white_sources) {
        if (!(s.density_pV_rtHz > 0.0))
            out.push_back(prefix + ".white_sources." + s.name + " must be > 0");
    }
    return out;
}

double total_white_density_pV(const ChainParams& chain) {
    double sum = 0.0;
    for (const auto& s : chain.white_sources) sum += s.density_pV_rtHz * s.density_pV_rtHz;
    return std::sqrt(sum);
}

double demodulation_enbw_factor() {
    // T·∫ sinc²(π f T) df = (1/π) ∫ sin²x/x² dx.
    static const double factor = [] {
        auto f = [](double x) {
            if (x < 1e-8) return 1.0;
            const double s = std::sin(x) / x;
            return s * s;
        };
        const double x_max = 2000.0 * units::kPi;
        const double body = integrate_oscillatory(f, 0.0, x_max);
        return (body + 1.0 / (2.0 * x_max)) / units::kPi;
    }();
    return factor;
}

double white_noise_sigma_pA(const ChainParams& chain, double t_int_ns) {
    const double current_density = total_white_density_pV(chain) / chain.R_s_kOhm * 1e-3;  // pA/√Hz
    const double bandwidth_Hz = demodulation_enbw_factor() / (t_int_ns * 1e-9);
    return current_density * std::sqrt(bandwidth_Hz);
}

double unreferenced_flicker_factor(double t_int_ns, double T_experiment_s) {
    const double x0 = units::kPi * t_int_ns * 1e-9 / T_experiment_s;
    auto g = [](double x) {
        const double s = std::sin(x);
        return s * s / (x * x * x);
    };
    double total = 0.0;
    double lo = x0;
    if (lo < 1.0) {
        // Log substitution keeps the 1/x singular region well conditioned.
        auto h = [](double u) {
            const double x = std::exp(u);
            const double s = std::sin(x) / x;
            return s * s;
        };
        total += gauss_kronrod<double, 61>::integrate(h, std::log(lo), 0.0, 15, 1e-12);
        lo = 1.0;
    }
    const double x_max = 2000.0 * units::kPi;
    total += integrate_oscillatory(g, lo, x_max);
    return total + 1.0 / (4.0 * x_max * x_max);
}

double histogram_variance(const ChainParams& chain, double t_int_ns, bool referenced,
                          std::optional<double> gain) {
    const double sd = white_noise_sigma_pA(chain, t_int_ns);
    const double gm = gain.value_or(chain.G_m_pA_per_uV);
    const double ga2 = gm * gm * chain.A_uV_rtHz * chain.A_uV_rtHz;
    if (referenced) return 2.0 * sd * sd + 16.0 * kLn2 * ga2;
    return sd * sd + ga2 * unreferenced_flicker_factor(t_int_ns, chain.T_experiment_s);
}

double conversion_efficiency(const DeviceParams& device, double steepness) {
    const double width = device.t_c_ueV + units::thermal_energy_ueV(device.T_e_mK);
    const double x = steepness * (device.delta_st_ueV() - width) / width;
    return 1.0 / (1.0 + std::exp(-x));
}

double gain_at_bias(const ChainParams& chain, const DeviceParams& device, double V) {
    const double width = 2.0 * units::thermal_energy_ueV(device.T_e_mK);
    auto shape = [&](double v) { return v * sech2(v * chain.divider / width); };
    return chain.G_m_pA_per_uV * shape(V) / shape(chain.V_sd_uV);
}

double signal_pA(const ChainParams& chain, const DeviceParams& device, double V) {
    return conversion_efficiency(device, chain.s2c_steepness) * chain.delta_mu_uV *
           gain_at_bias(chain, device, V);
}

double snr(const ChainParams& chain, const DeviceParams& device, double t_int_ns, double V,
           bool referenced) {
    const double gain = gain_at_bias(chain, device, V);
    const double var = histogram_variance(chain, t_int_ns, referenced, gain);
    return signal_pA(chain, device, V) / std::sqrt(var);
}

std::vector<double> snr_vs_detuning(const ChainParams& chain, const DeviceParams& device,
                                    std::span<const double> detuning_ueV) {
    // The nominal SNR refers to the window center, where the contrast peaks.
    const double s0 = snr(chain, device, chain.t_int_ns, chain.V_sd_uV, chain.referenced) /
                      spin_charge_contrast(device, 0.5 * device.delta_st_ueV());
    std::vector<double> out;
    out.reserve(detuning_ueV.size());
    for (double e : detuning_ueV) out.push_back(s0 * std::max(0.0, spin_charge_contrast(device, e)));
    return out;
}

std::vector<std::vector<double>> snr_surface(const ChainParams& chain, const DeviceParams& device,
                                             std::span<const double> t_int_ns,
                                             std::span<const double> V_sd_uV, bool referenced) {
    for (double t : t_int_ns)
        if (!(t > 0.0)) throw std::invalid_argument("snr_surface: integration times must be > 0");
    for (double v : V_sd_uV)
        if (!(v > 0.0)) throw std::invalid_argument("snr_surface: biases must be > 0");
    std::vector<std::vector<double>> out(t_int_ns.size(), std::vector<double>(V_sd_uV.size()));
    for (std::size_t i = 0; i < t_int_ns.size(); ++i)
        for (std::size_t j = 0; j < V_sd_uV.size(); ++j)
            out[i][j] = snr(chain, device, t_int_ns[i], V_sd_uV[j], referenced);
    return out;
}

double snr_fidelity_bound(double snr) {
    if (snr < 0.0) throw std::invalid_argument("snr_fidelity_bound: snr must be >= 0");
    return 0.5 * std::erfc(snr / (2.0 * std::sqrt(2.0)));
}

std::vector<double> synthesize_1f(double A, double duration_s, double rate_Hz, std::uint64_t seed,
                                  std::uint64_t counter) {
    if (!(duration_s > 0.0) || !(rate_Hz > 0.0))
        throw std::invalid_argument("synthesize_1f: duration and sample rate must be > 0");
    const auto n = static_cast<std::size_t>(std::llround(duration_s * rate_Hz));
    if (n < 16) throw std::invalid_argument("synthesize_1f: need at least 16 samples");
    if (A == 0.0) return std::vector<double>(n, 0.0);

    RandomStream rng(seed, stream_tag("synthesize_1f"), counter);
    const double df = rate_Hz / static_cast<double>(n);
    const std::size_t half = n / 2;
    std::vector<std::complex<double>> spec(half + 1, {0.0, 0.0});
    for (std::size_t k = 1; k <= half; ++k) {
        const double psd = A * A / (k * df);
        if (2 * k == n) {
            spec[k] = {std::sqrt(psd * n * rate_Hz) * rng.normal(), 0.0};
        } else {
            const double amp = std::sqrt(psd * n * rate_Hz / 2.0) / std::sqrt(2.0);
            const double re = rng.normal();
            const double im = rng.normal();
            spec[k] = {amp * re, amp * im};
        }
    }
    thread_local Eigen::FFT<double> fft = [] {
        Eigen::FFT<double> f;
        f.SetFlag(Eigen::FFT<double>::HalfSpectrum);
        return f;
    }();
    std::vector<double> out;
    fft.inv(out, spec, n);
    return out;
}

Periodogram periodogram(std::span<const double> series, double rate_Hz) {
    const std::size_t n = series.size();
    if (n < 2) throw std::invalid_argument("periodogram: need at least 2 samples");
    std::vector<std::complex<double>> in(series.begin(), series.end());
    std::vector<std::complex<double>> spec;
    thread_local Eigen::FFT<double> fft;
    fft.fwd(spec, in);
    Periodogram p;
    for (std::size_t k = 1; k <= n / 2; ++k) {
        const double scale = (2 * k == n) ? 1.0 : 2.0;
        p.freq_Hz.push_back(k * rate_Hz / n);
        p.psd.push_back(scale * std::norm(spec[k]) / (n * rate_Hz));
    }
    return p;
}

double simulate_referenced_variance(const ChainParams& chain, double t_int_ns, std::size_t n_shots,
                                    std::uint64_t seed) {
    constexpr std::size_t kSamplesPerWindow = 64;
    constexpr std::size_t kWindowsPerTrace = 32;
    const double T = t_int_ns * 1e-9;
    const double fs = kSamplesPerWindow / T;
    const std::size_t n = kSamplesPerWindow * kWindowsPerTrace;
    const double white_density = total_white_density_pV(chain) / chain.R_s_kOhm * 1e-3;
    const double white_sample_sd = white_density * std::sqrt(fs / 2.0);
    const double f_mod = chain.f_mod_MHz * 1e6;

    std::vector<double> sign(2 * kSamplesPerWindow);
    for (std::size_t k = 0; k < sign.size(); ++k) {
        const double t = (k + 0.5) / fs;
        sign[k] = std::sin(2.0 * units::kPi * f_mod * t) >= 0.0 ? 1.0 : -1.0;
    }

    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t shot = 0; shot < n_shots; ++shot) {
        const auto d = synthesize_1f(chain.A_uV_rtHz, n / fs, fs, seed, shot);
        RandomStream rng(seed, stream_tag("white"), shot);
        double windows[2] = {0.0, 0.0};
        for (std::size_t w = 0; w < 2; ++w) {
            for (std::size_t k = 0; k < kSamplesPerWindow; ++k) {
                const std::size_t idx = w * kSamplesPerWindow + k;
                // Demodulating the square-wave-modulated 1/f term returns it to
                // baseband; the white term keeps the sign pattern.
                windows[w] += chain.G_m_pA_per_uV * d[idx] + sign[idx] * white_sample_sd * rng.normal();
            }
            windows[w] /= kSamplesPerWindow;
        }
        const double x = windows[0] - windows[1];
        const double delta = x - mean;
        mean += delta / static_cast<double>(shot + 1);
        m2 += delta * (x - mean);
    }
    return n_shots > 1 ? m2 / static_cast<double>(n_shots - 1) : 0.0;
}

Histogram make_histogram(std::vector<double> shots, std::vector<double> edges) {
    if (edges.size() < 2) throw std::invalid_argument("make_histogram: need at least two edges");
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (!(edges[i] > edges[i - 1]))
            throw std::invalid_argument("make_histogram: edges must be strictly increasing");
    Histogram h;
    h.edges = std::move(edges);
    h.counts.assign(h.edges.size() - 1, 0);
    for (double x : shots) {
        auto it = std::upper_bound(h.edges.begin(), h.edges.end(), x);
        std::ptrdiff_t bin = std::distance(h.edges.begin(), it) - 1;
        bin = std::clamp<std::ptrdiff_t>(bin, 0, static_cast<std::ptrdiff_t>(h.counts.size()) - 1);
        ++h.counts[static_cast<std::size_t>(bin)];
    }
    h.shots = std::move(shots);
    return h;
}

Histogram make_histogram(std::vector<double> shots, std::size_t n_bins) {
    if (shots.empty()) throw std::invalid_argument("make_histogram: no shots");
    if (n_bins == 0) throw std::invalid_argument("make_histogram: need at least one bin");
    auto [lo_it, hi_it] = std::minmax_element(shots.begin(), shots.end());
    double lo = *lo_it;
    double hi = *hi_it;
    const double pad = (hi > lo) ? 1e-9 * (hi - lo) : 0.5;
    lo -= pad;
    hi += pad;
    std::vector<double> edges(n_bins + 1);
    for (std::size_t i = 0; i <= n_bins; ++i) edges[i] = lo + (hi - lo) * i / n_bins;
    return make_histogram(std::move(shots), std::move(edges));
}

ShotModel shot_model(const ChainParams& chain, const DeviceParams& device, std::optional<double> t1_ns) {
    ShotModel m;
    m.mu_S_pA = chain.baseline_current_pA;
    m.mu_T_pA = chain.baseline_current_pA + signal_pA(chain, device, chain.V_sd_uV);
    m.sigma_pA = std::sqrt(histogram_variance(chain, chain.t_int_ns, chain.referenced));
    m.efficiency = conversion_efficiency(device, chain.s2c_steepness);
    m.t1_ns = t1_ns;
    m.t_settle_ns = chain.t_settle_us * 1e3;
    m.t_int_ns = chain.t_int_ns;
    return m;
}

ShotRecord simulate_shots(const ShotModel& m, const EncodedState& state, std::size_t n_shots,
                          std::uint64_t seed, std::uint64_t stream) {
    if (n_shots < 1) throw std::invalid_argument("simulate_shots: need at least one shot");
    state.check();
    ShotRecord rec;
    rec.current_pA.resize(n_shots);
    rec.spin_triplet.resize(n_shots);
    rec.charge_11.resize(n_shots);
    rec.relaxed.resize(n_shots);
    const double p_triplet = state.triplet_like();
    for (std::size_t i = 0; i < n_shots; ++i) {
        RandomStream rng(seed, stream, i);
        const bool triplet = rng.uniform() < p_triplet;
        bool charge_11 = triplet;
        if (rng.uniform() >= m.efficiency) charge_11 = !charge_11;
        double level = m.mu_S_pA;
        bool relaxed = false;
        if (charge_11) {
            double singlet_time_fraction = 0.0;
            if (triplet && m.t1_ns) {
                const double tau = rng.exponential(*m.t1_ns);
                const double end = m.t_settle_ns + m.t_int_ns;
                if (tau < end) {
                    relaxed = true;
                    singlet_time_fraction =
                        tau < m.t_settle_ns ? 1.0 : (end - tau) / m.t_int_ns;
                }
            }
            level = m.mu_T_pA + (m.mu_S_pA - m.mu_T_pA) * singlet_time_fraction;
        }
        rec.current_pA[i] = level + m.sigma_pA * rng.normal();
        rec.spin_triplet[i] = triplet;
        rec.charge_11[i] = charge_11;
        rec.relaxed[i] = relaxed;
    }
    return rec;
}

GaussianPairFit fit_double_gaussian(const Histogram& hist) {
    const auto& x = hist.shots;
    const std::size_t n = x.size();
    if (n < 200) throw std::invalid_argument("fit_double_gaussian: need at least 200 shots");

    // Two-cluster split, starting at the median.
    std::vector<double> sorted = x;
    std::sort(sorted.begin(), sorted.end());
    double threshold = sorted[n / 2];
    double m_lo = 0.0, m_hi = 0.0;
    for (int it = 0; it < 200; ++it) {
        auto split = std::partition_point(sorted.begin(), sorted.end(),
                                          [&](double v) { return v < threshold; });
        const auto n_lo = std::distance(sorted.begin(), split);
        const auto n_hi = std::distance(split, sorted.end());
        if (n_lo == 0 || n_hi == 0) throw DegenerateFitError("fit_double_gaussian: data are unimodal");
        m_lo = std::accumulate(sorted.begin(), split, 0.0) / n_lo;
        m_hi = std::accumulate(split, sorted.end(), 0.0) / n_hi;
        const double next = 0.5 * (m_lo + m_hi);
        if (next == threshold) break;
        threshold = next;
    }
    double w = 0.0, s_lo = 0.0, s_hi = 0.0;
    {
        double v_lo = 0.0, v_hi = 0.0;
        std::size_t c_lo = 0;
        for (double v : sorted) {
            if (v < threshold) {
                v_lo += (v - m_lo) * (v - m_lo);
                ++c_lo;
            } else {
                v_hi += (v - m_hi) * (v - m_hi);
            }
        }
        w = static_cast<double>(c_lo) / n;
        s_lo = std::sqrt(std::max(v_lo / std::max<std::size_t>(c_lo, 1), 1e-24));
        s_hi = std::sqrt(std::max(v_hi / std::max<std::size_t>(n - c_lo, 1), 1e-24));
    }

    const double sigma_floor = 1e-9 * std::max(1.0, sorted.back() - sorted.front());
    constexpr double kLogSqrt2Pi = 0.91893853320467274178;
    std::vector<double> resp(n);
    double loglik = -std::numeric_limits<double>::infinity();
    int it = 0;
    bool converged = false;
    double last_change = 0.0;
    for (; it < 5000; ++it) {
        double ll = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double z_lo = (x[i] - m_lo) / s_lo;
            const double z_hi = (x[i] - m_hi) / s_hi;
            const double a = std::log(w) - std::log(s_lo) - 0.5 * z_lo * z_lo;
            const double b = std::log1p(-w) - std::log(s_hi) - 0.5 * z_hi * z_hi;
            const double mx = std::max(a, b);
            const double lse = mx + std::log(std::exp(a - mx) + std::exp(b - mx));
            resp[i] = std::exp(a - lse);
            ll += lse - kLogSqrt2Pi;
        }
        last_change = ll - loglik;
        if (std::abs(last_change) < 1e-10 * n) {
            loglik = ll;
            converged = true;
            break;
        }
        loglik = ll;
        double r_sum = 0.0, mu_a = 0.0, mu_b = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            r_sum += resp[i];
            mu_a += resp[i] * x[i];
            mu_b += (1.0 - resp[i]) * x[i];
        }
        if (r_sum <= 0.5 || r_sum >= n - 0.5)
            throw DegenerateFitError("fit_double_gaussian: one component collapsed to zero weight");
        mu_a /= r_sum;
        mu_b /= (n - r_sum);
        double va = 0.0, vb = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            va += resp[i] * (x[i] - mu_a) * (x[i] - mu_a);
            vb += (1.0 - resp[i]) * (x[i] - mu_b) * (x[i] - mu_b);
        }
        w = r_sum / n;
        m_lo = mu_a;
        m_hi = mu_b;
        s_lo = std::max(std::sqrt(va / r_sum), sigma_floor);
        s_hi = std::max(std::sqrt(vb / (n - r_sum)), sigma_floor);
    }
    if (!converged) {
        const double d = std::abs(m_hi - m_lo) / std::sqrt(0.5 * (s_lo * s_lo + s_hi * s_hi));
        if (d < 2.0)
            throw DegenerateFitError("fit_double_gaussian: components are not separable (D = " +
                                     std::to_string(d) + ")");
        throw FitError("fit_double_gaussian: EM did not converge after " + std::to_string(it) +
                       " iterations (last log-likelihood change " + std::to_string(last_change) + ")");
    }
    if (m_lo > m_hi) {
        std::swap(m_lo, m_hi);
        std::swap(s_lo, s_hi);
        w = 1.0 - w;
    }
    GaussianPairFit fit;
    fit.mu_S = m_lo;
    fit.mu_T = m_hi;
    fit.sigma_S = s_lo;
    fit.sigma_T = s_hi;
    fit.weight_S = w;
    fit.weight_T = 1.0 - w;
    const double pooled = std::sqrt(0.5 * (s_lo * s_lo + s_hi * s_hi));
    fit.snr = std::abs(m_hi - m_lo) / pooled;
    fit.log_likelihood = loglik;
    fit.iterations = it;
    // Ashman's D: below 2 the mixture has no separable modes.
    if (fit.snr < 2.0)
        throw DegenerateFitError("fit_double_gaussian: components are not separable (D = " +
                                 std::to_string(fit.snr) + ")");

    double chi2 = 0.0;
    std::size_t used = 0;
    auto cdf = [](double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); };
    for (std::size_t b = 0; b < hist.counts.size(); ++b) {
        const double lo = hist.edges[b], hi = hist.edges[b + 1];
        const double p = w * (cdf((hi - m_lo) / s_lo) - cdf((lo - m_lo) / s_lo)) +
                         (1.0 - w) * (cdf((hi - m_hi) / s_hi) - cdf((lo - m_hi) / s_hi));
        const double expected = p * n;
        if (expected < 5.0) continue;
        const double d = hist.counts[b] - expected;
        chi2 += d * d / expected;
        ++used;
    }
    fit.chi2_per_bin = used ? chi2 / used : 0.0;
    return fit;
}

SpectroscopyMap spin_blockade_spectroscopy(const ChainParams& chain, const DeviceParams& device,
                                           std::span<const double> detuning,
                                           std::size_t shots_per_point, std::uint64_t seed,
                                           const EncodedState& state, std::size_t n_bins) {
    state.check();
    const double sig = signal_pA(chain, device, chain.V_sd_uV) /
                       conversion_efficiency(device, chain.s2c_steepness);
    const double sigma = std::sqrt(histogram_variance(chain, chain.t_int_ns, chain.referenced));
    const double lo = chain.baseline_current_pA - 5.0 * sigma;
    const double hi = chain.baseline_current_pA + sig + 5.0 * sigma;
    SpectroscopyMap map;
    map.detuning_ueV.assign(detuning.begin(), detuning.end());
    map.edges_pA.resize(n_bins + 1);
    for (std::size_t i = 0; i <= n_bins; ++i) map.edges_pA[i] = lo + (hi - lo) * i / n_bins;
    const double p_triplet = state.triplet_like();
    for (std::size_t d = 0; d < detuning.size(); ++d) {
        const double ps = p20_singlet(device, detuning[d]);
        const double pt = p20_triplet(device, detuning[d]);
        std::vector<double> shots(shots_per_point);
        std::size_t n11 = 0;
        for (std::size_t j = 0; j < shots_per_point; ++j) {
            RandomStream rng(seed, stream_tag("spectroscopy"), d * shots_per_point + j);
            const bool triplet = rng.uniform() < p_triplet;
            const bool charge_20 = rng.uniform() < (triplet ? pt : ps);
            n11 += !charge_20;
            shots[j] = chain.baseline_current_pA + (charge_20 ? 0.0 : sig) + sigma * rng.normal();
        }
        map.counts.push_back(make_histogram(std::move(shots), map.edges_pA).counts);
        map.triplet_branch_fraction.push_back(shots_per_point ? double(n11) / shots_per_point : 0.0);
    }
    return map;
}

}  // namespace spamsim

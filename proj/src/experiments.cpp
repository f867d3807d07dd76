#include "spamsim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <fstream>

#include "spamsim/budget.hpp"
#include "spamsim/random.hpp"
#include "spamsim/units.hpp"

namespace spamsim {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) { return fmt::format("{:.12g}", v); }

class Csv {
public:
    explicit Csv(std::vector<std::string> header) : cols_(header.size()) { add(header); }

    template <class... T>
    void row(const T&... values) {
        std::vector<std::string> cells{cell(values)...};
        if (cells.size() != cols_) throw std::logic_error("csv row width mismatch");
        add(cells);
    }

    const std::string& text() const { return text_; }

private:
    std::size_t cols_;
    std::string text_;

    static std::string cell(double v) { return num(v); }
    static std::string cell(int v) { return std::to_string(v); }
    static std::string cell(std::size_t v) { return std::to_string(v); }
    static std::string cell(bool v) { return v ? "1" : "0"; }
    static std::string cell(const std::string& v) { return v; }
    static std::string cell(const char* v) { return v; }

    void add(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) text_ += ',';
            text_ += cells[i];
        }
        text_ += '\n';
    }
};

class Writer {
public:
    Writer(fs::path dir, ExperimentResult& result) : dir_(std::move(dir)), result_(result) {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec || !fs::is_directory(dir_)) throw OutputError("cannot create output directory " + dir_.string());
    }

    void write(const std::string& file, const std::string& content) {
        const fs::path path = dir_ / file;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << content;
        out.close();
        if (!out) throw OutputError("cannot write " + path.string());
        result_.files.push_back(path);
    }

    void csv(const std::string& file, const Csv& c) { write(file, c.text()); }
    void json_file(const std::string& file, const json& j) { write(file, j.dump(2) + "\n"); }

private:
    fs::path dir_;
    ExperimentResult& result_;
};

std::uint64_t experiment_seed(std::uint64_t seed, const std::string& name) {
    std::uint64_t s = seed ^ stream_tag(name);
    return splitmix64(s);
}

double measure_t1_ns(const ExperimentConfig& c) {
    return t1_at(c.landscape.resolved(c.device), c.mapping.measure_ueV, c.readout.V_sd_uV) * 1e6;
}

void run_snr_surface(const ExperimentConfig& c, std::uint64_t seed, Writer& w, ExperimentResult& r) {
    const auto& s = c.snr_surface;
    const auto grid = snr_surface(c.readout, c.device, s.t_int_ns, s.V_sd_uV, s.referenced);
    Csv surface({"t_int_ns", "V_sd_uV", "snr", "fidelity_bound"});
    for (std::size_t i = 0; i < s.t_int_ns.size(); ++i)
        for (std::size_t j = 0; j < s.V_sd_uV.size(); ++j)
            surface.row(s.t_int_ns[i], s.V_sd_uV[j], grid[i][j], snr_fidelity_bound(grid[i][j]));
    w.csv("snr_surface.csv", surface);

    const double nominal = snr(c.readout, c.device, c.readout.t_int_ns, c.readout.V_sd_uV, c.readout.referenced);
    const ShotModel model = shot_model(c.readout, c.device, measure_t1_ns(c));
    const ShotRecord shots = simulate_shots(model, EncodedState::mixture(0.5), c.run.shots, seed);
    const Histogram hist = make_histogram(shots.current_pA, 80);
    Csv h({"bin_lo_pA", "bin_hi_pA", "count"});
    for (std::size_t b = 0; b < hist.counts.size(); ++b) h.row(hist.edges[b], hist.edges[b + 1], hist.counts[b]);
    w.csv("histogram.csv", h);

    r.report = {{"snr_nominal", nominal},
                {"fidelity_bound_nominal", snr_fidelity_bound(nominal)},
                {"t_int_ns", c.readout.t_int_ns},
                {"V_sd_uV", c.readout.V_sd_uV},
                {"referenced", c.readout.referenced},
                {"histogram_variance_pA2", histogram_variance(c.readout, c.readout.t_int_ns, c.readout.referenced)}};
    std::string fitted = "fit skipped";
    if (c.run.shots >= 200) {
        try {
            const GaussianPairFit fit = fit_double_gaussian(hist);
            r.report["fit"] = {{"mu_S_pA", fit.mu_S},         {"mu_T_pA", fit.mu_T},
                               {"sigma_S_pA", fit.sigma_S},   {"sigma_T_pA", fit.sigma_T},
                               {"weight_S", fit.weight_S},    {"weight_T", fit.weight_T},
                               {"snr", fit.snr},              {"chi2_per_bin", fit.chi2_per_bin}};
            fitted = fmt::format("fitted {:.2f}", fit.snr);
        } catch (const FitError& e) {
            r.report["fit_error"] = e.what();
            fitted = "fit failed";
        }
    }
    r.summary = fmt::format("SNR {:.2f} at t_int {} ns, V_sd {} uV (bound {:.2e}); histogram {}", nominal,
                            num(c.readout.t_int_ns), num(c.readout.V_sd_uV), snr_fidelity_bound(nominal), fitted);
}

void run_spectroscopy(const ExperimentConfig& c, std::uint64_t seed, Writer& w, ExperimentResult& r) {
    const auto& s = c.spectroscopy;
    const LevelDiagram d = level_diagram(c.device, s.detuning_ueV);
    Csv levels({"detuning_ueV", "singlet_ground_ueV", "singlet_excited_ueV", "triplet_m1_ueV", "triplet_0_ueV",
                "triplet_p1_ueV", "triplet_excited_0_ueV", "orbital_20_ueV", "valley_20_ueV"});
    for (std::size_t i = 0; i < d.detuning_ueV.size(); ++i)
        levels.row(d.detuning_ueV[i], d.singlet_ground[i], d.singlet_excited[i], d.triplet_ground[0][i],
                   d.triplet_ground[1][i], d.triplet_ground[2][i], d.triplet_excited[1][i], d.orbital_20[i],
                   d.valley_20[i]);
    w.csv("level_diagram.csv", levels);

    const SpectroscopyMap map = spin_blockade_spectroscopy(c.readout, c.device, s.detuning_ueV, c.run.shots, seed,
                                                           EncodedState::mixture(s.triplet_fraction), s.bins);
    Csv counts({"detuning_ueV", "bin_lo_pA", "bin_hi_pA", "count"});
    for (std::size_t i = 0; i < map.detuning_ueV.size(); ++i)
        for (std::size_t b = 0; b < map.counts[i].size(); ++b)
            counts.row(map.detuning_ueV[i], map.edges_pA[b], map.edges_pA[b + 1], map.counts[i][b]);
    w.csv("spectroscopy.csv", counts);

    Csv frac({"detuning_ueV", "fraction_11", "contrast", "snr"});
    const auto snr_eps = snr_vs_detuning(c.readout, c.device, s.detuning_ueV);
    for (std::size_t i = 0; i < map.detuning_ueV.size(); ++i)
        frac.row(map.detuning_ueV[i], map.triplet_branch_fraction[i], spin_charge_contrast(c.device, map.detuning_ueV[i]),
                 snr_eps[i]);
    w.csv("spectroscopy_fraction.csv", frac);

    r.report = {{"delta_st_ueV", c.device.delta_st_ueV()}};
    try {
        const DetuningInterval win = measure_window(c.device);
        r.report["window_lo_ueV"] = win.lo_ueV;
        r.report["window_hi_ueV"] = win.hi_ueV;
        r.summary = fmt::format("measure window [{:.1f}, {:.1f}] ueV, width {:.1f} ueV", win.lo_ueV, win.hi_ueV,
                                win.width());
    } catch (const EmptyWindowError& e) {
        r.report["window_error"] = e.what();
        r.summary = "measure window empty";
    }
}

void run_t1_map(const ExperimentConfig& c, std::uint64_t seed, Writer& w, ExperimentResult& r) {
    const auto& s = c.t1_map;
    const T1Landscape land = c.landscape.resolved(c.device);
    const auto res = trial_measurement_experiment(land, c.readout.V_sd_uV, s.detuning_ueV, s.duration_ns,
                                                  c.run.shots, seed, s.triplet_fraction);
    Csv map({"detuning_ueV", "duration_ns", "p_singlet"});
    for (std::size_t i = 0; i < res.detuning_ueV.size(); ++i)
        for (std::size_t j = 0; j < res.duration_ns.size(); ++j)
            map.row(res.detuning_ueV[i], res.duration_ns[j], res.p_singlet[i][j]);
    w.csv("t1_map.csv", map);

    const double t_meas_ms = (c.readout.t_settle_us * 1e3 + c.readout.t_int_ns) * 1e-6;
    std::vector<double> t1_ms;
    for (double e : s.detuning_ueV) t1_ms.push_back(t1_at(land, e, c.readout.V_sd_uV));
    const auto snr_eps = snr_vs_detuning(c.readout, c.device, s.detuning_ueV);
    const auto limit = composite_fidelity_limit(snr_eps, t1_ms, t_meas_ms);

    Csv fits({"detuning_ueV", "t1_fit_ms", "t1_err_ms", "censored", "t1_model_ms"});
    for (std::size_t i = 0; i < res.fits.size(); ++i) {
        const auto& f = res.fits[i];
        fits.row(res.detuning_ueV[i], f.t1_ns * 1e-6, f.t1_err_ns * 1e-6, f.censored, t1_ms[i]);
    }
    w.csv("t1_fit.csv", fits);

    Csv comp({"detuning_ueV", "snr", "t1_ms", "snr_bound", "t1_bound", "composite"});
    for (std::size_t i = 0; i < limit.size(); ++i)
        comp.row(s.detuning_ueV[i], snr_eps[i], t1_ms[i], snr_fidelity_bound(snr_eps[i]),
                 t1_fidelity_bound(t_meas_ms, t1_ms[i]), limit[i]);
    w.csv("composite.csv", comp);

    const auto best = std::min_element(limit.begin(), limit.end()) - limit.begin();
    const auto loud = std::max_element(snr_eps.begin(), snr_eps.end()) - snr_eps.begin();
    r.report = {{"optimal_detuning_ueV", s.detuning_ueV[best]},
                {"optimal_infidelity", limit[best]},
                {"max_snr_detuning_ueV", s.detuning_ueV[loud]},
                {"max_snr", snr_eps[loud]},
                {"t_meas_ms", t_meas_ms}};
    r.summary = fmt::format("composite optimum at {} ueV ({:.2e}); SNR peaks at {} ueV", num(s.detuning_ueV[best]),
                            limit[best], num(s.detuning_ueV[loud]));
}

void run_init_sweep(const ExperimentConfig& c, Writer& w, ExperimentResult& r) {
    const auto& s = c.init_sweep;
    const auto map = init_sweep_map(c.init, c.device, s.bias_mV, s.duration_ns);
    Csv csv({"bias_mV", "duration_ns", "p_triplet"});
    for (std::size_t i = 0; i < s.duration_ns.size(); ++i)
        for (std::size_t j = 0; j < s.bias_mV.size(); ++j) csv.row(s.bias_mV[j], s.duration_ns[i], map[i][j]);
    w.csv("init_sweep.csv", csv);

    std::vector<double> t = s.duration_ns;
    if (std::find(t.begin(), t.end(), c.init.flush_ns) == t.end()) t.push_back(c.init.flush_ns);
    std::sort(t.begin(), t.end());
    const FlushTrace trace =
        flush_dynamics(c.init, c.device, t, EncodedState::mixture(c.init.dephased_triplet_fraction));
    Csv flush({"t_ns", "p0", "p1", "leak_valley", "leak_gauge", "offset_mV"});
    double at_flush = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto& st = trace.state[i];
        flush.row(t[i], st.p0, st.p1, st.leak.valley, st.leak.gauge, settle_distortion(c.init, t[i]));
        if (t[i] == c.init.flush_ns) at_flush = st.triplet_like();
    }
    w.csv("flush.csv", flush);

    const double eq = 1.0 - equilibrium_population(c.device).p0;
    r.report = {{"equilibrium_triplet_like", eq},
                {"triplet_like_after_flush", at_flush},
                {"flush_ns", c.init.flush_ns},
                {"frozen", trace.frozen},
                {"time_constant_ns", flush_time_constant_ns(c.init, c.device)},
                {"gauge_excited", gauge_excited_fraction(c.device)}};
    r.summary = fmt::format("triplet-like {:.3e} after {} ns flush (equilibrium {:.3e}){}", at_flush,
                            num(c.init.flush_ns), eq, trace.frozen ? ", frozen" : "");
}

void run_mapping(const ExperimentConfig& c, std::uint64_t seed, Writer& w, ExperimentResult& r) {
    const MappingResult m = mapping_error_experiment(c.mapping, c.device, c.readout, c.landscape, c.init, seed);
    Csv csv({"plan", "model_error", "triplet_fraction", "shots"});
    csv.row("direct", m.error_direct, m.fraction_direct, m.shots);
    csv.row("via_idle", m.error_via_idle, m.fraction_via_idle, m.shots);
    w.csv("mapping.csv", csv);

    Csv plan({"plan", "segment", "start_ueV", "end_ueV", "duration_ns", "mode"});
    auto dump = [&](const char* name, const RampPlan& p) {
        for (std::size_t i = 0; i < p.segments.size(); ++i) {
            const auto& sg = p.segments[i];
            plan.row(name, i, sg.start_ueV, sg.end_ueV, sg.duration_ns, sg.mode == SegmentMode::jump ? "jump" : "ramp");
        }
    };
    dump("direct", direct_plan(c.mapping));
    dump("via_idle", via_idle_plan(c.mapping));
    w.csv("mapping_plans.csv", plan);

    r.report = {{"init_triplet_like", m.init_triplet_like}, {"error_direct", m.error_direct},
                {"error_via_idle", m.error_via_idle},       {"fraction_direct", m.fraction_direct},
                {"fraction_via_idle", m.fraction_via_idle}, {"difference", m.difference()},
                {"shots", m.shots}};
    r.summary = fmt::format("triplet fraction direct {:.2e}, via idle {:.2e}, difference {:.2e}", m.fraction_direct,
                            m.fraction_via_idle, m.difference());
}

json params_json(const RbParams& p) { return {{"A", p.A}, {"B", p.B}, {"C", p.C}, {"p", p.p}, {"q", p.q}}; }

void run_blind_rb_experiment(const ExperimentConfig& c, std::uint64_t seed, Writer& w, ExperimentResult& r) {
    const auto& s = c.blind_rb;
    const RbCurves cv = run_blind_rb(c.channel, s.lengths, s.sequences, s.shots, seed);
    Csv csv({"N", "y0_mean", "y0_err", "y1_mean", "y1_err"});
    for (std::size_t i = 0; i < cv.lengths.size(); ++i) csv.row(cv.lengths[i], cv.y0[i], cv.y0_err[i], cv.y1[i], cv.y1_err[i]);
    w.csv("blind_rb.csv", csv);

    const RbFit fit = fit_brb(cv);
    const RbParams truth = channel_truth(c.channel);
    const double fa = assignment_fidelity(c.channel, c.run.shots, seed ^ 0x5a5a5a5aULL);
    r.report = {{"params", params_json(fit.params)},
                {"errors", params_json(fit.errors)},
                {"chi2", fit.chi2},
                {"dof", fit.dof},
                {"f_bc_infidelity", fit.f_bc_infidelity()},
                {"f_bc_infidelity_err", fit.f_bc_error()},
                {"per_clifford_error", fit.per_clifford_error()},
                {"leakage_rate_true", c.channel.leak_in},
                {"warnings", fit.warnings},
                {"truth", params_json(truth)},
                {"f_bc_infidelity_true", 0.5 - truth.B},
                {"assignment_fidelity", fa}};
    w.json_file("blind_rb_fit.json", r.report);
    r.summary = fmt::format("1-F_BC = {:.2e} +/- {:.1e}, per-Clifford error {:.2e}, q {:.1e}, F_A {:.5f}",
                            fit.f_bc_infidelity(), fit.f_bc_error(), fit.per_clifford_error(), fit.params.q, fa);
}

void run_exchange(const ExperimentConfig& c, std::uint64_t seed, Writer& w, ExperimentResult& r) {
    const auto& s = c.exchange;
    std::vector<double> theta;
    for (std::size_t i = 0; i < s.points; ++i)
        theta.push_back(2.0 * units::kPi * s.turns * static_cast<double>(i) / static_cast<double>(s.points - 1));
    const ExchangeResult e = exchange_contrast(s.spam_infidelity, theta, s.shots, seed, s.input_singlet);
    Csv csv({"theta_rad", "p_singlet"});
    for (std::size_t i = 0; i < e.theta_rad.size(); ++i) csv.row(e.theta_rad[i], e.p_singlet[i]);
    w.csv("exchange.csv", csv);
    r.report = {{"contrast", e.contrast},
                {"contrast_err", e.contrast_err},
                {"implied_infidelity", e.implied_infidelity},
                {"injected_infidelity", s.spam_infidelity}};
    r.summary = fmt::format("contrast {:.5f} +/- {:.1e}, implied SPAM infidelity {:.2e}", e.contrast, e.contrast_err,
                            e.implied_infidelity);
}

void run_budget(const ExperimentConfig& c, Writer& w, ExperimentResult& r) {
    ErrorBudget b = assemble_budget(c.device, c.readout, c.landscape, c.mapping, {c.budget.boltzmann_quoted});
    if (c.budget.compare) compare_budget(b, *c.budget.compare);
    Csv csv({"label", "contribution", "source"});
    for (const auto& e : b.entries) csv.row(e.label, e.contribution, e.source);
    csv.row("Total", b.total, "");
    w.csv("budget.csv", csv);

    json entries = json::array();
    for (const auto& e : b.entries)
        entries.push_back({{"label", e.label}, {"contribution", e.contribution}, {"source", e.source}});
    r.report = {{"entries", entries}, {"total", b.total}, {"boltzmann_exact", b.boltzmann_exact}};
    std::string tail;
    if (b.missing) {
        r.report["observed"] = *b.observed;
        r.report["missing"] = *b.missing;
        tail = fmt::format(", missing {:.2e}", *b.missing);
        if (*b.missing > 0.0 && *b.missing < 0.5) {
            const double e = invert_missing_error(*b.missing, c.device.T_e_mK);
            r.report["implied_valley_ueV"] = e;
            tail += fmt::format(" (implied gauge valley energy {:.0f} ueV)", e);
        }
    }
    w.json_file("budget.json", r.report);
    w.write("budget.txt", format_budget(b));
    r.summary = fmt::format("budget total {:.2e}{}", b.total, tail);
}

}  // namespace

ExperimentResult run_experiment(const std::string& name, const ExperimentConfig& config, const fs::path& out_dir,
                                const std::optional<std::string>& config_text) {
    if (std::find(kExperimentNames.begin(), kExperimentNames.end(), name) == kExperimentNames.end())
        throw UnknownExperimentError("unknown experiment '" + name + "'");
    ExperimentResult r;
    r.name = name;
    Writer w(out_dir, r);
    const std::uint64_t seed = experiment_seed(config.run.seed, name);

    if (name == "snr-surface") run_snr_surface(config, seed, w, r);
    else if (name == "spectroscopy") run_spectroscopy(config, seed, w, r);
    else if (name == "t1-map") run_t1_map(config, seed, w, r);
    else if (name == "init-sweep") run_init_sweep(config, w, r);
    else if (name == "mapping") run_mapping(config, seed, w, r);
    else if (name == "blind-rb") run_blind_rb_experiment(config, seed, w, r);
    else if (name == "exchange") run_exchange(config, seed, w, r);
    else run_budget(config, w, r);

    json summary = {{"experiment", name}, {"seed", config.run.seed}, {"summary", r.summary}, {"report", r.report}};
    std::string stem = name;
    std::replace(stem.begin(), stem.end(), '-', '_');
    w.json_file(stem + "_summary.json", summary);
    if (config_text) w.write("config.conf", *config_text);
    w.json_file("config.json", to_json(config));
    return r;
}

}  // namespace spamsim

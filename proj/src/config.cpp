#include "spamsim/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <functional>
#include <map>
#include <regex>
#include <set>
#include <sstream>

namespace spamsim {

ConfigSyntaxError::ConfigSyntaxError(std::string origin, int line, int column, const std::string& message)
    : std::runtime_error(fmt::format("{}:{}:{}: {}", origin, line, column, message)), line_(line), column_(column) {}

namespace {

struct Value {
    enum class Kind { number, boolean, string, list } kind = Kind::number;
    double number = 0.0;
    bool boolean = false;
    std::string text;  ///< raw token for numbers, content for strings
    std::vector<double> list;
    int line = 0;
    int column = 0;
};

struct Entry {
    std::string key;
    Value value;
};

class LineParser {
public:
    LineParser(std::string_view line, int line_no, const std::string& origin)
        : s_(line), line_(line_no), origin_(origin) {}

    std::optional<Entry> parse() {
        skip_ws();
        if (at_end() || peek() == '#') return std::nullopt;
        Entry e;
        e.key = parse_key();
        skip_ws();
        if (at_end() || peek() != '=') fail("expected '=' after key");
        ++pos_;
        skip_ws();
        if (at_end() || peek() == '#') fail("missing value");
        e.value = parse_value();
        skip_ws();
        if (!at_end() && peek() != '#') fail("unexpected text after value");
        return e;
    }

private:
    std::string_view s_;
    std::size_t pos_ = 0;
    int line_;
    const std::string& origin_;

    bool at_end() const { return pos_ >= s_.size(); }
    char peek() const { return s_[pos_]; }
    int column() const { return static_cast<int>(pos_) + 1; }
    void skip_ws() {
        while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) ++pos_;
    }
    [[noreturn]] void fail(const std::string& msg) const { throw ConfigSyntaxError(origin_, line_, column(), msg); }

    static bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
    static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

    std::string parse_key() {
        std::string key;
        for (;;) {
            if (at_end() || !ident_start(peek())) fail("expected key name");
            while (!at_end() && ident_char(peek())) key += s_[pos_++];
            if (!at_end() && peek() == '[') {
                key += s_[pos_++];
                if (at_end() || !std::isdigit(static_cast<unsigned char>(peek()))) fail("expected index");
                while (!at_end() && std::isdigit(static_cast<unsigned char>(peek()))) key += s_[pos_++];
                if (at_end() || peek() != ']') fail("expected ']'");
                key += s_[pos_++];
            }
            if (!at_end() && peek() == '.') {
                key += s_[pos_++];
                continue;
            }
            return key;
        }
    }

    double parse_number() {
        const std::size_t start = pos_;
        while (!at_end() && std::string_view("+-.0123456789eE").find(peek()) != std::string_view::npos) ++pos_;
        double v = 0.0;
        const auto* first = s_.data() + start;
        const auto* last = s_.data() + pos_;
        if (*first == '+') ++first;
        const auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last || first == last) {
            pos_ = start;
            fail("malformed number");
        }
        return v;
    }

    std::vector<double> parse_args(std::size_t count) {
        std::vector<double> out;
        if (at_end() || peek() != '(') fail("expected '('");
        ++pos_;
        for (std::size_t i = 0; i < count; ++i) {
            skip_ws();
            out.push_back(parse_number());
            skip_ws();
            const char want = i + 1 == count ? ')' : ',';
            if (at_end() || peek() != want) fail(fmt::format("expected '{}'", want));
            ++pos_;
        }
        return out;
    }

    Value parse_value() {
        Value v;
        v.line = line_;
        v.column = column();
        const char c = peek();
        if (c == '"') {
            ++pos_;
            v.kind = Value::Kind::string;
            while (!at_end() && peek() != '"') v.text += s_[pos_++];
            if (at_end()) fail("unterminated string");
            ++pos_;
            return v;
        }
        if (c == '[') {
            ++pos_;
            v.kind = Value::Kind::list;
            skip_ws();
            if (!at_end() && peek() == ']') {
                ++pos_;
                return v;
            }
            for (;;) {
                skip_ws();
                v.list.push_back(parse_number());
                skip_ws();
                if (at_end()) fail("unterminated list");
                if (peek() == ']') {
                    ++pos_;
                    return v;
                }
                if (peek() != ',') fail("expected ',' or ']'");
                ++pos_;
            }
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.') {
            const std::size_t start = pos_;
            v.number = parse_number();
            v.text = std::string(s_.substr(start, pos_ - start));
            return v;
        }
        if (ident_start(c)) {
            const std::size_t start = pos_;
            while (!at_end() && (ident_char(peek()) || std::string_view(",-").find(peek()) != std::string_view::npos))
                ++pos_;
            const std::string word(s_.substr(start, pos_ - start));
            if (word == "true" || word == "false") {
                v.kind = Value::Kind::boolean;
                v.boolean = word == "true";
                return v;
            }
            if (word == "linspace" || word == "geomspace") {
                const auto a = parse_args(3);
                const double n = a[2];
                if (!(n >= 2 && n == std::floor(n))) fail(word + ": count must be an integer >= 2");
                if (word == "geomspace" && !(a[0] > 0 && a[1] > 0)) fail("geomspace: bounds must be > 0");
                v.kind = Value::Kind::list;
                const auto count = static_cast<std::size_t>(n);
                for (std::size_t i = 0; i < count; ++i) {
                    const double f = static_cast<double>(i) / static_cast<double>(count - 1);
                    v.list.push_back(word == "linspace" ? a[0] + (a[1] - a[0]) * f
                                                        : a[0] * std::pow(a[1] / a[0], f));
                }
                return v;
            }
            v.kind = Value::Kind::string;
            v.text = word;
            return v;
        }
        fail("unrecognized value");
    }
};

std::string where(const Value& v) { return fmt::format("line {}, col {}", v.line, v.column); }

using Setter = std::function<std::optional<std::string>(const Value&)>;

Setter number(double& target) {
    return [&target](const Value& v) -> std::optional<std::string> {
        if (v.kind != Value::Kind::number) return "expects a number";
        target = v.number;
        return std::nullopt;
    };
}

template <class Int>
Setter integer(Int& target) {
    return [&target](const Value& v) -> std::optional<std::string> {
        if (v.kind != Value::Kind::number) return "expects an integer";
        Int out{};
        const auto* first = v.text.data();
        const auto* last = v.text.data() + v.text.size();
        if (first != last && *first == '+') ++first;
        const auto [ptr, ec] = std::from_chars(first, last, out);
        if (ec != std::errc() || ptr != last) return "expects a non-negative integer";
        target = out;
        return std::nullopt;
    };
}

Setter boolean(bool& target) {
    return [&target](const Value& v) -> std::optional<std::string> {
        if (v.kind != Value::Kind::boolean) return "expects true or false";
        target = v.boolean;
        return std::nullopt;
    };
}

Setter string(std::string& target) {
    return [&target](const Value& v) -> std::optional<std::string> {
        if (v.kind != Value::Kind::string) return "expects a string";
        target = v.text;
        return std::nullopt;
    };
}

Setter optional_number(std::optional<double>& target, const char* none_word) {
    return [&target, none_word](const Value& v) -> std::optional<std::string> {
        if (v.kind == Value::Kind::string && v.text == none_word) {
            target.reset();
            return std::nullopt;
        }
        if (v.kind != Value::Kind::number) return fmt::format("expects a number or {}", none_word);
        target = v.number;
        return std::nullopt;
    };
}

Setter list(std::vector<double>& target) {
    return [&target](const Value& v) -> std::optional<std::string> {
        if (v.kind == Value::Kind::number) {
            target = {v.number};
            return std::nullopt;
        }
        if (v.kind != Value::Kind::list) return "expects a list of numbers";
        target = v.list;
        return std::nullopt;
    };
}

Setter int_list(std::vector<int>& target) {
    return [&target](const Value& v) -> std::optional<std::string> {
        std::vector<double> raw;
        if (v.kind == Value::Kind::number) raw = {v.number};
        else if (v.kind == Value::Kind::list) raw = v.list;
        else return "expects a list of integers";
        std::vector<int> out;
        for (double x : raw) {
            if (x != std::floor(x) || std::abs(x) > 1e9) return "expects a list of integers";
            out.push_back(static_cast<int>(x));
        }
        target = out;
        return std::nullopt;
    };
}

std::map<std::string, Setter> fixed_keys(ExperimentConfig& c) {
    std::map<std::string, Setter> k;
    auto& d = c.device;
    k["device.E_o"] = number(d.E_o_ueV);
    k["device.E_v"] = number(d.E_v_ueV);
    k["device.E_v_gauge"] = number(d.E_v_gauge_ueV);
    k["device.T_e"] = number(d.T_e_mK);
    k["device.B"] = number(d.B_mT);
    k["device.t_c"] = number(d.t_c_ueV);
    k["device.g_factor"] = number(d.g_factor);

    auto& r = c.readout;
    k["readout.R_s"] = number(r.R_s_kOhm);
    k["readout.C_p"] = number(r.C_p_pF);
    k["readout.f_mod"] = number(r.f_mod_MHz);
    k["readout.V_sd"] = number(r.V_sd_uV);
    k["readout.G_m"] = number(r.G_m_pA_per_uV);
    k["readout.A"] = number(r.A_uV_rtHz);
    k["readout.delta_mu"] = number(r.delta_mu_uV);
    k["readout.t_settle"] = number(r.t_settle_us);
    k["readout.t_int"] = number(r.t_int_ns);
    k["readout.T_experiment"] = number(r.T_experiment_s);
    k["readout.divider"] = number(r.divider);
    k["readout.s2c_steepness"] = number(r.s2c_steepness);
    k["readout.baseline"] = number(r.baseline_current_pA);
    k["readout.referenced"] = boolean(r.referenced);

    auto& l = c.landscape;
    k["landscape.baseline"] = number(l.baseline_ms);
    k["landscape.V_onset"] = number(l.V_onset_uV);
    k["landscape.cubic"] = number(l.cubic_per_ms_uV3);

    auto& i = c.init;
    k["init.boundary"] = [&i](const Value& v) -> std::optional<std::string> {
        if (v.kind != Value::Kind::string) return "expects 1,0-2,0 or 2,0-3,0";
        try {
            i.boundary = parse_boundary(v.text);
        } catch (const std::invalid_argument&) {
            return "expects 1,0-2,0 or 2,0-3,0";
        }
        return std::nullopt;
    };
    k["init.gamma0"] = number(i.gamma0_per_us);
    k["init.barrier_factor"] = number(i.barrier_factor);
    k["init.flush"] = number(i.flush_ns);
    k["init.offset"] = number(i.offset_mV);
    k["init.lever"] = number(i.lever_ueV_per_mV);
    k["init.drift_amplitude"] = number(i.drift_amplitude_mV);
    k["init.drift_tau"] = number(i.drift_tau_ns);
    k["init.boundary_10_20"] = number(i.boundary_10_20_mV);
    k["init.boundary_20_30"] = number(i.boundary_20_30_mV);
    k["init.dephased_triplet_fraction"] = number(i.dephased_triplet_fraction);

    auto& m = c.mapping;
    k["mapping.init"] = number(m.init_ueV);
    k["mapping.entry_out"] = number(m.entry_out_ueV);
    k["mapping.entry_in"] = number(m.entry_in_ueV);
    k["mapping.idle"] = number(m.idle_ueV);
    k["mapping.measure"] = number(m.measure_ueV);
    k["mapping.ramp"] = number(m.ramp_ns);
    k["mapping.dwell"] = number(m.dwell_ns);
    k["mapping.T2_idle"] = number(m.T2_idle_ns);
    k["mapping.J_scale"] = number(m.J_scale_ueV);
    k["mapping.readout_t_int"] = number(m.readout_t_int_ns);
    k["mapping.shots"] = integer(m.shots);

    auto& ch = c.channel;
    k["channel.depolarizing"] = number(ch.depolarizing);
    k["channel.leak_in"] = number(ch.leak_in);
    k["channel.leak_out"] = number(ch.leak_out);
    k["channel.init_error"] = number(ch.init_error);
    k["channel.measure_error"] = number(ch.measure_error);
    k["channel.mapping_error"] = number(ch.mapping_error);
    k["channel.init_leak"] = number(ch.init_leak);
    k["channel.gauge_excited"] = number(ch.gauge_excited);
    k["channel.leak_reads_triplet"] = number(ch.leak_reads_triplet);
    k["channel.leak_reads_as_prepared"] = boolean(ch.leak_reads_as_prepared);

    k["budget.boltzmann_quoted"] = optional_number(c.budget.boltzmann_quoted, "exact");
    k["budget.compare"] = optional_number(c.budget.compare, "none");

    k["run.seed"] = integer(c.run.seed);
    k["run.shots"] = integer(c.run.shots);
    k["run.out"] = string(c.run.out);

    k["snr_surface.t_int"] = list(c.snr_surface.t_int_ns);
    k["snr_surface.V_sd"] = list(c.snr_surface.V_sd_uV);
    k["snr_surface.referenced"] = boolean(c.snr_surface.referenced);

    k["spectroscopy.detuning"] = list(c.spectroscopy.detuning_ueV);
    k["spectroscopy.bins"] = integer(c.spectroscopy.bins);
    k["spectroscopy.triplet_fraction"] = number(c.spectroscopy.triplet_fraction);

    k["t1_map.detuning"] = list(c.t1_map.detuning_ueV);
    k["t1_map.duration"] = list(c.t1_map.duration_ns);
    k["t1_map.triplet_fraction"] = number(c.t1_map.triplet_fraction);

    k["init_sweep.bias"] = list(c.init_sweep.bias_mV);
    k["init_sweep.duration"] = list(c.init_sweep.duration_ns);

    k["blind_rb.lengths"] = int_list(c.blind_rb.lengths);
    k["blind_rb.sequences"] = integer(c.blind_rb.sequences);
    k["blind_rb.shots"] = integer(c.blind_rb.shots);

    k["exchange.spam_infidelity"] = number(c.exchange.spam_infidelity);
    k["exchange.points"] = integer(c.exchange.points);
    k["exchange.turns"] = number(c.exchange.turns);
    k["exchange.shots"] = integer(c.exchange.shots);
    k["exchange.input_singlet"] = number(c.exchange.input_singlet);
    return k;
}

void check_grid(std::vector<std::string>& out, const std::string& key, const std::vector<double>& g,
                std::size_t min_points, bool positive, bool increasing) {
    if (g.size() < min_points) out.push_back(fmt::format("{} needs at least {} points", key, min_points));
    if (positive && std::any_of(g.begin(), g.end(), [](double x) { return !(x > 0.0); }))
        out.push_back(key + " values must be > 0");
    if (std::any_of(g.begin(), g.end(), [](double x) { return !std::isfinite(x); }))
        out.push_back(key + " values must be finite");
    if (increasing && std::adjacent_find(g.begin(), g.end(), std::greater_equal<>()) != g.end())
        out.push_back(key + " must be strictly increasing");
}

void append(std::vector<std::string>& out, const std::vector<std::string>& more) {
    out.insert(out.end(), more.begin(), more.end());
}

}  // namespace

ParsedConfig parse_config(std::string_view text, const std::string& origin) {
    ParsedConfig parsed;
    parsed.text = std::string(text);
    std::vector<Entry> entries;
    {
        std::istringstream in(parsed.text);
        std::string line;
        int n = 0;
        while (std::getline(in, line)) {
            ++n;
            if (auto e = LineParser(line, n, origin).parse()) entries.push_back(std::move(*e));
        }
    }

    ExperimentConfig& c = parsed.config;
    auto keys = fixed_keys(c);
    static const std::regex hot_spot(R"(landscape\.hot_spots\[(\d+)\]\.(center|width|depth))");
    static const std::regex white(R"(readout\.white\.([A-Za-z_][A-Za-z0-9_]*))");

    std::set<std::string> seen;
    bool white_reset = false;
    auto report = [&](const Entry& e, const std::string& msg) {
        parsed.violations.push_back(fmt::format("{}: {} {}", where(e.value), e.key, msg));
    };
    for (const auto& e : entries) {
        if (!seen.insert(e.key).second) {
            report(e, "is set more than once");
            continue;
        }
        std::smatch m;
        std::optional<std::string> err;
        if (auto it = keys.find(e.key); it != keys.end()) {
            err = it->second(e.value);
        } else if (std::regex_match(e.key, m, hot_spot)) {
            const std::size_t idx = std::stoul(m[1].str());
            if (idx > 64) {
                report(e, "index out of range");
                continue;
            }
            auto& spots = c.landscape.hot_spots;
            if (spots.size() <= idx) spots.resize(idx + 1);
            auto& h = spots[idx];
            if (m[2] == "center") err = optional_number(h.center_ueV, "auto")(e.value);
            else if (m[2] == "width") err = number(h.width_ueV)(e.value);
            else err = number(h.depth_ms)(e.value);
        } else if (std::regex_match(e.key, m, white)) {
            if (!white_reset) {
                c.readout.white_sources.clear();
                white_reset = true;
            }
            WhiteSource src{m[1].str(), 0.0};
            err = number(src.density_pV_rtHz)(e.value);
            if (!err) c.readout.white_sources.push_back(src);
        } else {
            report(e, "is not a known key");
            continue;
        }
        if (err) report(e, *err);
    }
    append(parsed.violations, validate(c));
    return parsed;
}

ParsedConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read config file " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.string());
}

std::vector<std::string> validate(const ExperimentConfig& c) {
    std::vector<std::string> out;
    append(out, validate(c.device, "device"));
    append(out, validate(c.readout, "readout"));
    append(out, validate(c.landscape, "landscape"));
    append(out, validate(c.init, "init"));
    append(out, validate(c.mapping, "mapping"));
    append(out, validate(c.channel, "channel"));

    auto prob = [&](const std::string& key, double v) {
        if (!(v >= 0.0 && v <= 1.0)) out.push_back(key + " must lie in [0, 1]");
    };
    if (c.budget.boltzmann_quoted) prob("budget.boltzmann_quoted", *c.budget.boltzmann_quoted);
    if (c.budget.compare) prob("budget.compare", *c.budget.compare);
    if (c.run.shots < 1) out.push_back("run.shots must be >= 1");
    if (c.run.out.empty()) out.push_back("run.out must not be empty");

    check_grid(out, "snr_surface.t_int", c.snr_surface.t_int_ns, 1, true, false);
    check_grid(out, "snr_surface.V_sd", c.snr_surface.V_sd_uV, 1, true, false);
    check_grid(out, "spectroscopy.detuning", c.spectroscopy.detuning_ueV, 1, false, true);
    if (c.spectroscopy.bins < 2) out.push_back("spectroscopy.bins must be >= 2");
    prob("spectroscopy.triplet_fraction", c.spectroscopy.triplet_fraction);

    check_grid(out, "t1_map.detuning", c.t1_map.detuning_ueV, 1, false, false);
    check_grid(out, "t1_map.duration", c.t1_map.duration_ns, 3, false, true);
    if (!c.t1_map.duration_ns.empty() && c.t1_map.duration_ns.front() < 0.0)
        out.push_back("t1_map.duration values must be >= 0");
    prob("t1_map.triplet_fraction", c.t1_map.triplet_fraction);

    check_grid(out, "init_sweep.bias", c.init_sweep.bias_mV, 1, false, false);
    check_grid(out, "init_sweep.duration", c.init_sweep.duration_ns, 1, false, false);
    const auto& dur = c.init_sweep.duration_ns;
    if (!std::is_sorted(dur.begin(), dur.end())) out.push_back("init_sweep.duration must be nondecreasing");
    if (!dur.empty() && dur.front() < 0.0) out.push_back("init_sweep.duration values must be >= 0");

    const std::set<int> lengths(c.blind_rb.lengths.begin(), c.blind_rb.lengths.end());
    if (lengths.size() < 3) out.push_back("blind_rb.lengths needs at least 3 distinct lengths");
    if (!lengths.empty() && *lengths.begin() < 1) out.push_back("blind_rb.lengths must be >= 1");
    if (c.blind_rb.sequences < 1) out.push_back("blind_rb.sequences must be >= 1");
    if (c.blind_rb.shots < 1) out.push_back("blind_rb.shots must be >= 1");

    if (!(c.exchange.spam_infidelity >= 0.0 && c.exchange.spam_infidelity <= 0.375))
        out.push_back("exchange.spam_infidelity must lie in [0, 0.375]");
    if (c.exchange.points < 3) out.push_back("exchange.points must be >= 3");
    if (!(c.exchange.turns >= 1.0)) out.push_back("exchange.turns must be >= 1");
    if (c.exchange.shots < 1) out.push_back("exchange.shots must be >= 1");
    prob("exchange.input_singlet", c.exchange.input_singlet);
    return out;
}

nlohmann::json to_json(const ExperimentConfig& c) {
    using nlohmann::json;
    auto opt = [](const std::optional<double>& v, const char* none) { return v ? json(*v) : json(none); };
    json j;
    const auto& d = c.device;
    j["device"] = {{"E_o", d.E_o_ueV}, {"E_v", d.E_v_ueV}, {"E_v_gauge", d.E_v_gauge_ueV}, {"T_e", d.T_e_mK},
                   {"B", d.B_mT},      {"t_c", d.t_c_ueV}, {"g_factor", d.g_factor}};
    const auto& r = c.readout;
    json white = json::object();
    for (const auto& w : r.white_sources) white[w.name] = w.density_pV_rtHz;
    j["readout"] = {{"R_s", r.R_s_kOhm},
                    {"C_p", r.C_p_pF},
                    {"f_mod", r.f_mod_MHz},
                    {"V_sd", r.V_sd_uV},
                    {"G_m", r.G_m_pA_per_uV},
                    {"A", r.A_uV_rtHz},
                    {"white", white},
                    {"delta_mu", r.delta_mu_uV},
                    {"t_settle", r.t_settle_us},
                    {"t_int", r.t_int_ns},
                    {"T_experiment", r.T_experiment_s},
                    {"divider", r.divider},
                    {"s2c_steepness", r.s2c_steepness},
                    {"baseline", r.baseline_current_pA},
                    {"referenced", r.referenced}};
    json spots = json::array();
    for (const auto& h : c.landscape.hot_spots)
        spots.push_back({{"center", opt(h.center_ueV, "auto")}, {"width", h.width_ueV}, {"depth", h.depth_ms}});
    j["landscape"] = {{"baseline", c.landscape.baseline_ms},
                      {"V_onset", c.landscape.V_onset_uV},
                      {"cubic", c.landscape.cubic_per_ms_uV3},
                      {"hot_spots", spots}};
    const auto& i = c.init;
    j["init"] = {{"boundary", to_string(i.boundary)},
                 {"gamma0", i.gamma0_per_us},
                 {"barrier_factor", i.barrier_factor},
                 {"flush", i.flush_ns},
                 {"offset", i.offset_mV},
                 {"lever", i.lever_ueV_per_mV},
                 {"drift_amplitude", i.drift_amplitude_mV},
                 {"drift_tau", i.drift_tau_ns},
                 {"boundary_10_20", i.boundary_10_20_mV},
                 {"boundary_20_30", i.boundary_20_30_mV},
                 {"dephased_triplet_fraction", i.dephased_triplet_fraction}};
    const auto& m = c.mapping;
    j["mapping"] = {{"init", m.init_ueV},         {"entry_out", m.entry_out_ueV}, {"entry_in", m.entry_in_ueV},
                    {"idle", m.idle_ueV},         {"measure", m.measure_ueV},     {"ramp", m.ramp_ns},
                    {"dwell", m.dwell_ns},        {"T2_idle", m.T2_idle_ns},      {"J_scale", m.J_scale_ueV},
                    {"readout_t_int", m.readout_t_int_ns}, {"shots", m.shots}};
    const auto& ch = c.channel;
    j["channel"] = {{"depolarizing", ch.depolarizing},
                    {"leak_in", ch.leak_in},
                    {"leak_out", ch.leak_out},
                    {"init_error", ch.init_error},
                    {"measure_error", ch.measure_error},
                    {"mapping_error", ch.mapping_error},
                    {"init_leak", ch.init_leak},
                    {"gauge_excited", ch.gauge_excited},
                    {"leak_reads_triplet", ch.leak_reads_triplet},
                    {"leak_reads_as_prepared", ch.leak_reads_as_prepared}};
    j["budget"] = {{"boltzmann_quoted", opt(c.budget.boltzmann_quoted, "exact")},
                   {"compare", opt(c.budget.compare, "none")}};
    j["run"] = {{"seed", c.run.seed}, {"shots", c.run.shots}, {"out", c.run.out}};
    j["snr_surface"] = {{"t_int", c.snr_surface.t_int_ns},
                        {"V_sd", c.snr_surface.V_sd_uV},
                        {"referenced", c.snr_surface.referenced}};
    j["spectroscopy"] = {{"detuning", c.spectroscopy.detuning_ueV},
                         {"bins", c.spectroscopy.bins},
                         {"triplet_fraction", c.spectroscopy.triplet_fraction}};
    j["t1_map"] = {{"detuning", c.t1_map.detuning_ueV},
                   {"duration", c.t1_map.duration_ns},
                   {"triplet_fraction", c.t1_map.triplet_fraction}};
    j["init_sweep"] = {{"bias", c.init_sweep.bias_mV}, {"duration", c.init_sweep.duration_ns}};
    j["blind_rb"] = {{"lengths", c.blind_rb.lengths},
                     {"sequences", c.blind_rb.sequences},
                     {"shots", c.blind_rb.shots}};
    j["exchange"] = {{"spam_infidelity", c.exchange.spam_infidelity},
                     {"points", c.exchange.points},
                     {"turns", c.exchange.turns},
                     {"shots", c.exchange.shots},
                     {"input_singlet", c.exchange.input_singlet}};
    return j;
}

}  // namespace spamsim

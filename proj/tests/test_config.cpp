#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "json.hpp"
#include "spamsim/config.hpp"
#include "spamsim/experiments.hpp"

using namespace spamsim;
namespace fs = std::filesystem;

namespace {

fs::path source_dir() {
    const char* s = std::getenv("SPAMSIM_SOURCE_DIR");
    return s ? fs::path(s) : fs::current_path();
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

bool has(const std::vector<std::string>& v, const std::string& needle) {
    return std::any_of(v.begin(), v.end(), [&](const std::string& s) { return s.find(needle) != std::string::npos; });
}

int run_cli(const std::string& args) {
    const char* cli = std::getenv("SPAMSIM_CLI");
    REQUIRE(cli != nullptr);
    const std::string cmd = std::string(cli) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("spamsim_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

}  // namespace

TEST_CASE("shipped configs validate") {
    for (const char* name : {"default.conf", "tradeoff.conf"}) {
        const ParsedConfig p = load_config(source_dir() / "configs" / name);
        CHECK_MESSAGE(p.violations.empty(), name);
    }
    const ParsedConfig p = load_config(source_dir() / "configs" / "default.conf");
    CHECK(p.config.readout.delta_mu_uV == 355.0);
    REQUIRE(p.config.landscape.hot_spots.size() == 1);
    CHECK(*p.config.landscape.hot_spots[0].center_ueV == -30.0);
    CHECK(p.config.init.boundary == ChargeBoundary::b20_30);
    CHECK(p.config.budget.boltzmann_quoted == 5e-4);
    CHECK_FALSE(p.config.budget.compare.has_value());
}

TEST_CASE("values and grids") {
    const ParsedConfig p = parse_config(
        "device.T_e = 100  # mK\n"
        "snr_surface.t_int = linspace(100, 300, 3)\n"
        "snr_surface.V_sd = geomspace(1, 100, 3)\n"
        "spectroscopy.detuning = [-10, 0, 1e1]\n"
        "readout.referenced = true\n"
        "init.boundary = \"1,0-2,0\"\n"
        "landscape.hot_spots[1].center = auto\n"
        "landscape.hot_spots[0].center = 12\n"
        "readout.white.amp = 100\n"
        "budget.boltzmann_quoted = exact\n"
        "budget.compare = 2.5e-3\n");
    CHECK(p.violations.empty());
    const auto& c = p.config;
    CHECK(c.device.T_e_mK == 100.0);
    CHECK(c.snr_surface.t_int_ns == std::vector<double>{100, 200, 300});
    REQUIRE(c.snr_surface.V_sd_uV.size() == 3);
    CHECK(c.snr_surface.V_sd_uV[1] == doctest::Approx(10.0));
    CHECK(c.spectroscopy.detuning_ueV == std::vector<double>{-10, 0, 10});
    CHECK(c.readout.referenced);
    CHECK(c.init.boundary == ChargeBoundary::b10_20);
    REQUIRE(c.landscape.hot_spots.size() == 2);
    CHECK_FALSE(c.landscape.hot_spots[1].center_ueV.has_value());
    CHECK(*c.landscape.hot_spots[0].center_ueV == 12.0);
    REQUIRE(c.readout.white_sources.size() == 1);
    CHECK(c.readout.white_sources[0].density_pV_rtHz == 100.0);
    CHECK_FALSE(c.budget.boltzmann_quoted.has_value());
    CHECK(c.budget.compare == 2.5e-3);
}

TEST_CASE("every violation is reported with its field") {
    const ParsedConfig p = parse_config(
        "device.T_e = -5\n"
        "device.bogus = 3\n"
        "device.E_o = 160\n"
        "device.E_o = 161\n"
        "t1_map.duration = [5]\n"
        "device.t_c = \"x\"\n",
        "bad.conf");
    CHECK(p.violations.size() == 5);
    CHECK(has(p.violations, "device.T_e must be > 0"));
    CHECK(has(p.violations, "line 2, col 16: device.bogus is not a known key"));
    CHECK(has(p.violations, "device.E_o is set more than once"));
    CHECK(has(p.violations, "t1_map.duration needs at least 3 points"));
    CHECK(has(p.violations, "device.t_c expects a number"));
}

TEST_CASE("syntax errors carry line and column") {
    try {
        (void)parse_config("device.E_o = 1\n\ndevice.t_c = 2 3\n", "x.conf");
        FAIL("expected a syntax error");
    } catch (const ConfigSyntaxError& e) {
        CHECK(e.line() == 3);
        CHECK(e.column() == 16);
        CHECK(std::string(e.what()).find("x.conf:3:16") == 0);
    }
    CHECK_THROWS_AS(parse_config("device.E_o 1\n"), ConfigSyntaxError);
    CHECK_THROWS_AS(parse_config("x = [1, 2\n"), ConfigSyntaxError);
    CHECK_THROWS_AS(parse_config("x = linspace(0, 1, 1)\n"), ConfigSyntaxError);
    CHECK_THROWS_AS(parse_config("x = \"open\n"), ConfigSyntaxError);
}

TEST_CASE("json echo") {
    const ParsedConfig p = load_config(source_dir() / "configs" / "default.conf");
    const nlohmann::json j = to_json(p.config);
    CHECK(j["device"]["T_e"] == 220.0);
    CHECK(j["run"]["seed"] == 20240601);
    CHECK(to_json(p.config).dump() == j.dump());
}

TEST_CASE("cli exit codes") {
    const fs::path conf = source_dir() / "configs" / "default.conf";
    const fs::path dir = scratch("exit");
    CHECK(run_cli("validate " + conf.string()) == 0);
    std::ofstream(dir / "bad.conf") << "device.T_e = -5\n";
    CHECK(run_cli("validate " + (dir / "bad.conf").string()) == 2);
    std::ofstream(dir / "syntax.conf") << "device.T_e = 1 2\n";
    CHECK(run_cli("validate " + (dir / "syntax.conf").string()) == 2);
    CHECK(run_cli("run nonsense --config " + conf.string()) == 1);
    CHECK(run_cli("frobnicate") == 1);
    CHECK(run_cli("budget --config " + conf.string() + " --compare 2.5e-3") == 0);
    CHECK(run_cli("budget --config " + conf.string() + " --compare 7") == 1);
    fs::remove_all(dir);
}

TEST_CASE("outputs are byte-identical for the same config and seed") {
    const fs::path conf = source_dir() / "configs" / "default.conf";
    const fs::path a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
    // Same output path both times: the resolved config echoes it.
    auto run_all = [&] {
        for (const auto& name : kExperimentNames)
            REQUIRE(run_cli("run " + name + " --config " + conf.string() + " --out " + a.string()) == 0);
    };
    run_all();
    fs::copy(a, b, fs::copy_options::recursive | fs::copy_options::overwrite_existing);
    fs::remove_all(a);
    run_all();
    REQUIRE(run_cli("run blind-rb --config " + conf.string() + " --seed 7 --out " + c.string()) == 0);
    std::size_t files = 0;
    for (const auto& entry : fs::directory_iterator(a)) {
        const fs::path other = b / entry.path().filename();
        REQUIRE(fs::exists(other));
        CHECK_MESSAGE(read_file(entry.path()) == read_file(other), entry.path().filename().string());
        ++files;
    }
    CHECK(files >= 20);
    CHECK(read_file(a / "blind_rb.csv") != read_file(c / "blind_rb.csv"));
    CHECK(read_file(a / "config.conf") == read_file(conf));
    const auto summary = nlohmann::json::parse(read_file(a / "budget_summary.json"));
    CHECK(summary.contains("report"));
    fs::remove_all(a);
    fs::remove_all(b);
    fs::remove_all(c);
}

TEST_CASE("unknown experiment from the library") {
    const ParsedConfig p = load_config(source_dir() / "configs" / "default.conf");
    CHECK_THROWS_AS(run_experiment("nope", p.config, scratch("unknown")), UnknownExperimentError);
}

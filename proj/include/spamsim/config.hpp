#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "spamsim/benchmarking.hpp"
#include "spamsim/initialization.hpp"
#include "spamsim/mapping.hpp"
#include "spamsim/readout.hpp"
#include "spamsim/relaxation.hpp"
#include "spamsim/spectrum.hpp"

namespace spamsim {

struct RunSettings {
    std::uint64_t seed = 1;
    std::size_t shots = 10000;
    std::string out = "results";
};

struct SnrSurfaceSettings {
    std::vector<double> t_int_ns{250, 500, 980, 2000, 4000, 8000};
    std::vector<double> V_sd_uV{10, 25, 50, 75, 100, 150};
    bool referenced = false;
};

struct SpectroscopySettings {
    std::vector<double> detuning_ueV{-40, 0, 40, 80, 120, 160, 200};
    std::size_t bins = 80;
    double triplet_fraction = 0.5;
};

struct T1MapSettings {
    std::vector<double> detuning_ueV{0, 40, 80, 120, 160};
    std::vector<double> duration_ns{0, 1e6, 2e6, 5e6, 1e7, 2e7, 5e7};
    double triplet_fraction = 0.5;
};

struct InitSweepSettings {
    std::vector<double> bias_mV{-3, -2, -1, 0, 1, 2, 3};
    std::vector<double> duration_ns{0, 10, 30, 100, 300, 1000};
};

struct BlindRbSettings {
    std::vector<int> lengths{1, 2, 4, 8, 16, 32, 64, 128, 256, 512};
    std::size_t sequences = 100;
    std::size_t shots = 100;
};

struct ExchangeSettings {
    double spam_infidelity = 2.8e-3;
    std::size_t points = 400;
    double turns = 2.0;
    std::size_t shots = 100000;
    double input_singlet = 1.0;
};

struct BudgetSettings {
    std::optional<double> boltzmann_quoted;
    std::optional<double> compare;
};

struct ExperimentConfig {
    DeviceParams device;
    ChainParams readout;
    T1Landscape landscape;
    InitConfig init;
    MappingParams mapping;
    ChannelModel channel;
    BudgetSettings budget;
    RunSettings run;
    SnrSurfaceSettings snr_surface;
    SpectroscopySettings spectroscopy;
    T1MapSettings t1_map;
    InitSweepSettings init_sweep;
    BlindRbSettings blind_rb;
    ExchangeSettings exchange;
};

class ConfigSyntaxError : public std::runtime_error {
public:
    ConfigSyntaxError(std::string origin, int line, int column, const std::string& message);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

struct ParsedConfig {
    ExperimentConfig config;
    std::vector<std::string> violations;  ///< unknown keys, type errors and invariants
    std::string text;
};

/// Parses `key.path = value` lines. Syntax errors throw; every other problem
/// is collected into `violations`.
ParsedConfig parse_config(std::string_view text, const std::string& origin = "<config>");
ParsedConfig load_config(const std::filesystem::path& path);

/// Invariant check of every embedded type.
std::vector<std::string> validate(const ExperimentConfig& config);

nlohmann::json to_json(const ExperimentConfig& config);

}  // namespace spamsim

#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "spamsim/config.hpp"

namespace spamsim {

inline const std::vector<std::string> kExperimentNames = {
    "snr-surface", "spectroscopy", "t1-map", "init-sweep", "mapping", "blind-rb", "exchange", "budget"};

class UnknownExperimentError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ExperimentResult {
    std::string name;
    std::string summary;  ///< one line
    nlohmann::json report;
    std::vector<std::filesystem::path> files;
};

/// Runs one named experiment, writing CSV/JSON artifacts and a copy of the
/// config into `out_dir`. `config_text` is archived verbatim when given.
ExperimentResult run_experiment(const std::string& name, const ExperimentConfig& config,
                                const std::filesystem::path& out_dir,
                                const std::optional<std::string>& config_text = std::nullopt);

}  // namespace spamsim

#include <cstdio>
#include <fmt/format.h>
#include <iostream>

#include "CLI11.hpp"
#include "spamsim/budget.hpp"
#include "spamsim/config.hpp"
#include "spamsim/experiments.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kValidation = 2, kRuntime = 3 };

// Returns nullopt after printing the problems.
std::optional<spamsim::ParsedConfig> load(const std::string& path) {
    spamsim::ParsedConfig parsed;
    try {
        parsed = spamsim::load_config(path);
    } catch (const spamsim::ConfigSyntaxError& e) {
        std::cerr << "syntax error: " << e.what() << "\n";
        return std::nullopt;
    }
    if (!parsed.violations.empty()) {
        std::cerr << path << ": " << parsed.violations.size() << " violation(s)\n";
        for (const auto& v : parsed.violations) std::cerr << "  " << v << "\n";
        return std::nullopt;
    }
    return parsed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulator for state preparation and measurement of exchange-only spin qubits", "spamsim"};
    app.require_subcommand(1);

    std::string experiment, config_path, out_dir, validate_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> compare;

    auto* run = app.add_subcommand("run", "Run one experiment and write CSV/JSON results");
    run->add_option("experiment", experiment, "Experiment name")->required();
    run->add_option("--config", config_path, "Config file")->required();
    run->add_option("--seed", seed, "Master seed (overrides run.seed)");
    run->add_option("--out", out_dir, "Output directory (overrides run.out)");

    auto* val = app.add_subcommand("validate", "Check a config file and list every violation");
    val->add_option("file", validate_path, "Config file")->required();

    auto* bud = app.add_subcommand("budget", "Print the error budget");
    bud->add_option("--config", config_path, "Config file")->required();
    bud->add_option("--compare", compare, "Observed 1-F_BC");
    bud->add_option("--out", out_dir, "Also write budget artifacts here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*val) {
            auto parsed = load(validate_path);
            if (!parsed) return kValidation;
            std::cout << validate_path << ": ok\n";
            return kOk;
        }

        if (*run) {
            const auto& names = spamsim::kExperimentNames;
            if (std::find(names.begin(), names.end(), experiment) == names.end()) {
                std::cerr << "unknown experiment '" << experiment << "'; expected one of:";
                for (const auto& n : names) std::cerr << " " << n;
                std::cerr << "\n";
                return kUsage;
            }
            auto parsed = load(config_path);
            if (!parsed) return kValidation;
            auto& cfg = parsed->config;
            if (seed) cfg.run.seed = *seed;
            if (!out_dir.empty()) cfg.run.out = out_dir;
            const auto result = spamsim::run_experiment(experiment, cfg, cfg.run.out, parsed->text);
            std::cout << experiment << ": " << result.summary << "\n";
            return kOk;
        }

        auto parsed = load(config_path);
        if (!parsed) return kValidation;
        auto& cfg = parsed->config;
        if (compare) {
            if (!(*compare >= 0.0 && *compare <= 1.0)) {
                std::cerr << "--compare must lie in [0, 1]\n";
                return kUsage;
            }
            cfg.budget.compare = compare;
        }
        spamsim::ErrorBudget b = spamsim::assemble_budget(cfg.device, cfg.readout, cfg.landscape, cfg.mapping,
                                                          {cfg.budget.boltzmann_quoted});
        if (cfg.budget.compare) spamsim::compare_budget(b, *cfg.budget.compare);
        std::cout << spamsim::format_budget(b);
        if (b.missing && *b.missing > 0.0 && *b.missing < 0.5)
            std::cout << fmt::format("Implied gauge valley energy: {:.1f} ueV\n",
                                     spamsim::invert_missing_error(*b.missing, cfg.device.T_e_mK));
        if (!out_dir.empty()) spamsim::run_experiment("budget", cfg, out_dir, parsed->text);
        return kOk;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kRuntime;
    }
}

// kerrbath: run a scenario from a TOML config, or print its timescales.
//
//   kerrbath run config.toml [--section.key=value ...]
//   kerrbath timescales config.toml [--section.key=value ...]
//
// Exit codes: 0 ok, 1 unexpected failure, 2 config error, 3 truncation failure,
// 4 pde-check tolerance breach. Log level comes from KERRBATH_LOG_LEVEL.
#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "kerrbath/errors.hpp"
#include "kerrbath/scenario.hpp"

namespace {

enum Exit : int { ok = 0, failure = 1, config_error = 2, truncation_error = 3, tolerance_breach = 4 };

void setup_logging() {
    auto logger = spdlog::stderr_logger_st("kerrbath");
    logger->set_pattern("[%l] %v");
    spdlog::set_default_logger(logger);
    spdlog::set_level(spdlog::level::warn);
    if (const char* level = std::getenv("KERRBATH_LOG_LEVEL")) {
        spdlog::set_level(spdlog::level::from_str(level));
    }
}

// Leftover "--key=value" arguments become config overrides.
std::vector<std::string> overrides_from(const std::vector<std::string>& extras) {
    std::vector<std::string> out;
    for (const auto& arg : extras) {
        if (arg.rfind("--", 0) != 0) throw kerrbath::ConfigError("unexpected argument '" + arg + "'");
        out.push_back(arg.substr(2));
    }
    return out;
}

int run(const std::string& path, const std::vector<std::string>& extras) {
    const auto config = kerrbath::load_config(path, overrides_from(extras));
    const auto result = kerrbath::run_scenario(config);

    if (config.output.csv && *config.output.csv != "-") {
        std::ofstream csv(*config.output.csv, std::ios::binary);
        if (!csv) throw std::runtime_error("cannot write " + *config.output.csv);
        kerrbath::write_csv(csv, result.rows);
    } else {
        kerrbath::write_csv(std::cout, result.rows);
    }
    if (config.output.report) {
        std::ofstream report(*config.output.report, std::ios::binary);
        if (!report) throw std::runtime_error("cannot write " + *config.output.report);
        report << result.report.dump(2) << '\n';
    }
    return result.tolerance_breached ? tolerance_breach : ok;
}

int timescales(const std::string& path, const std::vector<std::string>& extras) {
    const auto config = kerrbath::load_config(path, overrides_from(extras));
    std::cout << kerrbath::timescales_text(config);
    return ok;
}

}  // namespace

int main(int argc, char** argv) {
    setup_logging();

    CLI::App app{"Kerr oscillator with a finite thermal bath: scenario runner"};
    app.require_subcommand(1);

    std::string run_path, ts_path;
    auto* run_cmd = app.add_subcommand("run", "run the scenario named in the config");
    run_cmd->add_option("config", run_path, "TOML config file")->required();
    run_cmd->allow_extras();
    auto* ts_cmd = app.add_subcommand("timescales", "print t_E, t_R and the recurrence times");
    ts_cmd->add_option("config", ts_path, "TOML config file")->required();
    ts_cmd->allow_extras();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : config_error;
    }

    try {
        if (*run_cmd) return run(run_path, run_cmd->remaining());
        return timescales(ts_path, ts_cmd->remaining());
    } catch (const kerrbath::ConfigError& e) {
        spdlog::error("{}", e.what());
        return config_error;
    } catch (const kerrbath::DegenerateNonlinearity& e) {
        spdlog::error("{}", e.what());
        return config_error;
    } catch (const kerrbath::TruncationTooSmall& e) {
        spdlog::error("{}", e.what());
        return truncation_error;
    } catch (const std::exception& e) {
        spdlog::error("{}", e.what());
        return failure;
    }
}

// scenario.hpp: config loading, scenario execution and output for the kerrbath CLI.
//
// A config is a TOML document:
//
//   scenario = "compare-all"   # closed | exact-open | mc | perturbative | oracle | pde-check | compare-all
//   p_max = 2                  # recurrence indices listed by `timescales`
//   [system]       omega, mu, hbar = 1, alpha_re, alpha_im = 0
//   [environment]  temperature, k_b = 1, and either modes = [{omega, g}, ...]
//                  or the identical-mode shorthand n_modes, omega_e, g
//   [grid]         t_start, t_end, n_points
//   [mc]           samples, seed, threads = 0
//   [truncation]   tail_tol, optional n_max / mu_max to pin the cutoffs
//   [pde]          h, dt, points, seed, tolerance, relative, sys_radius, bath_radius
//   [output]       csv (stdout when absent or "-"), report
//
// Overrides use dotted keys, e.g. `--system.mu=0.2` or `--scenario=mc`.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "kerrbath/analytic.hpp"

namespace kerrbath {

// Invalid or missing config content; what() carries file:line and the field name.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class Scenario { closed, exact_open, mc, perturbative, oracle, pde_check, compare_all };

[[nodiscard]] std::string_view scenario_name(Scenario s) noexcept;

struct GridSpec {
    double t_start{0.0};
    double t_end{1.0};
    std::size_t n_points{2};
};

struct McSpec {
    std::size_t samples{100000};
    std::uint64_t seed{1};
    unsigned threads{0};
};

struct TruncationConfig {
    double tail_tol{1e-12};
    std::optional<int> n_max;
    std::optional<int> mu_max;
};

struct PdeCheckSpec {
    double h{1e-4};
    double dt{1e-4};
    std::size_t points{20};
    std::uint64_t seed{1};
    double tolerance{1e-5};
    bool relative{false};
    double sys_radius{3.0};
    double bath_radius{1.5};
};

struct OutputSpec {
    std::optional<std::string> csv;
    std::optional<std::string> report;
};

struct ScenarioConfig {
    Scenario scenario{Scenario::closed};
    SystemParams system;
    EnvironmentSpec environment;  // hbar copied from the system block
    GridSpec grid;
    std::optional<McSpec> mc;
    std::optional<TruncationConfig> truncation;
    PdeCheckSpec pde;
    OutputSpec output;
    int p_max{2};
    nlohmann::json source;  // the merged config, overrides applied
};

// Parses TOML text. `origin` names the source in diagnostics. Each override is
// "dotted.key=value"; the value is read as a TOML value, or as a string if that fails.
[[nodiscard]] ScenarioConfig parse_config(std::string_view text, std::string_view origin,
                                          const std::vector<std::string>& overrides = {});

[[nodiscard]] ScenarioConfig load_config(const std::string& path,
                                         const std::vector<std::string>& overrides = {});

struct TrajectoryRow {
    double t{0.0};
    complex a{};
    complex r{1.0, 0.0};
    std::string method;
};

struct RunResult {
    std::vector<TrajectoryRow> rows;
    nlohmann::json report;
    bool tolerance_breached{false};  // pde-check only
};

// Runs the configured scenario. Library exceptions (TruncationTooSmall, ...) propagate.
[[nodiscard]] RunResult run_scenario(const ScenarioConfig& config);

inline constexpr std::string_view kCsvHeader = "t,re_a,im_a,abs_a,re_R,im_R,abs_R,phase_R,method";

// Shortest round-trip decimal form, locale independent.
[[nodiscard]] std::string format_double(double x);

// Writes the header and rows; phase_R is unwrapped within each method's run of rows.
void write_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows);

// t_E, t_R and the t_p table. Throws DegenerateNonlinearity when mu == 0.
[[nodiscard]] std::string timescales_text(const ScenarioConfig& config);

}  // namespace kerrbath

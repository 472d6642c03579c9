#include "kerrbath/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "kerrbath/errors.hpp"

namespace kerrbath {

namespace {

bool close_rel(double a, double b, double rel_tol) noexcept {
    return std::abs(a - b) <= rel_tol * std::max(std::abs(a), std::abs(b));
}

}  // namespace

EnvironmentSpec EnvironmentSpec::identical(std::size_t n_modes, double omega_e, double g,
                                           double temperature, double k_b, double hbar) {
    EnvironmentSpec env;
    env.modes.assign(n_modes, EnvMode{omega_e, g});
    env.temperature = temperature;
    env.k_b = k_b;
    env.hbar = hbar;
    return env;
}

bool EnvironmentSpec::is_identical(double rel_tol) const noexcept {
    if (modes.empty()) return true;
    const EnvMode& first = modes.front();
    return std::all_of(modes.begin(), modes.end(), [&](const EnvMode& m) {
        return close_rel(m.omega, first.omega, rel_tol) && close_rel(m.g, first.g, rel_tol);
    });
}

void validate(const SystemParams& sys) {
    if (!std::isfinite(sys.omega) || !std::isfinite(sys.mu) || !std::isfinite(sys.hbar) ||
        !std::isfinite(sys.alpha0.real()) || !std::isfinite(sys.alpha0.imag())) {
        throw std::invalid_argument("system parameters must be finite");
    }
    if (sys.hbar <= 0.0) throw std::invalid_argument("hbar must be positive");
    if (sys.omega < 0.0) throw std::invalid_argument("omega must be non-negative");
    if (sys.mu < 0.0) throw std::invalid_argument("mu must be non-negative");
}

void validate(const EnvironmentSpec& env) {
    if (!(env.temperature >= 0.0) || !std::isfinite(env.temperature)) {
        throw std::invalid_argument("temperature must be finite and non-negative");
    }
    if (!(env.k_b > 0.0)) throw std::invalid_argument("k_b must be positive");
    if (!(env.hbar > 0.0)) throw std::invalid_argument("hbar must be positive");
    for (const auto& m : env.modes) {
        if (!(m.omega > 0.0)) throw NonPositiveFrequency("bath mode frequency must be positive");
        if (!std::isfinite(m.g)) throw std::invalid_argument("bath coupling must be finite");
    }
}

void require_same_hbar(const SystemParams& sys, const EnvironmentSpec& env) {
    if (sys.hbar != env.hbar) {
        throw std::invalid_argument("system and environment disagree on hbar");
    }
}

double boltzmann_factor(double omega, const EnvironmentSpec& env) noexcept {
    if (env.temperature == 0.0) return 0.0;
    return std::exp(-env.hbar * omega / (env.k_b * env.temperature));
}

complex closed_amplitude(const SystemParams& sys, double t) noexcept {
    const double n0 = std::norm(sys.alpha0);
    const double kerr_angle = sys.mu * sys.hbar * t;
    // |alpha|^2 (e^{-2i k} - 1) = -2|alpha|^2 sin^2(k) - i |alpha|^2 sin(2k)
    const double s = std::sin(kerr_angle);
    const double log_modulus = -2.0 * n0 * s * s;
    const double phase = -(sys.omega + sys.mu * sys.hbar) * t - n0 * std::sin(2.0 * kerr_angle);
    return sys.alpha0 * std::polar(std::exp(log_modulus), phase);
}

complex decoherence_closed_form(double x, double theta) noexcept {
    if (x == 0.0) return {1.0, 0.0};
    // 1 - x e^{-i theta}, with the real part written as (1 - x) + 2x sin^2(theta/2)
    const double half = std::sin(0.5 * theta);
    const complex denom{(1.0 - x) + 2.0 * x * half * half, x * std::sin(theta)};
    return (1.0 - x) / denom;
}

complex decoherence_polar_form(double x, double theta) noexcept {
    if (x == 0.0) return {1.0, 0.0};
    const double half = std::sin(0.5 * theta);
    const double one_minus = 1.0 - x;
    // 1 - 2x cos(theta) + x^2 == (1 - x)^2 + 4x sin^2(theta/2)
    const double modulus = one_minus / std::sqrt(one_minus * one_minus + 4.0 * x * half * half);
    const double phi = -std::atan2(x * std::sin(theta), one_minus + 2.0 * x * half * half);
    return std::polar(modulus, phi);
}

complex mode_decoherence(const EnvMode& mode, const EnvironmentSpec& env, double t) noexcept {
    return decoherence_closed_form(boltzmann_factor(mode.omega, env), mode.g * t / env.hbar);
}

complex total_decoherence(const EnvironmentSpec& env, double t) noexcept {
    complex r{1.0, 0.0};
    for (const auto& mode : env.modes) r *= mode_decoherence(mode, env, t);
    return r;
}

AmplitudeSample open_amplitude(const SystemParams& sys, const EnvironmentSpec& env, double t) {
    require_same_hbar(sys, env);
    const complex r = total_decoherence(env, t);
    AmplitudeSample s;
    s.t = t;
    s.r_total = r;
    s.r_abs = std::min(std::abs(r), 1.0);
    s.r_phase = std::arg(r);
    s.a_expect = closed_amplitude(sys, t) * r;
    return s;
}

std::vector<AmplitudeSample> open_trajectory(const SystemParams& sys, const EnvironmentSpec& env,
                                             std::span<const double> times) {
    std::vector<AmplitudeSample> out;
    out.reserve(times.size());
    std::vector<double> phases;
    phases.reserve(times.size());
    for (double t : times) {
        out.push_back(open_amplitude(sys, env, t));
        phases.push_back(out.back().r_phase);
    }
    unwrap_phases(phases);
    for (std::size_t i = 0; i < out.size(); ++i) out[i].r_phase = phases[i];
    return out;
}

double gaussian_lobe(const EnvironmentSpec& env, int p, double t) {
    if (env.modes.empty()) throw std::invalid_argument("gaussian_lobe needs a non-empty bath");
    if (!env.is_identical()) throw NonIdenticalBath("gaussian_lobe needs identical bath modes");
    const EnvMode& mode = env.modes.front();
    if (mode.g == 0.0 && p != 0) {
        throw std::invalid_argument("lobe centers t_p are undefined for g == 0");
    }
    const double t_p = p == 0 ? 0.0 : 2.0 * std::numbers::pi * env.hbar * p / std::abs(mode.g);
    const double x = boltzmann_factor(mode.omega, env);
    const double n = static_cast<double>(env.modes.size());
    const double dt = t - t_p;
    const double width = x / ((1.0 - x) * (1.0 - x));
    return std::exp(-mode.g * mode.g * n * dt * dt / (2.0 * env.hbar * env.hbar) * width);
}

double gaussian_lobe_hwhm(const EnvironmentSpec& env) {
    if (env.modes.empty()) throw std::invalid_argument("gaussian_lobe needs a non-empty bath");
    if (!env.is_identical()) throw NonIdenticalBath("gaussian_lobe needs identical bath modes");
    const EnvMode& mode = env.modes.front();
    const double x = boltzmann_factor(mode.omega, env);
    const double rate = mode.g * mode.g * static_cast<double>(env.modes.size()) /
                        (2.0 * env.hbar * env.hbar) * x / ((1.0 - x) * (1.0 - x));
    if (rate == 0.0) return std::numeric_limits<double>::infinity();
    return std::sqrt(std::numbers::ln2 / rate);
}

Timescales timescales(const SystemParams& sys, const EnvironmentSpec& env, int p_max) {
    if (sys.mu == 0.0) {
        throw DegenerateNonlinearity("t_E and t_R are undefined without nonlinearity (mu == 0)");
    }
    Timescales ts;
    ts.t_ehrenfest = 1.0 / (2.0 * sys.hbar * sys.mu * std::abs(sys.alpha0));
    ts.t_revival = std::numbers::pi / (sys.hbar * sys.mu);
    if (!env.modes.empty() && env.is_identical() && env.modes.front().g != 0.0) {
        const double g = std::abs(env.modes.front().g);
        for (int p = 0; p <= p_max; ++p) {
            ts.recurrence_times.push_back(2.0 * std::numbers::pi * env.hbar * p / g);
        }
    }
    return ts;
}

void unwrap_phases(std::span<double> phases) noexcept {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    double offset = 0.0;
    for (std::size_t i = 1; i < phases.size(); ++i) {
        const double raw = phases[i] + offset;
        const double jump = raw - phases[i - 1];
        const double turns = std::round(jump / two_pi);
        offset -= turns * two_pi;
        phases[i] = raw - turns * two_pi;
    }
}

std::vector<double> linspace(double t_start, double t_end, std::size_t n_points) {
    std::vector<double> grid(n_points);
    if (n_points == 1) {
        grid[0] = t_start;
        return grid;
    }
    const double step = (t_end - t_start) / static_cast<double>(n_points - 1);
    for (std::size_t i = 0; i < n_points; ++i) {
        grid[i] = t_start + step * static_cast<double>(i);
    }
    grid.back() = t_end;
    return grid;
}

}  // namespace kerrbath

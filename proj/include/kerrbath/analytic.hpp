// analytic.hpp: closed-form dynamics of the Kerr oscillator with a
// density-density coupled thermal bath.
//
// The coherent amplitude factorizes as <a(t)> = alpha(t) * R(t): alpha(t) is the
// isolated nonlinear-oscillator amplitude and R(t) = prod_j R_j(t) collects the
// per-mode dephasing of the bath. Everything here is a pure function.
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace kerrbath {

using complex = std::complex<double>;

// H_S = hbar*omega*n + mu*hbar^2*n^2, initial state |alpha0>.
struct SystemParams {
    double omega{1.0};
    double mu{0.0};
    double hbar{1.0};
    complex alpha0{0.0, 0.0};

    // Action of the linear classical oscillator, J = hbar*|alpha0|^2.
    [[nodiscard]] double action() const noexcept { return hbar * std::norm(alpha0); }
};

// One bath oscillator: hbar*omega_j*b^dag b, coupled through g_j * n * n_j.
struct EnvMode {
    double omega{1.0};
    double g{0.0};
};

struct EnvironmentSpec {
    std::vector<EnvMode> modes;
    double temperature{0.0};
    double k_b{1.0};
    double hbar{1.0};  // must match SystemParams::hbar when both are supplied

    // N modes sharing omega_e and g.
    static EnvironmentSpec identical(std::size_t n_modes, double omega_e, double g,
                                     double temperature, double k_b = 1.0, double hbar = 1.0);

    [[nodiscard]] std::size_t size() const noexcept { return modes.size(); }
    [[nodiscard]] bool is_identical(double rel_tol = 1e-12) const noexcept;
};

struct AmplitudeSample {
    double t{0.0};
    complex a_expect{};
    complex r_total{1.0, 0.0};
    double r_abs{1.0};
    double r_phase{0.0};  // unwrapped when produced by open_trajectory
};

struct Timescales {
    double t_ehrenfest{0.0};
    double t_revival{0.0};
    std::vector<double> recurrence_times;
};

// Throws std::invalid_argument on hbar <= 0, omega < 0, mu < 0 or non-finite fields.
void validate(const SystemParams& sys);
// Throws std::invalid_argument on T < 0, k_b <= 0, hbar <= 0 or omega_j <= 0.
void validate(const EnvironmentSpec& env);
// Throws std::invalid_argument when sys.hbar != env.hbar.
void require_same_hbar(const SystemParams& sys, const EnvironmentSpec& env);

// x = exp(-hbar*omega/(k_B*T)); T == 0 gives exactly 0.
[[nodiscard]] double boltzmann_factor(double omega, const EnvironmentSpec& env) noexcept;

// alpha(t) = alpha0 exp[-i(omega + mu*hbar)t] exp[|alpha0|^2 (exp(-2i*mu*hbar*t) - 1)]
[[nodiscard]] complex closed_amplitude(const SystemParams& sys, double t) noexcept;

// Two algebraically identical evaluations of the per-mode factor for Boltzmann
// factor x and dephasing angle theta = g*t/hbar:
//   closed form:  (1 - x) / (1 - x e^{-i theta})
//   polar form:   |R| = (1 - x)/sqrt(1 - 2x cos(theta) + x^2),
//                 phi = -atan2(x sin(theta), 1 - x cos(theta))
[[nodiscard]] complex decoherence_closed_form(double x, double theta) noexcept;
[[nodiscard]] complex decoherence_polar_form(double x, double theta) noexcept;

[[nodiscard]] complex mode_decoherence(const EnvMode& mode, const EnvironmentSpec& env,
                                       double t) noexcept;
[[nodiscard]] complex total_decoherence(const EnvironmentSpec& env, double t) noexcept;

[[nodiscard]] AmplitudeSample open_amplitude(const SystemParams& sys, const EnvironmentSpec& env,
                                             double t);

// open_amplitude on a grid with the phase of R unwrapped along the grid order.
[[nodiscard]] std::vector<AmplitudeSample> open_trajectory(const SystemParams& sys,
                                                           const EnvironmentSpec& env,
                                                           std::span<const double> times);

// Large-N approximation of |R(t)| near t_p = 2*pi*hbar*p/g for an identical-mode bath:
//   R_p(t) = exp[-g^2 N (t - t_p)^2 / (2 hbar^2) * x/(1 - x)^2].
// No validity window is enforced; the approximation is only meaningful close to t_p.
// Throws NonIdenticalBath if the modes differ, std::invalid_argument for an empty
// bath or for g == 0 with p != 0.
[[nodiscard]] double gaussian_lobe(const EnvironmentSpec& env, int p, double t);

// Half width at half maximum of each Gaussian lobe (infinite when the exponent vanishes).
[[nodiscard]] double gaussian_lobe_hwhm(const EnvironmentSpec& env);

// t_E = 1/(2 hbar mu |alpha0|), t_R = pi/(hbar mu), t_p = 2 pi hbar p / g for p = 0..p_max.
// recurrence_times is empty unless the bath is non-empty, identical and g != 0.
// Throws DegenerateNonlinearity when mu == 0.
[[nodiscard]] Timescales timescales(const SystemParams& sys, const EnvironmentSpec& env,
                                    int p_max);

// Shifts each phase by a multiple of 2*pi so consecutive jumps lie in [-pi, pi].
void unwrap_phases(std::span<double> phases) noexcept;

// Uniform grid of n_points values from t_start to t_end inclusive.
[[nodiscard]] std::vector<double> linspace(double t_start, double t_end, std::size_t n_points);

}  // namespace kerrbath

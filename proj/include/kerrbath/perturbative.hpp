// perturbative.hpp: second-order (Born) treatment of the bath coupling.
//
// The reduced master equation to second order in H_int is
//   d rho/dt = -i[(omega + d_omega) n + mu hbar n^2, rho] + t*gamma (2 n rho n - n^2 rho - rho n^2)
// with d_omega = (1/hbar) sum_j g_j <n_j> and gamma = (1/hbar^2) sum_j g_j^2 Var(n_j).
// Its solution gives <a(t)> = exp(-gamma t^2/2) exp(-i d_omega t) alpha(t).
//
// Variance convention: Var(n_j) is the thermal number variance n_bar (n_bar + 1),
// which is what the short-time expansion of the exact |R_j(t)| produces. Treating
// x_j = g_j |beta_j|^2 as an exponential random variable would instead give
// g_j^2 n_bar^2; that value does not reproduce the exact quadratic decay and is
// not used.
#pragma once

#include <complex>
#include <span>

#include "kerrbath/analytic.hpp"

namespace kerrbath {

struct PerturbativeCoeffs {
    double delta_omega{0.0};
    double gamma{0.0};
    // Time at which (t/hbar) |alpha0|^2 sum_j g_j n_bar_j reaches 1; infinite if the sum vanishes.
    double validity_time{0.0};
};

// Mean and cumulative variance of Y = sum_j g_j |beta_j|^2.
struct CltSummary {
    double y_bar{0.0};
    double b_sq_total{0.0};
};

[[nodiscard]] PerturbativeCoeffs perturbative_coeffs(const EnvironmentSpec& env,
                                                     const SystemParams& sys);

[[nodiscard]] CltSummary clt_summary(const EnvironmentSpec& env);

// exp(-gamma t^2/2) exp(-i d_omega t) alpha(t)
[[nodiscard]] complex short_time_amplitude(const SystemParams& sys, const EnvironmentSpec& env,
                                           double t);

// First-order environment factor exp[-(i t/hbar) sum_j g_j |beta_j|^2]; unit modulus.
// Throws DimensionMismatch if betas.size() differs from the number of modes.
[[nodiscard]] complex first_order_fbeta(std::span<const complex> betas, const EnvironmentSpec& env,
                                        const SystemParams& sys, double t);

// Gaussian (central-limit) reduction exp(-i y_bar t/hbar) exp(-B_N^2 t^2/(2 hbar^2)).
[[nodiscard]] complex clt_decoherence(const EnvironmentSpec& env, const SystemParams& sys,
                                      double t);

}  // namespace kerrbath

// pde.hpp: finite-difference evaluation of the c-number evolution operators for
// coherent-state expectation values, and residual checks of ∂f/∂t = K f.
//
// A field f(u, v, {w_j}, {w̄_j}; t) treats u = alpha, v = alpha*, w_j = beta_j and
// w̄_j = beta_j* as independent complex variables. All built-in fields are entire in
// each variable, so derivatives are taken with real-axis central differences.
// Wherever the operators contain |alpha|^2 or |beta_j|^2 the product u*v (w_j*w̄_j)
// is used.
//
//   K_alpha = i(omega + hbar mu + 2 hbar mu uv)(v d_v - u d_u) + i hbar mu (v^2 d_v^2 - u^2 d_u^2)
//   K_beta  = i sum_j omega_j (w̄_j d_w̄j - w_j d_wj)
//   K_int1  = (i/hbar)(sum_j g_j w_j w̄_j)(v d_v - u d_u)
//   K_int2  = (i/hbar) uv sum_j g_j (w̄_j d_w̄j - w_j d_wj)
//   K_int3  = (i/hbar) sum_j g_j (v d_v w̄_j d_w̄j - u d_u w_j d_wj)
#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "kerrbath/analytic.hpp"

namespace kerrbath {

struct FieldPoint {
    complex u{};
    complex v{};
    std::vector<complex> w;
    std::vector<complex> wbar;
    double t{0.0};

    [[nodiscard]] std::size_t n_env_modes() const noexcept { return w.size(); }
};

struct CNumberField {
    std::function<complex(const FieldPoint&)> eval;
    std::size_t n_env_modes{0};

    complex operator()(const FieldPoint& p) const { return eval(p); }
};

// Central-difference steps. With `relative` set the step along a coordinate c is
// h * max(1, |c|); the time step is always dt.
struct StencilSpec {
    double h{1e-4};
    double dt{1e-4};
    bool relative{true};
};

struct ResidualReport {
    std::size_t points{0};
    double max_abs_residual{0.0};
    double max_rel_residual{0.0};
};

// Individual pieces of the open-system operator, each applied to f at p.
[[nodiscard]] complex apply_K_alpha(const CNumberField& f, const FieldPoint& p,
                                    const SystemParams& sys, const StencilSpec& stencil);
[[nodiscard]] complex apply_K_beta(const CNumberField& f, const FieldPoint& p,
                                   const EnvironmentSpec& env, const StencilSpec& stencil);
[[nodiscard]] complex apply_K_int(const CNumberField& f, const FieldPoint& p,
                                  const SystemParams& sys, const EnvironmentSpec& env,
                                  const StencilSpec& stencil);

// Closed-system operator (K_alpha). Throws DimensionMismatch if p carries bath coordinates.
[[nodiscard]] complex apply_K_closed(const CNumberField& f, const FieldPoint& p,
                                     const SystemParams& sys, const StencilSpec& stencil);

// K_alpha + K_beta + K_int. Throws DimensionMismatch unless p and f carry one
// coordinate pair per bath mode.
[[nodiscard]] complex apply_K_open(const CNumberField& f, const FieldPoint& p,
                                   const SystemParams& sys, const EnvironmentSpec& env,
                                   const StencilSpec& stencil);

// Centered time derivative of f at p.
[[nodiscard]] complex time_derivative(const CNumberField& f, const FieldPoint& p,
                                      const StencilSpec& stencil);

// |∂_t f - K f| with the closed operator when the bath is empty.
[[nodiscard]] double pde_residual(const CNumberField& f, const FieldPoint& p,
                                  const SystemParams& sys, const EnvironmentSpec& env,
                                  const StencilSpec& stencil);

// f_alpha = u e^{-i(omega + mu hbar)t} exp[uv(e^{-2i mu hbar t} - 1)]
[[nodiscard]] CNumberField closed_solution_field(const SystemParams& sys);
// Analytic ∂_t of closed_solution_field.
[[nodiscard]] complex closed_solution_time_derivative(const SystemParams& sys,
                                                      const FieldPoint& p);

// f_beta = prod_j exp[-w_j w̄_j (1 - e^{-i g_j t/hbar})]
[[nodiscard]] CNumberField bath_solution_field(const EnvironmentSpec& env);

// f = f_alpha * f_beta
[[nodiscard]] CNumberField open_solution_field(const SystemParams& sys, const EnvironmentSpec& env);
// Analytic ∂_t of open_solution_field.
[[nodiscard]] complex open_solution_time_derivative(const SystemParams& sys,
                                                    const EnvironmentSpec& env,
                                                    const FieldPoint& p);

// Builds f_alpha * f_beta for (sys, env) and reports the PDE residual over grid.
// max_rel_residual divides by max(|∂_t f|, rel_floor). Throws std::invalid_argument
// for an empty grid.
[[nodiscard]] ResidualReport verify_exact_solution(const SystemParams& sys,
                                                   const EnvironmentSpec& env,
                                                   std::span<const FieldPoint> grid,
                                                   const StencilSpec& stencil,
                                                   double rel_floor = 1e-12);

// Residual report for an arbitrary field (used for negative controls).
[[nodiscard]] ResidualReport residual_report(const CNumberField& f, const SystemParams& sys,
                                             const EnvironmentSpec& env,
                                             std::span<const FieldPoint> grid,
                                             const StencilSpec& stencil,
                                             double rel_floor = 1e-12);

// `count` points with u, v, w_j, w̄_j drawn independently and uniformly from discs of
// radius `system_radius` / `bath_radius` and t uniform in [t_min, t_max].
[[nodiscard]] std::vector<FieldPoint> random_field_points(std::size_t count, std::size_t n_modes,
                                                          double system_radius,
                                                          double bath_radius, double t_min,
                                                          double t_max, std::uint64_t seed);

}  // namespace kerrbath

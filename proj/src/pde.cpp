#include "kerrbath/pde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>

#include "kerrbath/errors.hpp"

namespace kerrbath {

namespace {

constexpr complex I{0.0, 1.0};

// Coordinate index: 0 = u, 1 = v, 2 + 2j = w_j, 3 + 2j = w̄_j.
complex& coord(FieldPoint& p, std::size_t c) {
    if (c == 0) return p.u;
    if (c == 1) return p.v;
    const std::size_t j = (c - 2) / 2;
    return (c % 2 == 0) ? p.w[j] : p.wbar[j];
}

std::size_t w_index(std::size_t j) { return 2 + 2 * j; }
std::size_t wbar_index(std::size_t j) { return 3 + 2 * j; }

double step_for(const StencilSpec& s, complex value) {
    return s.relative ? s.h * std::max(1.0, std::abs(value)) : s.h;
}

complex shifted(const CNumberField& f, FieldPoint& p, std::size_t c, double delta) {
    complex& x = coord(p, c);
    const complex saved = x;
    x = saved + delta;
    const complex value = f(p);
    x = saved;
    return value;
}

complex d1(const CNumberField& f, FieldPoint& p, std::size_t c, const StencilSpec& s) {
    const double h = step_for(s, coord(p, c));
    return (shifted(f, p, c, h) - shifted(f, p, c, -h)) / (2.0 * h);
}

complex d2(const CNumberField& f, FieldPoint& p, std::size_t c, complex f0, const StencilSpec& s) {
    const double h = step_for(s, coord(p, c));
    return (shifted(f, p, c, h) - 2.0 * f0 + shifted(f, p, c, -h)) / (h * h);
}

// Mixed derivative by nesting two first-order central stencils.
complex d11(const CNumberField& f, FieldPoint& p, std::size_t a, std::size_t b,
            const StencilSpec& s) {
    const double ha = step_for(s, coord(p, a));
    const double hb = step_for(s, coord(p, b));
    complex& xa = coord(p, a);
    const complex saved = xa;
    xa = saved + ha;
    const complex plus = shifted(f, p, b, hb) - shifted(f, p, b, -hb);
    coord(p, a) = saved - ha;
    const complex minus = shifted(f, p, b, hb) - shifted(f, p, b, -hb);
    coord(p, a) = saved;
    return (plus - minus) / (4.0 * ha * hb);
}

void require_bath_coordinates(const FieldPoint& p, const EnvironmentSpec& env) {
    if (p.w.size() != env.modes.size() || p.wbar.size() != env.modes.size()) {
        throw DimensionMismatch("field point carries " + std::to_string(p.w.size()) +
                                " bath coordinates, environment has " +
                                std::to_string(env.modes.size()) + " modes");
    }
}

void require_field_modes(const CNumberField& f, const EnvironmentSpec& env) {
    if (f.n_env_modes != env.modes.size()) {
        throw DimensionMismatch("field and environment disagree on the number of bath modes");
    }
}

// (e^{-i a} - 1) written without cancellation near a = 0.
complex expm1_i(double a) {
    const double s = std::sin(0.5 * a);
    return {-2.0 * s * s, -std::sin(a)};
}

complex closed_field_value(const SystemParams& sys, complex u, complex v, double t) {
    const double linear = -(sys.omega + sys.mu * sys.hbar) * t;
    return u * std::exp(I * linear + u * v * expm1_i(2.0 * sys.mu * sys.hbar * t));
}

complex bath_field_log(const EnvironmentSpec& env, const FieldPoint& p) {
    complex acc{};
    for (std::size_t j = 0; j < env.modes.size(); ++j) {
        // -w w̄ (1 - e^{-i theta}) = w w̄ (e^{-i theta} - 1)
        acc += p.w[j] * p.wbar[j] * expm1_i(env.modes[j].g * p.t / env.hbar);
    }
    return acc;
}

}  // namespace

complex apply_K_alpha(const CNumberField& f, const FieldPoint& point, const SystemParams& sys,
                      const StencilSpec& stencil) {
    FieldPoint p = point;
    const complex f0 = f(p);
    const complex uv = p.u * p.v;
    const complex euler = p.v * d1(f, p, 1, stencil) - p.u * d1(f, p, 0, stencil);
    const complex second =
        p.v * p.v * d2(f, p, 1, f0, stencil) - p.u * p.u * d2(f, p, 0, f0, stencil);
    const double hmu = sys.hbar * sys.mu;
    return I * (sys.omega + hmu + 2.0 * hmu * uv) * euler + I * hmu * second;
}

complex apply_K_beta(const CNumberField& f, const FieldPoint& point, const EnvironmentSpec& env,
                     const StencilSpec& stencil) {
    require_bath_coordinates(point, env);
    FieldPoint p = point;
    complex acc{};
    for (std::size_t j = 0; j < env.modes.size(); ++j) {
        const complex euler = p.wbar[j] * d1(f, p, wbar_index(j), stencil) -
                              p.w[j] * d1(f, p, w_index(j), stencil);
        acc += env.modes[j].omega * euler;
    }
    return I * acc;
}

complex apply_K_int(const CNumberField& f, const FieldPoint& point, const SystemParams& sys,
                    const EnvironmentSpec& env, const StencilSpec& stencil) {
    require_same_hbar(sys, env);
    require_bath_coordinates(point, env);
    FieldPoint p = point;
    const complex uv = p.u * p.v;

    complex bath_occupation{};
    complex bath_euler{};
    complex mixed{};
    for (std::size_t j = 0; j < env.modes.size(); ++j) {
        const double g = env.modes[j].g;
        bath_occupation += g * p.w[j] * p.wbar[j];
        bath_euler += g * (p.wbar[j] * d1(f, p, wbar_index(j), stencil) -
                           p.w[j] * d1(f, p, w_index(j), stencil));
        mixed += g * (p.v * p.wbar[j] * d11(f, p, 1, wbar_index(j), stencil) -
                      p.u * p.w[j] * d11(f, p, 0, w_index(j), stencil));
    }
    const complex system_euler = p.v * d1(f, p, 1, stencil) - p.u * d1(f, p, 0, stencil);
    return (I / sys.hbar) * (bath_occupation * system_euler + uv * bath_euler + mixed);
}

complex apply_K_closed(const CNumberField& f, const FieldPoint& p, const SystemParams& sys,
                       const StencilSpec& stencil) {
    if (!p.w.empty() || !p.wbar.empty()) {
        throw DimensionMismatch("apply_K_closed expects a point without bath coordinates");
    }
    return apply_K_alpha(f, p, sys, stencil);
}

complex apply_K_open(const CNumberField& f, const FieldPoint& p, const SystemParams& sys,
                     const EnvironmentSpec& env, const StencilSpec& stencil) {
    require_bath_coordinates(p, env);
    require_field_modes(f, env);
    return apply_K_alpha(f, p, sys, stencil) + apply_K_beta(f, p, env, stencil) +
           apply_K_int(f, p, sys, env, stencil);
}

complex time_derivative(const CNumberField& f, const FieldPoint& point,
                        const StencilSpec& stencil) {
    FieldPoint p = point;
    const double dt = stencil.dt;
    const double t0 = p.t;
    p.t = t0 + dt;
    const complex plus = f(p);
    p.t = t0 - dt;
    const complex minus = f(p);
    return (plus - minus) / (2.0 * dt);
}

double pde_residual(const CNumberField& f, const FieldPoint& p, const SystemParams& sys,
                    const EnvironmentSpec& env, const StencilSpec& stencil) {
    const complex generator = env.modes.empty() ? apply_K_closed(f, p, sys, stencil)
                                                : apply_K_open(f, p, sys, env, stencil);
    return std::abs(time_derivative(f, p, stencil) - generator);
}

CNumberField closed_solution_field(const SystemParams& sys) {
    return {[sys](const FieldPoint& p) { return closed_field_value(sys, p.u, p.v, p.t); }, 0};
}

complex closed_solution_time_derivative(const SystemParams& sys, const FieldPoint& p) {
    const double hmu = sys.hbar * sys.mu;
    const complex rate =
        -I * (sys.omega + hmu) - 2.0 * I * hmu * p.u * p.v * std::polar(1.0, -2.0 * hmu * p.t);
    return closed_field_value(sys, p.u, p.v, p.t) * rate;
}

CNumberField bath_solution_field(const EnvironmentSpec& env) {
    return {[env](const FieldPoint& p) { return std::exp(bath_field_log(env, p)); },
            env.modes.size()};
}

CNumberField open_solution_field(const SystemParams& sys, const EnvironmentSpec& env) {
    return {[sys, env](const FieldPoint& p) {
                return closed_field_value(sys, p.u, p.v, p.t) * std::exp(bath_field_log(env, p));
            },
            env.modes.size()};
}

complex open_solution_time_derivative(const SystemParams& sys, const EnvironmentSpec& env,
                                      const FieldPoint& p) {
    complex bath_rate{};
    for (std::size_t j = 0; j < env.modes.size(); ++j) {
        const double g = env.modes[j].g;
        bath_rate += -I * (g / env.hbar) * p.w[j] * p.wbar[j] * std::polar(1.0, -g * p.t / env.hbar);
    }
    const complex f_beta = std::exp(bath_field_log(env, p));
    const complex f_alpha = closed_field_value(sys, p.u, p.v, p.t);
    FieldPoint system_only{p.u, p.v, {}, {}, p.t};
    return closed_solution_time_derivative(sys, system_only) * f_beta +
           f_alpha * f_beta * bath_rate;
}

ResidualReport residual_report(const CNumberField& f, const SystemParams& sys,
                               const EnvironmentSpec& env, std::span<const FieldPoint> grid,
                               const StencilSpec& stencil, double rel_floor) {
    if (grid.empty()) throw std::invalid_argument("residual check needs at least one grid point");
    ResidualReport report;
    for (const auto& p : grid) {
        const complex dfdt = time_derivative(f, p, stencil);
        const complex generator = env.modes.empty() ? apply_K_closed(f, p, sys, stencil)
                                                    : apply_K_open(f, p, sys, env, stencil);
        const double residual = std::abs(dfdt - generator);
        report.max_abs_residual = std::max(report.max_abs_residual, residual);
        report.max_rel_residual =
            std::max(report.max_rel_residual, residual / std::max(std::abs(dfdt), rel_floor));
        ++report.points;
    }
    return report;
}

ResidualReport verify_exact_solution(const SystemParams& sys, const EnvironmentSpec& env,
                                     std::span<const FieldPoint> grid, const StencilSpec& stencil,
                                     double rel_floor) {
    return residual_report(open_solution_field(sys, env), sys, env, grid, stencil, rel_floor);
}

std::vector<FieldPoint> random_field_points(std::size_t count, std::size_t n_modes,
                                            double system_radius, double bath_radius,
                                            double t_min, double t_max, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto disc = [&](double radius) {
        const double r = radius * std::sqrt(unit(rng));
        return std::polar(r, 2.0 * std::numbers::pi * unit(rng));
    };
    std::vector<FieldPoint> points(count);
    for (auto& p : points) {
        p.u = disc(system_radius);
        p.v = disc(system_radius);
        p.w.resize(n_modes);
        p.wbar.resize(n_modes);
        for (std::size_t j = 0; j < n_modes; ++j) {
            p.w[j] = disc(bath_radius);
            p.wbar[j] = disc(bath_radius);
        }
        p.t = t_min + (t_max - t_min) * unit(rng);
    }
    return points;
}

}  // namespace kerrbath

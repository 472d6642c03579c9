// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
// Each criterion's runtime limit is part of its verdict.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "kerrbath/analytic.hpp"
#include "kerrbath/fock_oracle.hpp"
#include "kerrbath/pde.hpp"
#include "kerrbath/perturbative.hpp"
#include "kerrbath/thermal.hpp"

using namespace kerrbath;

namespace {

constexpr double pi = std::numbers::pi;

SystemParams standard_system() {
    SystemParams s;
    s.omega = 1.0;
    s.mu = 0.1;
    s.hbar = 1.0;
    s.alpha0 = {2.0, 0.0};
    return s;
}

EnvironmentSpec standard_bath() {
    EnvironmentSpec env;
    env.modes = {{1.0, 0.05}, {1.5, 0.08}};
    env.temperature = 1.0;
    return env;
}

struct Outcome {
    bool ok{false};
    std::string detail;
};

struct Criterion {
    int id;
    const char* name;
    double time_limit;
    std::function<Outcome()> body;
};

std::string fmt(const char* format, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

Outcome exact_path() {
    const auto sys = standard_system();
    const auto env = standard_bath();
    const auto trunc = auto_truncation(sys.alpha0, env, 1e-12);
    double worst = 0.0;
    for (double t : linspace(0.0, pi / (sys.hbar * sys.mu), 100)) {
        worst = std::max(worst, std::abs(oracle_open_amplitude(sys, env, t, trunc) -
                                         open_amplitude(sys, env, t).a_expect));
    }
    return {worst <= 1e-8, fmt("max |oracle - analytic| = %.3e (limit 1e-8, n_max=%d, mu_max=%d)", worst,
                               trunc.n_max, trunc.mu_max)};
}

Outcome two_forms() {
    std::mt19937_64 rng(777);
    std::uniform_real_distribution<double> ux(0.0, 1.0);
    std::uniform_real_distribution<double> ut(-20.0 * pi, 20.0 * pi);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
        const double x = ux(rng), theta = ut(rng);
        const complex a = decoherence_closed_form(x, theta);
        const complex b = decoherence_polar_form(x, theta);
        worst = std::max(worst, std::abs(a - b) / std::abs(a));
    }
    return {worst <= 1e-12, fmt("max relative difference over 10^4 (x, theta) = %.3e (limit 1e-12)", worst)};
}

Outcome mc_reduction() {
    const auto sys = standard_system();
    const auto env = standard_bath();
    const double t_r = pi / (sys.hbar * sys.mu);
    std::vector<double> grid;
    for (int k = 1; k <= 20; ++k) grid.push_back(k * t_r / 20.0);
    const double t_fixed = 5.0;
    const complex r_fixed = total_decoherence(env, t_fixed);

    int seeds_grid_ok = 0, seeds_fixed_ok = 0, worst_points = 20;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const auto batch = draw_sample_batch(env, 90000 + seed, 100000);
        int inside = 0;
        for (double t : grid) {
            const auto est = mc_decoherence(sys, env, t, batch);
            if (std::abs(est.mean - total_decoherence(env, t)) <= 3.0 * est.std_error) ++inside;
        }
        worst_points = std::min(worst_points, inside);
        if (inside >= 18) ++seeds_grid_ok;
        const auto est = mc_decoherence(sys, env, t_fixed, batch);
        if (std::abs(est.mean - r_fixed) <= 3.0 * est.std_error) ++seeds_fixed_ok;
    }
    return {seeds_grid_ok == 50 && seeds_fixed_ok >= 47,
            fmt("M=1e5: every seed brackets >= 18/20 grid points: %s (worst seed %d/20); "
                "seeds bracketing R(t=5): %d/50 (need >= 47)",
                seeds_grid_ok == 50 ? "yes" : "no", worst_points, seeds_fixed_ok)};
}

// ln|R| from the stable modulus formula, written out here rather than taken from the library.
double log_modulus(const EnvironmentSpec& env, double t) {
    double acc = 0.0;
    for (const auto& m : env.modes) {
        const double x = std::exp(-env.hbar * m.omega / (env.k_b * env.temperature));
        const double s = std::sin(0.5 * m.g * t / env.hbar);
        acc += std::log1p(-x) - 0.5 * std::log((1.0 - x) * (1.0 - x) + 4.0 * x * s * s);
    }
    return acc;
}

Outcome perturbative_order() {
    const auto sys = standard_system();
    const auto env = standard_bath();
    const double ts[3] = {0.05, 0.1, 0.2};
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (double t : ts) {
        const double dev = std::abs(short_time_amplitude(sys, env, t) - open_amplitude(sys, env, t).a_expect);
        const double lx = std::log(t), ly = std::log(dev);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    const double slope = (3.0 * sxy - sx * sy) / (3.0 * sxx - sx * sx);

    // Richardson-extrapolated second difference of ln|R| at t = 0
    const auto second = [&](double h) {
        return (log_modulus(env, h) - 2.0 * log_modulus(env, 0.0) + log_modulus(env, -h)) / (h * h);
    };
    const double curvature = (4.0 * second(0.005) - second(0.01)) / 3.0;
    const double gamma = perturbative_coeffs(env, sys).gamma;
    const double rel = std::abs(-curvature - gamma) / gamma;
    return {std::abs(slope - 3.0) <= 0.3 && rel <= 1e-6,
            fmt("log-log slope = %.4f (3 +/- 0.3); gamma = %.10e vs -d2 ln|R| relative diff %.2e (limit 1e-6)",
                slope, gamma, rel)};
}

Outcome pde_residual_check() {
    const auto sys = standard_system();
    const auto env = standard_bath();
    const double t_r = pi / (sys.hbar * sys.mu);
    const StencilSpec fixed{1e-4, 1e-4, false};

    EnvironmentSpec closed;
    const auto grid0 = random_field_points(20, 0, 3.0, 0.0, 0.0, t_r, 101);
    const auto grid2 = random_field_points(20, 2, 3.0, 1.5, 0.0, t_r, 102);
    const double rel0 = verify_exact_solution(sys, closed, grid0, fixed).max_rel_residual;
    const double rel2 = verify_exact_solution(sys, env, grid2, fixed).max_rel_residual;

    // Stencil-limited regime: h large enough that truncation dominates rounding.
    const auto f = open_solution_field(sys, env);
    double lo = 1e300, hi = 0.0;
    for (const auto& p : random_field_points(20, 2, 2.0, 1.0, 0.0, t_r, 103)) {
        const complex exact = open_solution_time_derivative(sys, env, p);
        const double e1 = std::abs(apply_K_open(f, p, sys, env, {2e-2, 1e-4, false}) - exact);
        const double e2 = std::abs(apply_K_open(f, p, sys, env, {1e-2, 1e-4, false}) - exact);
        lo = std::min(lo, e1 / e2);
        hi = std::max(hi, e1 / e2);
    }
    const bool ratio_ok = lo >= 4.0 * 0.85 && hi <= 4.0 * 1.15;

    SystemParams wrong = sys;
    wrong.mu *= 1.1;
    const auto g = closed_solution_field(wrong);
    int flagged = 0;
    for (const auto& p : grid0) {
        const double scale = std::abs(time_derivative(g, p, fixed));
        if (pde_residual(g, p, sys, closed, fixed) > 1e-5 * scale) ++flagged;
    }
    return {rel0 <= 1e-5 && rel2 <= 1e-5 && ratio_ok && flagged == 20,
            fmt("max relative residual closed %.2e, N=2 %.2e (limit 1e-5); halving-h ratio in [%.3f, %.3f] "
                "(4 +/- 15%%); perturbed mu flagged at %d/20 points",
                rel0, rel2, lo, hi, flagged)};
}

Outcome collapse_revival() {
    const auto sys = standard_system();
    const double t_r = pi / (sys.hbar * sys.mu);
    const double a0 = std::abs(sys.alpha0);
    const double revival = std::abs(std::abs(closed_amplitude(sys, t_r)) - a0);
    double min_abs = 1e300, env_dev = 0.0;
    for (double t : linspace(0.0, t_r, 2000)) {
        const double mod = std::abs(closed_amplitude(sys, t));
        const double envelope = a0 * std::exp(std::norm(sys.alpha0) * (std::cos(2.0 * sys.mu * sys.hbar * t) - 1.0));
        min_abs = std::min(min_abs, mod);
        env_dev = std::max(env_dev, std::abs(mod - envelope) / envelope);
    }
    return {revival <= 1e-12 && min_abs < 0.05 * a0 && env_dev <= 1e-12,
            fmt("| |alpha(t_R)| - |alpha0| | = %.2e (limit 1e-12); min |alpha| = %.3e (< %.2f); "
                "max relative deviation from envelope %.2e",
                revival, min_abs, 0.05 * a0, env_dev)};
}

Outcome gaussian_lobes() {
    const auto env = EnvironmentSpec::identical(50, 1.0, 0.05, 1.0);
    const double hwhm = gaussian_lobe_hwhm(env);
    double worst = 0.0;
    for (int p = 0; p <= 1; ++p) {
        const double t_p = 2.0 * pi * env.hbar * p / 0.05;
        for (double t : linspace(t_p - hwhm, t_p + hwhm, 401)) {
            worst = std::max(worst, std::abs(std::abs(total_decoherence(env, t)) - gaussian_lobe(env, p, t)));
        }
    }
    return {worst <= 0.05, fmt("max | |R| - lobe | within one HWHM (%.4f) of t_0, t_1 = %.4f (limit 0.05)",
                               hwhm, worst)};
}

Outcome clt_regime() {
    const auto sys = standard_system();
    const auto env = EnvironmentSpec::identical(200, 1.0, 0.01, 1.0 / std::numbers::ln2);
    // first time |R| reaches 1/2, by bisection on the exact modulus
    double lo = 0.0, hi = 1.0;
    while (std::abs(total_decoherence(env, hi)) > 0.5) hi *= 2.0;
    for (int i = 0; i < 100; ++i) {
        const double mid = 0.5 * (lo + hi);
        (std::abs(total_decoherence(env, mid)) > 0.5 ? lo : hi) = mid;
    }
    double worst = 0.0;
    for (double t : linspace(0.0, hi, 1000)) {
        const double exact = std::abs(total_decoherence(env, t));
        worst = std::max(worst, std::abs(std::abs(clt_decoherence(env, sys, t)) - exact) / exact);
    }
    return {worst <= 0.01, fmt("max relative | |R_clt| - |R| | for t in [0, %.4f] = %.4f (limit 0.01)", hi, worst)};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "exact-path equivalence", 5.0, exact_path},
        {2, "two-form identity", 1.0, two_forms},
        {3, "Monte-Carlo reduction", 60.0, mc_reduction},
        {4, "perturbative order", 1.0, perturbative_order},
        {5, "PDE residual", 5.0, pde_residual_check},
        {6, "collapse and revival", 1.0, collapse_revival},
        {7, "Gaussian lobe", 1.0, gaussian_lobes},
        {8, "central-limit regime", 1.0, clt_regime},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome out;
        try {
            out = c.body();
        } catch (const std::exception& e) {
            out = {false, std::string("threw: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        const bool ok = out.ok && secs < c.time_limit;
        if (!ok) ++failures;
        std::printf("[%s] %d %s: %s; %.3f s (limit %.0f s)\n", ok ? "PASS" : "FAIL", c.id, c.name,
                    out.detail.c_str(), secs, c.time_limit);
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}

#include "kerrbath/perturbative.hpp"

#include <cmath>
#include <limits>

#include "kerrbath/errors.hpp"
#include "kerrbath/thermal.hpp"

namespace kerrbath {

CltSummary clt_summary(const EnvironmentSpec& env) {
    CltSummary s;
    for (const auto& mode : env.modes) {
        const double n_bar = bose_occupation(mode.omega, env).n_bar;
        s.y_bar += mode.g * n_bar;
        s.b_sq_total += mode.g * mode.g * n_bar * (n_bar + 1.0);
    }
    return s;
}

PerturbativeCoeffs perturbative_coeffs(const EnvironmentSpec& env, const SystemParams& sys) {
    require_same_hbar(sys, env);
    const CltSummary s = clt_summary(env);
    PerturbativeCoeffs c;
    c.delta_omega = s.y_bar / sys.hbar;
    c.gamma = s.b_sq_total / (sys.hbar * sys.hbar);
    const double rate = std::norm(sys.alpha0) * s.y_bar / sys.hbar;
    c.validity_time = rate > 0.0 ? 1.0 / rate : std::numeric_limits<double>::infinity();
    return c;
}

complex clt_decoherence(const EnvironmentSpec& env, const SystemParams& sys, double t) {
    require_same_hbar(sys, env);
    const CltSummary s = clt_summary(env);
    const double tau = t / sys.hbar;
    return std::polar(std::exp(-0.5 * s.b_sq_total * tau * tau), -s.y_bar * tau);
}

complex short_time_amplitude(const SystemParams& sys, const EnvironmentSpec& env, double t) {
    return clt_decoherence(env, sys, t) * closed_amplitude(sys, t);
}

complex first_order_fbeta(std::span<const complex> betas, const EnvironmentSpec& env,
                          const SystemParams& sys, double t) {
    if (betas.size() != env.modes.size()) {
        throw DimensionMismatch("first_order_fbeta: one amplitude per bath mode expected");
    }
    double y = 0.0;
    for (std::size_t j = 0; j < betas.size(); ++j) y += env.modes[j].g * std::norm(betas[j]);
    return std::polar(1.0, -y * t / sys.hbar);
}

}  // namespace kerrbath

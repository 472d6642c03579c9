#include "kerrbath/fock_oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kerrbath/errors.hpp"
#include "kerrbath/perturbative.hpp"

namespace kerrbath {

namespace {

// Poisson pmf for k = 0..K where K > mean and the pmf has dropped below `floor`.
std::vector<double> poisson_pmf(double mean, double floor) {
    std::vector<double> pmf;
    if (mean == 0.0) {
        pmf.push_back(1.0);
        return pmf;
    }
    const double log_mean = std::log(mean);
    for (int k = 0;; ++k) {
        const double log_p = -mean + k * log_mean - std::lgamma(k + 1.0);
        const double p = std::exp(log_p);
        pmf.push_back(p);
        if (k > mean && p < floor) break;
    }
    return pmf;
}

// tail[n] = sum_{k > n} pmf[k], accumulated from the small end.
std::vector<double> suffix_tails(const std::vector<double>& pmf) {
    std::vector<double> tail(pmf.size(), 0.0);
    double acc = 0.0;
    for (std::size_t k = pmf.size(); k-- > 0;) {
        tail[k] = acc;
        acc += pmf[k];
    }
    return tail;
}

void check_mode_tail(double x, const TruncationSpec& trunc) {
    if (std::pow(x, trunc.mu_max + 1) >= trunc.tail_tol) {
        throw TruncationTooSmall("bath cutoff mu_max=" + std::to_string(trunc.mu_max) +
                                 " leaves thermal tail above tail_tol");
    }
}

complex strip_sum(const FockCoeffs& fc, double t, double linear_rate, double kerr_rate) {
    complex sum{};
    const int n_max = static_cast<int>(fc.coeffs.size()) - 1;
    for (int n = 0; n < n_max; ++n) {
        const double phase = -t * (linear_rate + kerr_rate * (2.0 * n + 1.0));
        sum += std::sqrt(n + 1.0) * fc.coeffs[n + 1] * std::conj(fc.coeffs[n]) *
               std::polar(1.0, phase);
    }
    return sum;
}

}  // namespace

double poisson_tail(double mean, int n) {
    if (n < 0) return 1.0;
    const auto tail = suffix_tails(poisson_pmf(mean, 1e-300));
    if (static_cast<std::size_t>(n) >= tail.size()) return 0.0;
    return tail[n];
}

TruncationSpec auto_truncation(complex alpha, const EnvironmentSpec& env, double tail_tol) {
    TruncationSpec trunc;
    trunc.tail_tol = tail_tol;

    const auto tail = suffix_tails(poisson_pmf(std::norm(alpha), 1e-6 * tail_tol));
    int n = 1;
    while (static_cast<std::size_t>(n) < tail.size() && tail[n] >= tail_tol) ++n;
    trunc.n_max = n;

    int mu = 1;
    for (const auto& mode : env.modes) {
        const double x = boltzmann_factor(mode.omega, env);
        if (x == 0.0) continue;
        // x^{m+1} < tol  <=>  m + 1 > log(tol)/log(x)
        int m = std::max(1, static_cast<int>(std::floor(std::log(tail_tol) / std::log(x))));
        while (std::pow(x, m + 1) >= tail_tol) ++m;
        while (m > 1 && std::pow(x, m) < tail_tol) --m;
        mu = std::max(mu, m);
    }
    trunc.mu_max = mu;
    return trunc;
}

FockCoeffs coherent_fock_coeffs(complex alpha, const TruncationSpec& trunc) {
    if (trunc.n_max < 1) throw TruncationTooSmall("n_max must be at least 1");
    const double tail = poisson_tail(std::norm(alpha), trunc.n_max);
    if (tail >= trunc.tail_tol) {
        throw TruncationTooSmall("system cutoff n_max=" + std::to_string(trunc.n_max) +
                                 " leaves coherent-state tail " + std::to_string(tail) +
                                 " above tail_tol");
    }
    FockCoeffs fc;
    fc.alpha = alpha;
    fc.coeffs.resize(static_cast<std::size_t>(trunc.n_max) + 1);
    fc.coeffs[0] = std::exp(-0.5 * std::norm(alpha));
    for (int n = 1; n <= trunc.n_max; ++n) {
        fc.coeffs[n] = fc.coeffs[n - 1] * alpha / std::sqrt(static_cast<double>(n));
    }
    return fc;
}

complex mode_trace_factor(const EnvMode& mode, const EnvironmentSpec& env, int delta_n, double t,
                          const TruncationSpec& trunc) {
    const double x = boltzmann_factor(mode.omega, env);
    check_mode_tail(x, trunc);
    const double theta = mode.g * t / env.hbar;
    complex sum{};
    double weight = 1.0 - x;
    for (int mu = 0; mu <= trunc.mu_max; ++mu) {
        sum += weight * std::polar(1.0, -theta * delta_n * mu);
        weight *= x;
    }
    return sum;
}

complex oracle_decoherence(const EnvironmentSpec& env, double t, const TruncationSpec& trunc) {
    complex r{1.0, 0.0};
    for (const auto& mode : env.modes) r *= mode_trace_factor(mode, env, 1, t, trunc);
    return r;
}

complex oracle_open_amplitude(const SystemParams& sys, const EnvironmentSpec& env, double t,
                              const TruncationSpec& trunc) {
    require_same_hbar(sys, env);
    const complex bath = oracle_decoherence(env, t, trunc);
    const FockCoeffs fc = coherent_fock_coeffs(sys.alpha0, trunc);
    return strip_sum(fc, t, sys.omega, sys.mu * sys.hbar) * bath;
}

complex perturbative_me_amplitude(const SystemParams& sys, const EnvironmentSpec& env, double t,
                                  const TruncationSpec& trunc) {
    const PerturbativeCoeffs pc = perturbative_coeffs(env, sys);
    const FockCoeffs fc = coherent_fock_coeffs(sys.alpha0, trunc);
    // (n - n')^2 = 1 on the strip that carries <a>
    const double damping = std::exp(-0.5 * pc.gamma * t * t);
    return damping * strip_sum(fc, t, sys.omega + pc.delta_omega, sys.mu * sys.hbar);
}

}  // namespace kerrbath

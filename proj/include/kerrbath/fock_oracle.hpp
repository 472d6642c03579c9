// fock_oracle.hpp: brute-force number-basis evaluation of <a(t)>.
//
// Every Hamiltonian term is diagonal in the joint Fock basis, so the joint density
// matrix evolves by phases alone. Only the first off-diagonal strip rho_{n+1,n}
// contributes to <a>, and tracing a thermal mode over that strip gives
//   sum_mu (1 - x) x^mu exp(-i g t mu / hbar).
// Nothing in this path uses the closed forms from analytic.hpp; it exists to check them.
#pragma once

#include <complex>
#include <vector>

#include "kerrbath/analytic.hpp"

namespace kerrbath {

struct TruncationSpec {
    int n_max{1};     // system cutoff: coefficients a_0..a_{n_max}
    int mu_max{1};    // per-mode bath cutoff
    double tail_tol{1e-12};
};

struct FockCoeffs {
    complex alpha{};
    std::vector<complex> coeffs;  // a_0..a_{n_max}
};

// Poisson probability mass beyond n: sum_{k > n} e^{-mean} mean^k / k!.
[[nodiscard]] double poisson_tail(double mean, int n);

// Smallest cutoffs with Poisson tail < tail_tol (n_max >= 1) and x^{mu_max+1} < tail_tol
// for every bath mode (mu_max >= 1).
[[nodiscard]] TruncationSpec auto_truncation(complex alpha, const EnvironmentSpec& env,
                                             double tail_tol);

// a_0 = e^{-|alpha|^2/2}, a_n = a_{n-1} alpha / sqrt(n).
// Throws TruncationTooSmall if the Poisson tail beyond n_max is >= tail_tol.
[[nodiscard]] FockCoeffs coherent_fock_coeffs(complex alpha, const TruncationSpec& trunc);

// sum_{mu=0}^{mu_max} (1 - x) x^mu exp(-i theta delta_n mu), theta = g t / hbar.
// Throws TruncationTooSmall if x^{mu_max+1} >= tail_tol.
[[nodiscard]] complex mode_trace_factor(const EnvMode& mode, const EnvironmentSpec& env,
                                        int delta_n, double t, const TruncationSpec& trunc);

// prod_j mode_trace_factor(mode_j, delta_n = 1, t)
[[nodiscard]] complex oracle_decoherence(const EnvironmentSpec& env, double t,
                                         const TruncationSpec& trunc);

// sum_{n < n_max} sqrt(n+1) a_{n+1} conj(a_n) e^{-it[omega + mu hbar (2n+1)]} * oracle_decoherence
[[nodiscard]] complex oracle_open_amplitude(const SystemParams& sys, const EnvironmentSpec& env,
                                            double t, const TruncationSpec& trunc);

// Same Fock sum for the closed-form solution of the second-order master equation:
//   rho_{n,n'}(t) = rho_{n,n'}(0) exp[-i(omega + d_omega)(n - n')t - i mu hbar (n^2 - n'^2) t
//                                     - gamma t^2 (n - n')^2 / 2]
[[nodiscard]] complex perturbative_me_amplitude(const SystemParams& sys,
                                                const EnvironmentSpec& env, double t,
                                                const TruncationSpec& trunc);

}  // namespace kerrbath

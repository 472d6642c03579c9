// thermal.hpp: thermal bath statistics and Monte-Carlo reduction over the
// Glauber-Sudarshan P-representation of the bath.
//
// A thermal mode with mean occupation n_bar has P(beta) = exp(-|beta|^2/n_bar)/(pi n_bar),
// i.e. Re(beta) and Im(beta) are independent N(0, n_bar/2). Averaging the exact
// environment factor f_beta over these samples estimates R(t).
//
// Random numbers: each block of kChunkRows samples owns an std::mt19937_64 seeded
// with splitmix64(seed ^ splitmix64(chunk_index)); normals come from
// std::normal_distribution. Results are bit-identical for a given seed on one
// standard library regardless of the worker count.
#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <vector>

#include "kerrbath/analytic.hpp"

namespace kerrbath {

using Rng = std::mt19937_64;

inline constexpr std::size_t kChunkRows = 4096;

struct ThermalModeState {
    double n_bar{0.0};
    double boltzmann_x{0.0};
};

// M x N matrix of bath amplitudes, row-major (one row per sample).
struct SampleBatch {
    std::uint64_t seed{0};
    std::size_t count{0};
    std::size_t n_modes{0};
    std::vector<complex> betas;

    [[nodiscard]] std::span<const complex> row(std::size_t m) const {
        return {betas.data() + m * n_modes, n_modes};
    }
};

struct McEstimate {
    complex mean{};
    double std_error{0.0};  // quadrature of real and imaginary standard errors
    std::size_t count{0};
};

[[nodiscard]] std::uint64_t splitmix64(std::uint64_t x) noexcept;

// Bose occupation n_bar = 1/(e^{hbar omega/k_B T} - 1); T == 0 gives n_bar = 0.
// Throws NonPositiveFrequency for omega <= 0.
[[nodiscard]] ThermalModeState bose_occupation(double omega, const EnvironmentSpec& env);

// One draw from the thermal P-function; exactly 0 when n_bar == 0.
[[nodiscard]] complex sample_thermal_coherent(const ThermalModeState& state, Rng& rng);

// f_beta^{(j)}(t) = exp[-|beta|^2 (1 - e^{-i g_j t/hbar})]; modulus never exceeds 1.
[[nodiscard]] complex f_beta_mode(complex beta, const EnvMode& mode, const SystemParams& sys,
                                  double t) noexcept;

// Draws `count` rows of bath amplitudes. threads == 0 uses hardware concurrency.
[[nodiscard]] SampleBatch draw_sample_batch(const EnvironmentSpec& env, std::uint64_t seed,
                                            std::size_t count, unsigned threads = 0);

// Sample mean and standard error of value(row) over the batch; the reduction
// order is fixed by chunk index. Throws EmptyBatch when the batch has no rows.
[[nodiscard]] McEstimate mc_mean(const SampleBatch& batch,
                                 const std::function<complex(std::span<const complex>)>& value,
                                 unsigned threads = 0);

// Monte-Carlo estimate of R(t) = E[prod_j f_beta^{(j)}(t)].
[[nodiscard]] McEstimate mc_decoherence(const SystemParams& sys, const EnvironmentSpec& env,
                                        double t, const SampleBatch& batch, unsigned threads = 0);

// alpha(t) times the Monte-Carlo estimate of R(t); std_error is scaled by |alpha(t)|.
[[nodiscard]] McEstimate mc_reduced_amplitude(const SystemParams& sys, const EnvironmentSpec& env,
                                              double t, const SampleBatch& batch,
                                              unsigned threads = 0);

}  // namespace kerrbath

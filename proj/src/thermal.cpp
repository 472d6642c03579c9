#include "kerrbath/thermal.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "kerrbath/errors.hpp"

namespace kerrbath {

namespace {

std::size_t chunk_count(std::size_t rows) { return (rows + kChunkRows - 1) / kChunkRows; }

unsigned worker_count(unsigned requested, std::size_t n_chunks) {
    unsigned n = requested == 0 ? std::max(1u, std::thread::hardware_concurrency()) : requested;
    return static_cast<unsigned>(std::min<std::size_t>(n, std::max<std::size_t>(n_chunks, 1)));
}

// Static round-robin assignment of chunks to workers; each chunk's output depends
// only on its index.
template <class Fn>
void for_each_chunk(std::size_t n_chunks, unsigned threads, Fn&& fn) {
    const unsigned workers = worker_count(threads, n_chunks);
    if (workers <= 1) {
        for (std::size_t c = 0; c < n_chunks; ++c) fn(c);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t c = w; c < n_chunks; c += workers) fn(c);
        });
    }
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

ThermalModeState bose_occupation(double omega, const EnvironmentSpec& env) {
    if (!(omega > 0.0)) throw NonPositiveFrequency("bose_occupation needs omega > 0");
    if (env.temperature == 0.0) return {0.0, 0.0};
    const double ratio = env.hbar * omega / (env.k_b * env.temperature);
    return {1.0 / std::expm1(ratio), std::exp(-ratio)};
}

complex sample_thermal_coherent(const ThermalModeState& state, Rng& rng) {
    if (state.n_bar == 0.0) return {0.0, 0.0};
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * state.n_bar));
    const double re = normal(rng);
    const double im = normal(rng);
    return {re, im};
}

complex f_beta_mode(complex beta, const EnvMode& mode, const SystemParams& sys, double t) noexcept {
    const double theta = mode.g * t / sys.hbar;
    const double n = std::norm(beta);
    // -|beta|^2 (1 - e^{-i theta}) = -2|beta|^2 sin^2(theta/2) - i |beta|^2 sin(theta)
    const double half = std::sin(0.5 * theta);
    return std::polar(std::exp(-2.0 * n * half * half), -n * std::sin(theta));
}

SampleBatch draw_sample_batch(const EnvironmentSpec& env, std::uint64_t seed, std::size_t count,
                              unsigned threads) {
    SampleBatch batch;
    batch.seed = seed;
    batch.count = count;
    batch.n_modes = env.modes.size();
    batch.betas.assign(count * batch.n_modes, complex{});

    std::vector<ThermalModeState> states;
    states.reserve(env.modes.size());
    for (const auto& mode : env.modes) states.push_back(bose_occupation(mode.omega, env));

    for_each_chunk(chunk_count(count), threads, [&](std::size_t chunk) {
        Rng rng(splitmix64(seed ^ splitmix64(chunk)));
        const std::size_t begin = chunk * kChunkRows;
        const std::size_t end = std::min(count, begin + kChunkRows);
        for (std::size_t m = begin; m < end; ++m) {
            complex* row = batch.betas.data() + m * batch.n_modes;
            for (std::size_t j = 0; j < batch.n_modes; ++j) {
                row[j] = sample_thermal_coherent(states[j], rng);
            }
        }
    });
    return batch;
}

McEstimate mc_mean(const SampleBatch& batch,
                   const std::function<complex(std::span<const complex>)>& value,
                   unsigned threads) {
    if (batch.count == 0) throw EmptyBatch("Monte-Carlo average over an empty batch");
    const std::size_t n_chunks = chunk_count(batch.count);

    std::vector<complex> values(batch.count);
    std::vector<complex> chunk_sums(n_chunks);
    for_each_chunk(n_chunks, threads, [&](std::size_t chunk) {
        const std::size_t begin = chunk * kChunkRows;
        const std::size_t end = std::min(batch.count, begin + kChunkRows);
        complex sum{};
        for (std::size_t m = begin; m < end; ++m) {
            values[m] = value(batch.row(m));
            sum += values[m];
        }
        chunk_sums[chunk] = sum;
    });

    complex total{};
    for (const auto& s : chunk_sums) total += s;
    const double count = static_cast<double>(batch.count);
    const complex mean = total / count;

    std::vector<double> chunk_var_re(n_chunks), chunk_var_im(n_chunks);
    for_each_chunk(n_chunks, threads, [&](std::size_t chunk) {
        const std::size_t begin = chunk * kChunkRows;
        const std::size_t end = std::min(batch.count, begin + kChunkRows);
        double acc_re = 0.0, acc_im = 0.0;
        for (std::size_t m = begin; m < end; ++m) {
            const complex d = values[m] - mean;
            acc_re += d.real() * d.real();
            acc_im += d.imag() * d.imag();
        }
        chunk_var_re[chunk] = acc_re;
        chunk_var_im[chunk] = acc_im;
    });

    McEstimate est;
    est.mean = mean;
    est.count = batch.count;
    if (batch.count > 1) {
        double ss_re = 0.0, ss_im = 0.0;
        for (std::size_t c = 0; c < n_chunks; ++c) {
            ss_re += chunk_var_re[c];
            ss_im += chunk_var_im[c];
        }
        const double var_re = ss_re / (count - 1.0);
        const double var_im = ss_im / (count - 1.0);
        est.std_error = std::sqrt((var_re + var_im) / count);
    }
    return est;
}

McEstimate mc_decoherence(const SystemParams& sys, const EnvironmentSpec& env, double t,
                          const SampleBatch& batch, unsigned threads) {
    require_same_hbar(sys, env);
    if (batch.count == 0) throw EmptyBatch("Monte-Carlo average over an empty batch");
    if (batch.n_modes != env.modes.size()) {
        throw DimensionMismatch("sample batch was drawn for a different number of bath modes");
    }
    return mc_mean(
        batch,
        [&](std::span<const complex> betas) {
            complex f{1.0, 0.0};
            for (std::size_t j = 0; j < betas.size(); ++j) {
                f *= f_beta_mode(betas[j], env.modes[j], sys, t);
            }
            return f;
        },
        threads);
}

McEstimate mc_reduced_amplitude(const SystemParams& sys, const EnvironmentSpec& env, double t,
                                const SampleBatch& batch, unsigned threads) {
    McEstimate est = mc_decoherence(sys, env, t, batch, threads);
    const complex alpha_t = closed_amplitude(sys, t);
    est.mean *= alpha_t;
    est.std_error *= std::abs(alpha_t);
    return est;
}

}  // namespace kerrbath

#include "hmmar/simulator.hpp"

#include "hmmar/errors.hpp"
#include "hmmar/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <thread>

namespace hmmar {

namespace {

std::size_t draw_categorical(CounterRng& rng, const double* probs, std::size_t k, std::ptrdiff_t stride) {
    const double u = rng.next_uniform();
    double cum = 0.0;
    for (std::size_t h = 0; h + 1 < k; ++h) {
        cum += probs[static_cast<std::ptrdiff_t>(h) * stride];
        if (u < cum) return h;
    }
    // Fall through to the last state with positive mass.
    for (std::size_t h = k; h-- > 0;) {
        if (probs[static_cast<std::ptrdiff_t>(h) * stride] > 0.0) return h;
    }
    return k - 1;
}

void check_config(const HmMarModel& model, const SimulationConfig& config) {
    require_valid(model);
    if (config.n == 0) throw Error("simulation length n must be at least 1");
    if (config.initial_regime && *config.initial_regime >= model.k) {
        throw Error("initial regime " + std::to_string(*config.initial_regime) + " out of range [0, " +
                    std::to_string(model.k) + ")");
    }
    if (!config.initial_lags.empty() && config.initial_lags.size() != model.p) {
        throw DimensionMismatch("initial_lags must hold p = " + std::to_string(model.p) + " values");
    }
}

SimulationResult run(const HmMarModel& model, const SimulationConfig& config, CounterRng chain,
                     const std::function<double(std::size_t)>& innovation) {
    check_config(model, config);
    const std::size_t p = model.p;
    const std::size_t k = model.k;

    // history holds y_0..y_{p-1} followed by generated values.
    std::vector<double> history(p, 0.0);
    if (!config.initial_lags.empty()) history = config.initial_lags;
    history.reserve(p + config.n);

    // Transition rows are read with a column stride because Eigen is column-major.
    const std::ptrdiff_t row_stride = model.transition.rows();
    std::size_t regime = config.initial_regime
                             ? *config.initial_regime
                             : draw_categorical(chain, model.rho.data(), k, 1);

    SimulationResult out;
    out.y.reserve(config.n);
    if (config.emit_latent) out.z.emplace().reserve(config.n);

    std::vector<double> lags(p);
    for (std::size_t i = 0; i < config.n; ++i) {
        if (i > 0) {
            const double* row = model.transition.data() + regime;
            regime = draw_categorical(chain, row, k, row_stride);
        }
        const std::size_t t = p + i;
        for (std::size_t j = 0; j < p; ++j) lags[j] = history[t - 1 - j];
        const double mean = model.regime_mean(regime, lags.data());
        const double y = mean + model.sigmas[static_cast<Eigen::Index>(regime)] * innovation(i);
        history.push_back(y);
        out.y.push_back(y);
        if (out.z) out.z->push_back(regime);
    }
    return out;
}

}  // namespace

StreamKeys derive_streams(std::uint64_t seed) {
    return {derive_key(seed, kChainStreamTag), derive_key(seed, kNoiseStreamTag)};
}

SimulationResult simulate(const HmMarModel& model, const SimulationConfig& config) {
    return simulate(model, config, derive_streams(config.seed));
}

SimulationResult simulate(const HmMarModel& model, const SimulationConfig& config, StreamKeys keys) {
    CounterRng noise(keys.noise);
    return run(model, config, CounterRng(keys.chain), [&noise](std::size_t) { return noise.next_gaussian(); });
}

SimulationResult simulate_with_innovations(const HmMarModel& model, const SimulationConfig& config,
                                           std::span<const double> innovations) {
    if (innovations.size() != config.n) {
        throw DimensionMismatch("innovation fixture must hold n values");
    }
    return run(model, config, CounterRng(derive_streams(config.seed).chain),
               [innovations](std::size_t i) { return innovations[i]; });
}

std::uint64_t replicate_seed(std::uint64_t seed, std::size_t index) {
    return derive_key(seed, kReplicateStreamTag + static_cast<std::uint64_t>(index) * CounterRng::kGamma);
}

std::vector<std::vector<double>> simulate_ensemble(const HmMarModel& model, const SimulationConfig& base,
                                                   std::size_t replicates, unsigned threads) {
    std::vector<std::vector<double>> out(replicates);
    threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(1, replicates))));
    auto work = [&](unsigned worker) {
        for (std::size_t r = worker; r < replicates; r += threads) {
            SimulationConfig cfg = base;
            cfg.seed = replicate_seed(base.seed, r);
            cfg.emit_latent = false;
            out[r] = simulate(model, cfg).y;
        }
    };
    if (threads == 1) {
        work(0);
        return out;
    }
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    for (auto& th : pool) th.join();
    return out;
}

EnsembleMoments empirical_moments(const std::vector<std::vector<double>>& ensemble) {
    const std::size_t r = ensemble.size();
    if (r < 2) throw DimensionMismatch("empirical_moments needs at least 2 replicates");
    const std::size_t n = ensemble[0].size();
    if (n == 0) throw DimensionMismatch("replicates are empty");
    for (const auto& row : ensemble) {
        if (row.size() != n) throw DimensionMismatch("replicates have unequal lengths");
    }
    EnsembleMoments m;
    m.mean.assign(n, 0.0);
    m.variance.assign(n, 0.0);
    m.second_moment.assign(n, 0.0);
    const double inv_r = 1.0 / static_cast<double>(r);
    for (std::size_t t = 0; t < n; ++t) {
        double sum = 0.0;
        double sum_sq = 0.0;
        for (std::size_t i = 0; i < r; ++i) {
            sum += ensemble[i][t];
            sum_sq += ensemble[i][t] * ensemble[i][t];
        }
        const double mean = sum * inv_r;
        double var = 0.0;
        for (std::size_t i = 0; i < r; ++i) {
            const double d = ensemble[i][t] - mean;
            var += d * d;
        }
        m.mean[t] = mean;
        m.variance[t] = var * inv_r;
        m.second_moment[t] = sum_sq * inv_r;
    }

    m.tail_window = std::min(n, std::max<std::size_t>(10, n / 10));
    const std::size_t start = n - m.tail_window;
    double sq_var = 0.0;
    for (std::size_t t = start; t < n; ++t) {
        m.tail_mean += m.mean[t];
        m.tail_variance += m.variance[t];
        m.tail_second_moment += m.second_moment[t];
        double v = 0.0;
        for (std::size_t i = 0; i < r; ++i) {
            const double d = ensemble[i][t] * ensemble[i][t] - m.second_moment[t];
            v += d * d;
        }
        sq_var += v * inv_r;
    }
    const double w = static_cast<double>(m.tail_window);
    m.tail_mean /= w;
    m.tail_variance /= w;
    m.tail_second_moment /= w;
    m.tail_mean_stderr = std::sqrt(m.tail_variance * inv_r);
    m.tail_second_moment_stderr = std::sqrt(sq_var / w * inv_r);
    return m;
}

}  // namespace hmmar

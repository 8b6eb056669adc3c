#pragma once

#include "hmmar/model.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace hmmar {

struct SimulationConfig {
    std::size_t n = 1;
    std::uint64_t seed = 0;
    /// y_0..y_{p-1} in time order. Empty means zeros.
    std::vector<double> initial_lags;
    /// Draw Z_p from rho when empty, otherwise start in this regime.
    std::optional<std::size_t> initial_regime;
    bool emit_latent = false;
};

/// Chain and noise substream keys. The two streams never share state, so the
/// regime path is a function of `chain` alone.
struct StreamKeys {
    std::uint64_t chain = 0;
    std::uint64_t noise = 0;
};

StreamKeys derive_streams(std::uint64_t seed);

struct SimulationResult {
    /// The n generated observations y_p, ..., y_{p+n-1}; the prefix is not repeated.
    std::vector<double> y;
    /// Regime of each emitted observation (when emit_latent).
    std::optional<std::vector<std::size_t>> z;
};

SimulationResult simulate(const HmMarModel& model, const SimulationConfig& config);
SimulationResult simulate(const HmMarModel& model, const SimulationConfig& config, StreamKeys keys);

/// Uses `innovations` (length n) in place of the noise stream.
SimulationResult simulate_with_innovations(const HmMarModel& model, const SimulationConfig& config,
                                           std::span<const double> innovations);

struct EnsembleMoments {
    std::vector<double> mean;           // per t, across replicates
    std::vector<double> variance;       // per t, population convention (divide by R)
    std::vector<double> second_moment;  // per t, mean of y^2
    std::size_t tail_window = 0;        // max(10, n / 10), capped at n
    double tail_mean = 0.0;
    double tail_variance = 0.0;
    double tail_second_moment = 0.0;
    /// sqrt(tail_variance / R): Monte Carlo standard error of tail_mean.
    double tail_mean_stderr = 0.0;
    /// Standard error of tail_second_moment from the cross-replicate spread of y^2.
    double tail_second_moment_stderr = 0.0;
};

/// Cross-sectional moments of an R x n ensemble (rows are replicates).
EnsembleMoments empirical_moments(const std::vector<std::vector<double>>& ensemble);

/// R replicates with seeds derived from `seed`, run on up to `threads` workers.
std::vector<std::vector<double>> simulate_ensemble(const HmMarModel& model,
                                                   const SimulationConfig& base, std::size_t replicates,
                                                   unsigned threads = 1);

/// Seed of replicate `index` in an ensemble with master `seed`.
std::uint64_t replicate_seed(std::uint64_t seed, std::size_t index);

}  // namespace hmmar

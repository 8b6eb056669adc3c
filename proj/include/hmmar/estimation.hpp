#pragma once

#include "hmmar/model.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace hmmar {

enum class FitMode {
    Hmm,  // free transition matrix
    Iid,  // all transition rows tied (the classical mixture AR model)
};

FitMode parse_fit_mode(const std::string& name);
std::string to_string(FitMode mode);

struct FitConfig {
    std::size_t k = 2;
    std::size_t p = 1;
    FitMode mode = FitMode::Hmm;
    int max_iter = 500;
    double tol = 1e-8;
    int restarts = 10;
    std::uint64_t seed = 0;
};

/// Smoothed posteriors over the modeled indices t = p..n-1 (row i is t = p + i).
struct Posteriors {
    Eigen::MatrixXd smoothed;               // (n - p) x k
    std::vector<Eigen::MatrixXd> pairwise;  // n - p - 1 slices, each k x k
    double log_likelihood = 0.0;
};

/// Scaled forward-backward pass. Requires n >= p + 2.
Posteriors forward_backward(const HmMarModel& model, std::span<const double> series);

struct EmStep {
    HmMarModel model;       // updated parameters
    double log_likelihood;  // of the input parameters
};

/// Minimum responsibility mass a regime must carry in the M-step.
inline constexpr double kMinRegimeMass = 1e-8;
/// Lower bound on fitted noise scales.
inline constexpr double kSigmaFloor = 1e-6;

/// One EM iteration. Throws DegenerateRegime when a regime's responsibility
/// mass falls below kMinRegimeMass or its weighted normal equations are singular.
EmStep em_step(const HmMarModel& model, std::span<const double> series, FitMode mode);

struct EmRun {
    HmMarModel model;
    std::vector<double> loglik_trace;  // log-likelihood of each iterate, starting with the initial model
    bool converged = false;
    int iterations = 0;
};

/// Iterates em_step from `initial` until the improvement drops below tol or
/// max_iter steps have run. No restarts, no relabeling.
EmRun run_em(const HmMarModel& initial, std::span<const double> series, FitMode mode, int max_iter,
             double tol);

struct FitResult {
    HmMarModel model;
    std::vector<double> loglik_trace;
    Posteriors posteriors;
    bool converged = false;
    int iterations_used = 0;
    int restart_index = 0;  // == restarts when the hmm fit won from the iid optimum
    bool iid_warm_start = false;
    std::vector<std::string> restart_failures;  // one entry per failed restart, "" when it succeeded
};

/// Least-squares AR(p) fit pooled over all of y_p..y_{n-1}.
struct PooledAr {
    Eigen::VectorXd coeffs;     // intercept first
    Eigen::VectorXd std_errors;
    double residual_sd = 0.0;
};
PooledAr fit_pooled_ar(std::span<const double> series, std::size_t p);

/// Seeded starting point for restart `restart` (see README for the scheme).
HmMarModel initial_model(const PooledAr& pooled, const FitConfig& config, int restart);

/// Data-driven start used for odd restarts: pooled residuals plus seeded
/// jitter are ranked and cut into k equal groups, and each regime is fitted
/// by least squares on its group. Transition and rho follow initial_model.
HmMarModel residual_split_model(std::span<const double> series, const PooledAr& pooled, const FitConfig& config,
                                int restart);

/// Relabels regimes by ascending lag-1 coefficient, ties by ascending sigma
/// (intercept then sigma when p = 0). Returns the permutation applied.
std::vector<std::size_t> canonical_order(const HmMarModel& model);

/// Multi-restart EM. Requires n >= (p + 1) k + 5. In hmm mode (k > 1) the
/// best iid fit for the same config is one more starting point.
FitResult fit(std::span<const double> series, const FitConfig& config);

nlohmann::json diagnostics_to_json(const FitResult& result, const FitConfig& config);

}  // namespace hmmar

#pragma once

// Brute-force reference computations for small instances. Everything here
// works on explicit latent paths or the literal joint-density recursion in
// long double, and shares no code with the filtering, smoothing, or
// linear-algebra routines it is used to check.

#include "hmmar/model.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace hmmar::oracles {

using Real = long double;

/// E[a_{1,Z_2} ... a_{1,Z_n} | Z_1 = k] for each k, summed over all K^{n-1} paths.
std::vector<Real> enumerate_product_expectation(const Eigen::MatrixXd& transition,
                                                const Eigen::VectorXd& phi1, int n);

/// E[a_{0,Z_1} a_{1,Z_2} ... a_{1,Z_n}] with Z_1 ~ mu, summed over all K^n paths.
Real enumerate_weighted_product(const Eigen::MatrixXd& transition, const Eigen::VectorXd& phi0,
                                const Eigen::VectorXd& phi1, const Eigen::VectorXd& mu, int n);

/// Mixture weights alpha^(t) = P(Z_t = . | y_0..y_{t-1}) for t = p..n-1 from
/// the unnormalized joint densities F(y_p..y_t, Z_t = h | y_0..y_{p-1}).
std::vector<std::vector<Real>> unscaled_forward_weights(const HmMarModel& model, std::span<const double> series);

struct PathPosteriors {
    Real likelihood = 0;                            // sum over paths of the joint density
    std::vector<std::vector<Real>> weights;         // alpha^(t), t = p..n-1
    std::vector<std::vector<Real>> smoothed;        // gamma, (n - p) x K
    std::vector<std::vector<std::vector<Real>>> pairwise;  // xi, (n - p - 1) x K x K
};

/// Enumerates all K^{n-p} latent paths. Intended for n - p <= 12.
PathPosteriors enumerate_paths(const HmMarModel& model, std::span<const double> series);

/// Random valid model with entries drawn from a seeded stream: coefficients
/// in (-0.9, 0.9), sigmas in (0.5, 2), strictly positive stochastic rows.
HmMarModel random_model(std::size_t k, std::size_t p, std::uint64_t seed);

/// Random series of length n from a seeded stream, values in (-3, 3).
std::vector<double> random_series(std::size_t n, std::uint64_t seed);

}  // namespace hmmar::oracles

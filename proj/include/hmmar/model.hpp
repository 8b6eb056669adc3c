#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace hmmar {

/// Structural tolerance for stochastic rows and probability vectors.
inline constexpr double kStructuralTol = 1e-12;
/// Tolerance on ||mu' P - mu'||_inf for an invariant measure.
inline constexpr double kFixedPointTol = 1e-10;

/// Hidden Markov mixture of K Gaussian AR(p) regimes.
///
/// Time indexing is 0-based: the series is y_0, ..., y_{n-1}, the first p
/// values are conditioning lags, and the latent chain starts at Z_p with
/// P(Z_p = h) = rho[h]. Row h of `coeffs` is (a_{0,h}, a_{1,h}, ..., a_{p,h});
/// column 0 is the intercept.
struct HmMarModel {
    std::size_t k = 0;
    std::size_t p = 0;
    Eigen::MatrixXd coeffs;      // k x (p + 1)
    Eigen::VectorXd sigmas;      // k
    Eigen::MatrixXd transition;  // k x k, row-stochastic; (i, j) = P(Z_t = j | Z_{t-1} = i)
    Eigen::VectorXd rho;         // k

    /// Conditional mean of regime h given lags (lags[0] = y_{t-1}, ..., lags[p-1] = y_{t-p}).
    double regime_mean(std::size_t h, const double* lags) const;

    /// True when every transition row is bitwise identical (the iid / MAR case).
    bool has_identical_rows() const;
};

struct Violation {
    std::string field;  // e.g. "transition[0]", "sigmas[1]"
    std::string message;
    double magnitude = 0.0;
};

using ValidationReport = std::vector<Violation>;

/// Lists every invariant violation. Empty iff the model is valid.
ValidationReport validate(const HmMarModel& model);

/// Throws InvalidModel with all violations joined if the report is non-empty.
void require_valid(const HmMarModel& model);

std::string format_report(const ValidationReport& report);

/// Invariant measure of a row-stochastic matrix.
///
/// Solves (P' - I) mu = 0 with the last equation replaced by sum(mu) = 1.
/// Throws NonErgodicChain when that system is singular (no unique measure).
Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transition);

/// Diagonal ingredients of the first-order moment recursions. Diagonal
/// matrices are stored as their diagonals; the phi entries and lambda are
/// populated only for p = 1.
struct DerivedMatrices {
    std::optional<Eigen::VectorXd> phi0;      // intercepts a_{0,h}
    std::optional<Eigen::VectorXd> phi1;      // lag-1 coefficients a_{1,h}
    std::optional<Eigen::VectorXd> phi1_abs;  // |a_{1,h}|
    Eigen::VectorXd sigma_diag;
    Eigen::VectorXd mu;
    /// max_k sum_j pi_{k,j} a_{1,j}^2, the largest conditional second moment
    /// of the next lag-1 coefficient.
    std::optional<double> lambda;
};

DerivedMatrices derive_matrices(const HmMarModel& model);

/// Same as derive_matrices but throws UnsupportedOrder unless p = 1.
DerivedMatrices derive_stability_matrices(const HmMarModel& model);

/// Model with regimes relabeled so that new regime i is old regime perm[i].
HmMarModel permute_regimes(const HmMarModel& model, const std::vector<std::size_t>& perm);

}  // namespace hmmar

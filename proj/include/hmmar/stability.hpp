#pragma once

#include "hmmar/model.hpp"

#include <nlohmann/json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace hmmar {

/// A spectral radius counts as inside the unit circle only below this.
inline constexpr double kUnitCircleMargin = 1e-12;
/// Linear solves with reciprocal condition below 1 / kConditionWarning warn.
inline constexpr double kConditionWarning = 1e12;

/// Matrices of a first-order model, as used by the moment recursions.
struct StabilityInputs {
    Eigen::MatrixXd transition;
    Eigen::VectorXd phi0;  // intercepts
    Eigen::VectorXd phi1;  // lag-1 coefficients
    Eigen::VectorXd sigma;
    Eigen::VectorXd mu;
    double lambda = 0.0;

    static StabilityInputs from_model(const HmMarModel& model);
};

/// Largest eigenvalue modulus of a dense square matrix.
double spectral_radius(const Eigen::MatrixXd& m);

enum class RadiusClass { Inside, Boundary, Outside };
RadiusClass classify_radius(double radius);

/// Vector whose entry k is E[a_{1,Z_2} ... a_{1,Z_n} | Z_1 = k], i.e.
/// (P phi1)^{n-1} 1, built by n - 1 matrix-vector products.
Eigen::VectorXd product_expectation_vector(const Eigen::MatrixXd& transition, const Eigen::VectorXd& phi1,
                                           int n);

/// E[a_{0,Z_1} a_{1,Z_2} ... a_{1,Z_n}] for a chain started in mu.
double weighted_product_expectation(const Eigen::MatrixXd& transition, const Eigen::VectorXd& phi0,
                                    const Eigen::VectorXd& phi1, const Eigen::VectorXd& mu, int n);

struct SolveOutcome {
    double value = 0.0;
    double rcond = 1.0;
};

/// lim E[Y_t] = mu' phi0 (I - P phi1)^{-1} 1. Throws ConditionViolated unless
/// the spectral radius of P phi1 is inside the unit circle.
SolveOutcome limiting_mean(const StabilityInputs& in);

/// Upper bound on lim E[Y_t^2]:
///   2 ((1 + mu' phi0^2 1) / (1 - sqrt(lambda)))^2 + mu' sigma^2 (I - P phi1^2)^{-1} 1.
/// Requires lambda < 1 and radius(P phi1^2) < 1.
SolveOutcome second_moment_bound(const StabilityInputs& in);

/// second_moment_bound - limiting_mean^2.
double variance_bound(const StabilityInputs& in);

struct StabilityReport {
    Eigen::VectorXd mu;
    double rho_pphi1 = 0.0;
    double rho_pphi1sq = 0.0;
    double rho_pphi1abs = 0.0;
    double lambda = 0.0;
    std::optional<double> mean_limit;
    std::optional<double> second_moment_bound;
    std::optional<double> variance_bound;
    std::string mean_limit_reason;
    std::string second_moment_reason;
    std::string variance_reason;
    bool theorem1_applicable = false;  // mean stability
    bool theorem2_applicable = false;  // finite second moment with bound
    bool theorem3_applicable = false;  // limit and expectation interchange
    std::vector<std::string> warnings;
};

/// Throws UnsupportedOrder unless model.p == 1.
StabilityReport analyze(const HmMarModel& model);

nlohmann::json report_to_json(const StabilityReport& report);

}  // namespace hmmar

#include "hmmar/stability.hpp"

#include "hmmar/errors.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace hmmar {

namespace {

std::string describe(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// Solves (I - P diag(d)) x = 1 and returns the reciprocal condition estimate.
Eigen::VectorXd solve_resolvent(const Eigen::MatrixXd& transition, const Eigen::VectorXd& d, double& rcond) {
    const Eigen::Index k = transition.rows();
    const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(k, k) - transition * d.asDiagonal();
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
    rcond = lu.rcond();
    return lu.solve(Eigen::VectorXd::Ones(k));
}

void require_inside(const char* name, double radius) {
    if (classify_radius(radius) != RadiusClass::Inside) throw ConditionViolated(name, radius);
}

}  // namespace

StabilityInputs StabilityInputs::from_model(const HmMarModel& model) {
    const DerivedMatrices d = derive_stability_matrices(model);
    StabilityInputs in;
    in.transition = model.transition;
    in.phi0 = *d.phi0;
    in.phi1 = *d.phi1;
    in.sigma = d.sigma_diag;
    in.mu = d.mu;
    in.lambda = *d.lambda;
    return in;
}

double spectral_radius(const Eigen::MatrixXd& m) {
    if (m.rows() == 0) return 0.0;
    if (m.rows() == 1) return std::fabs(m(0, 0));
    Eigen::EigenSolver<Eigen::MatrixXd> solver(m, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success) throw Error("eigenvalue iteration did not converge");
    return solver.eigenvalues().cwiseAbs().maxCoeff();
}

RadiusClass classify_radius(double radius) {
    if (radius < 1.0 - kUnitCircleMargin) return RadiusClass::Inside;
    if (radius <= 1.0 + kUnitCircleMargin) return RadiusClass::Boundary;
    return RadiusClass::Outside;
}

Eigen::VectorXd product_expectation_vector(const Eigen::MatrixXd& transition, const Eigen::VectorXd& phi1,
                                           int n) {
    if (n < 2) throw Error("product_expectation_vector needs n >= 2");
    if (transition.rows() != phi1.size() || transition.cols() != phi1.size()) {
        throw DimensionMismatch("transition and phi1 sizes differ");
    }
    Eigen::VectorXd v = Eigen::VectorXd::Ones(phi1.size());
    for (int step = 1; step < n; ++step) v = transition * phi1.cwiseProduct(v);
    return v;
}

double weighted_product_expectation(const Eigen::MatrixXd& transition, const Eigen::VectorXd& phi0,
                                    const Eigen::VectorXd& phi1, const Eigen::VectorXd& mu, int n) {
    const Eigen::VectorXd v = product_expectation_vector(transition, phi1, n);
    return mu.dot(phi0.cwiseProduct(v));
}

SolveOutcome limiting_mean(const StabilityInputs& in) {
    const double radius = spectral_radius(in.transition * in.phi1.asDiagonal());
    require_inside("spectral radius of P*phi1 < 1", radius);
    SolveOutcome out;
    const Eigen::VectorXd x = solve_resolvent(in.transition, in.phi1, out.rcond);
    out.value = in.mu.dot(in.phi0.cwiseProduct(x));
    return out;
}

SolveOutcome second_moment_bound(const StabilityInputs& in) {
    if (!(in.lambda < 1.0)) throw ConditionViolated("lambda < 1", in.lambda);
    const Eigen::VectorXd phi1_sq = in.phi1.cwiseAbs2();
    const double radius = spectral_radius(in.transition * phi1_sq.asDiagonal());
    require_inside("spectral radius of P*phi1^2 < 1", radius);

    SolveOutcome out;
    const Eigen::VectorXd x = solve_resolvent(in.transition, phi1_sq, out.rcond);
    const double intercept_moment = in.mu.dot(in.phi0.cwiseAbs2());
    const double ratio = (1.0 + intercept_moment) / (1.0 - std::sqrt(in.lambda));
    const double noise_term = in.mu.dot(in.sigma.cwiseAbs2().cwiseProduct(x));
    out.value = 2.0 * ratio * ratio + noise_term;
    return out;
}

double variance_bound(const StabilityInputs& in) {
    const double mean = limiting_mean(in).value;
    return second_moment_bound(in).value - mean * mean;
}

StabilityReport analyze(const HmMarModel& model) {
    const StabilityInputs in = StabilityInputs::from_model(model);
    StabilityReport r;
    r.mu = in.mu;
    r.lambda = in.lambda;
    r.rho_pphi1 = spectral_radius(in.transition * in.phi1.asDiagonal());
    r.rho_pphi1sq = spectral_radius(in.transition * in.phi1.cwiseAbs2().asDiagonal());
    r.rho_pphi1abs = spectral_radius(in.transition * in.phi1.cwiseAbs().asDiagonal());

    auto note_boundary = [&r](const char* name, double radius) {
        if (classify_radius(radius) == RadiusClass::Boundary) {
            r.warnings.push_back(std::string("spectral radius of ") + name + " = " + describe(radius) +
                                 " is within 1e-12 of the unit circle; treated as indeterminate");
        }
    };
    note_boundary("P*phi1", r.rho_pphi1);
    note_boundary("P*phi1^2", r.rho_pphi1sq);
    note_boundary("P*|phi1|", r.rho_pphi1abs);

    const bool mean_ok = classify_radius(r.rho_pphi1) == RadiusClass::Inside;
    const bool sq_ok = classify_radius(r.rho_pphi1sq) == RadiusClass::Inside;
    const bool lambda_ok = r.lambda < 1.0;
    const bool abs_ok = classify_radius(r.rho_pphi1abs) == RadiusClass::Inside;

    auto check_rcond = [&r](const char* what, double rcond) {
        if (rcond * kConditionWarning < 1.0) {
            r.warnings.push_back(std::string(what) + ": linear system is ill-conditioned (rcond " +
                                 describe(rcond) + ")");
        }
    };

    if (mean_ok) {
        const SolveOutcome m = limiting_mean(in);
        r.mean_limit = m.value;
        check_rcond("mean_limit", m.rcond);
    } else {
        r.mean_limit_reason = "spectral radius of P*phi1 = " + describe(r.rho_pphi1) + " is not < 1";
    }

    if (lambda_ok && sq_ok) {
        const SolveOutcome b = second_moment_bound(in);
        r.second_moment_bound = b.value;
        check_rcond("second_moment_bound", b.rcond);
    } else if (!lambda_ok) {
        r.second_moment_reason = "lambda = " + describe(r.lambda) + " is not < 1";
    } else {
        r.second_moment_reason = "spectral radius of P*phi1^2 = " + describe(r.rho_pphi1sq) + " is not < 1";
    }

    if (r.mean_limit && r.second_moment_bound) {
        r.variance_bound = *r.second_moment_bound - *r.mean_limit * *r.mean_limit;
    } else {
        r.variance_reason = !r.mean_limit ? r.mean_limit_reason : r.second_moment_reason;
    }

    r.theorem1_applicable = mean_ok && sq_ok;
    r.theorem2_applicable = r.theorem1_applicable && lambda_ok;
    r.theorem3_applicable = r.theorem2_applicable && abs_ok;
    return r;
}

nlohmann::json report_to_json(const StabilityReport& r) {
    using nlohmann::json;
    json doc = json::object();
    json mu = json::array();
    for (Eigen::Index i = 0; i < r.mu.size(); ++i) mu.push_back(r.mu[i]);
    doc["mu"] = mu;
    doc["rho_Pphi1"] = r.rho_pphi1;
    doc["rho_Pphi1sq"] = r.rho_pphi1sq;
    doc["rho_Pphi1abs"] = r.rho_pphi1abs;
    doc["lambda"] = r.lambda;
    auto bound = [](const std::optional<double>& v, const std::string& reason) {
        json b = json::object();
        if (v) {
            b["value"] = *v;
        } else {
            b["value"] = nullptr;
            b["reason"] = reason;
        }
        return b;
    };
    doc["mean_limit"] = bound(r.mean_limit, r.mean_limit_reason);
    doc["second_moment_bound"] = bound(r.second_moment_bound, r.second_moment_reason);
    doc["variance_bound"] = bound(r.variance_bound, r.variance_reason);
    doc["flags"] = {{"theorem1_applicable", r.theorem1_applicable},
                    {"theorem2_applicable", r.theorem2_applicable},
                    {"theorem3_applicable", r.theorem3_applicable}};
    doc["warnings"] = r.warnings;
    return doc;
}

}  // namespace hmmar

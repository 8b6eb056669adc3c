#include "hmmar/model.hpp"

#include "hmmar/errors.hpp"

#include <cmath>
#include <sstream>

namespace hmmar {

namespace {

std::string fmt(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

void check_probability_vector(const Eigen::VectorXd& v, const std::string& name,
                              const std::string& sum_message_prefix, ValidationReport& out) {
    for (Eigen::Index j = 0; j < v.size(); ++j) {
        const double x = v[j];
        if (!std::isfinite(x) || x < 0.0 || x > 1.0) {
            out.push_back({name + "[" + std::to_string(j) + "]",
                           name + "[" + std::to_string(j) + "] = " + fmt(x) + " not in [0, 1]",
                           std::isfinite(x) ? std::fmax(-x, x - 1.0) : x});
        }
    }
    const double sum = v.sum();
    if (!(std::fabs(sum - 1.0) <= kStructuralTol)) {
        out.push_back({name, sum_message_prefix + " sums to " + fmt(sum), sum - 1.0});
    }
}

}  // namespace

double HmMarModel::regime_mean(std::size_t h, const double* lags) const {
    const auto row = static_cast<Eigen::Index>(h);
    double m = coeffs(row, 0);
    for (std::size_t i = 1; i <= p; ++i) {
        m += coeffs(row, static_cast<Eigen::Index>(i)) * lags[i - 1];
    }
    return m;
}

bool HmMarModel::has_identical_rows() const {
    for (Eigen::Index i = 1; i < transition.rows(); ++i) {
        for (Eigen::Index j = 0; j < transition.cols(); ++j) {
            if (transition(i, j) != transition(0, j)) return false;
        }
    }
    return true;
}

ValidationReport validate(const HmMarModel& m) {
    ValidationReport out;
    const auto k = static_cast<Eigen::Index>(m.k);
    const auto width = static_cast<Eigen::Index>(m.p + 1);

    if (m.k == 0) {
        out.push_back({"k", "k must be positive", 0.0});
        return out;
    }
    if (m.coeffs.rows() != k || m.coeffs.cols() != width) {
        out.push_back({"coeffs",
                       "coeffs is " + std::to_string(m.coeffs.rows()) + "x" +
                           std::to_string(m.coeffs.cols()) + ", expected " + std::to_string(k) +
                           "x" + std::to_string(width),
                       static_cast<double>(m.coeffs.size())});
    } else if (!m.coeffs.allFinite()) {
        out.push_back({"coeffs", "coeffs contain non-finite values", 0.0});
    }

    if (m.sigmas.size() != k) {
        out.push_back({"sigmas", "sigmas has " + std::to_string(m.sigmas.size()) +
                                     " entries, expected " + std::to_string(k),
                       static_cast<double>(m.sigmas.size())});
    } else {
        for (Eigen::Index h = 0; h < k; ++h) {
            const double s = m.sigmas[h];
            if (!(s > 0.0) || !std::isfinite(s)) {
                out.push_back({"sigmas[" + std::to_string(h) + "]",
                               "sigma[" + std::to_string(h) + "] not strictly positive", s});
            }
        }
    }

    if (m.transition.rows() != k || m.transition.cols() != k) {
        out.push_back({"transition",
                       "transition is " + std::to_string(m.transition.rows()) + "x" +
                           std::to_string(m.transition.cols()) + ", expected " +
                           std::to_string(k) + "x" + std::to_string(k),
                       static_cast<double>(m.transition.size())});
    } else {
        for (Eigen::Index i = 0; i < k; ++i) {
            const std::string name = "transition[" + std::to_string(i) + "]";
            Eigen::VectorXd row = m.transition.row(i).transpose();
            check_probability_vector(row, name, "row " + std::to_string(i), out);
        }
    }

    if (m.rho.size() != k) {
        out.push_back({"rho", "rho has " + std::to_string(m.rho.size()) + " entries, expected " +
                                  std::to_string(k),
                       static_cast<double>(m.rho.size())});
    } else {
        check_probability_vector(m.rho, "rho", "rho", out);
    }
    return out;
}

std::string format_report(const ValidationReport& report) {
    std::ostringstream os;
    for (std::size_t i = 0; i < report.size(); ++i) {
        if (i) os << "; ";
        os << report[i].field << ": " << report[i].message;
    }
    return os.str();
}

void require_valid(const HmMarModel& model) {
    const auto report = validate(model);
    if (!report.empty()) throw InvalidModel("invalid model: " + format_report(report));
}

Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& transition) {
    const Eigen::Index k = transition.rows();
    if (k == 0 || transition.cols() != k) {
        throw DimensionMismatch("transition matrix must be square and non-empty");
    }
    Eigen::MatrixXd system = transition.transpose() - Eigen::MatrixXd::Identity(k, k);
    system.row(k - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
    rhs[k - 1] = 1.0;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
    lu.setThreshold(1e-12);
    if (lu.rank() < k) {
        throw NonErgodicChain("transition matrix has no unique invariant measure (rank " +
                              std::to_string(lu.rank()) + " of " + std::to_string(k) + ")");
    }
    Eigen::VectorXd mu = lu.solve(rhs);
    // Clip round-off negatives and renormalize.
    mu = mu.cwiseMax(0.0);
    mu /= mu.sum();
    return mu;
}

DerivedMatrices derive_matrices(const HmMarModel& model) {
    require_valid(model);
    DerivedMatrices d;
    d.sigma_diag = model.sigmas;
    d.mu = stationary_distribution(model.transition);
    if (model.p == 1) {
        Eigen::VectorXd a0 = model.coeffs.col(0);
        Eigen::VectorXd a1 = model.coeffs.col(1);
        d.phi0 = a0;
        d.phi1 = a1;
        d.phi1_abs = a1.cwiseAbs();
        d.lambda = (model.transition * a1.cwiseAbs2()).maxCoeff();
    }
    return d;
}

DerivedMatrices derive_stability_matrices(const HmMarModel& model) {
    if (model.p != 1) throw UnsupportedOrder(model.p);
    return derive_matrices(model);
}

HmMarModel permute_regimes(const HmMarModel& model, const std::vector<std::size_t>& perm) {
    if (perm.size() != model.k) throw DimensionMismatch("permutation size differs from k");
    HmMarModel out = model;
    for (std::size_t i = 0; i < model.k; ++i) {
        const auto ni = static_cast<Eigen::Index>(i);
        const auto oi = static_cast<Eigen::Index>(perm[i]);
        out.coeffs.row(ni) = model.coeffs.row(oi);
        out.sigmas[ni] = model.sigmas[oi];
        out.rho[ni] = model.rho[oi];
        for (std::size_t j = 0; j < model.k; ++j) {
            out.transition(ni, static_cast<Eigen::Index>(j)) =
                model.transition(oi, static_cast<Eigen::Index>(perm[j]));
        }
    }
    return out;
}

}  // namespace hmmar

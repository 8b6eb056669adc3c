#include "hmmar/oracles/enumeration.hpp"

#include "hmmar/rng.hpp"

#include <cmath>

namespace hmmar::oracles {

namespace {

Real density(Real x, Real mean, Real sd) {
    const Real pi = 3.141592653589793238462643383279502884L;
    const Real z = (x - mean) / sd;
    return std::exp(-z * z / 2) / (sd * std::sqrt(2 * pi));
}

Real regime_mean(const HmMarModel& m, std::size_t h, std::span<const double> series, std::size_t t) {
    Real mean = m.coeffs(static_cast<Eigen::Index>(h), 0);
    for (std::size_t i = 1; i <= m.p; ++i) {
        mean += static_cast<Real>(m.coeffs(static_cast<Eigen::Index>(h), static_cast<Eigen::Index>(i))) *
                series[t - i];
    }
    return mean;
}

Real emission(const HmMarModel& m, std::size_t h, std::span<const double> series, std::size_t t) {
    return density(series[t], regime_mean(m, h, series, t), m.sigmas[static_cast<Eigen::Index>(h)]);
}

Real pi_at(const Eigen::MatrixXd& p, std::size_t i, std::size_t j) {
    return p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
}

// Advances a base-k odometer; returns false after the last path.
bool next_path(std::vector<std::size_t>& path, std::size_t k) {
    for (std::size_t i = path.size(); i-- > 0;) {
        if (++path[i] < k) return true;
        path[i] = 0;
    }
    return false;
}

}  // namespace

std::vector<Real> enumerate_product_expectation(const Eigen::MatrixXd& transition, const Eigen::VectorXd& phi1,
                                                int n) {
    const auto k = static_cast<std::size_t>(phi1.size());
    std::vector<Real> out(k, 0);
    for (std::size_t start = 0; start < k; ++start) {
        std::vector<std::size_t> path(static_cast<std::size_t>(n - 1), 0);  // Z_2..Z_n
        do {
            Real prob = 1;
            Real prod = 1;
            std::size_t prev = start;
            for (std::size_t z : path) {
                prob *= pi_at(transition, prev, z);
                prod *= phi1[static_cast<Eigen::Index>(z)];
                prev = z;
            }
            out[start] += prob * prod;
        } while (next_path(path, k));
    }
    return out;
}

Real enumerate_weighted_product(const Eigen::MatrixXd& transition, const Eigen::VectorXd& phi0,
                                const Eigen::VectorXd& phi1, const Eigen::VectorXd& mu, int n) {
    const auto k = static_cast<std::size_t>(phi1.size());
    Real total = 0;
    std::vector<std::size_t> path(static_cast<std::size_t>(n), 0);  // Z_1..Z_n
    do {
        Real prob = mu[static_cast<Eigen::Index>(path[0])];
        Real prod = phi0[static_cast<Eigen::Index>(path[0])];
        for (std::size_t i = 1; i < path.size(); ++i) {
            prob *= pi_at(transition, path[i - 1], path[i]);
            prod *= phi1[static_cast<Eigen::Index>(path[i])];
        }
        total += prob * prod;
    } while (next_path(path, k));
    return total;
}

std::vector<std::vector<Real>> unscaled_forward_weights(const HmMarModel& m, std::span<const double> series) {
    const std::size_t k = m.k;
    std::vector<std::vector<Real>> weights;
    // alpha^(p) = rho; then F_t(h) = sum_m F_{t-1}(m) pi_{m,h} f_h(y_t),
    // F_p(h) = rho_h f_h(y_p), and alpha^(t)_h = sum_m F_{t-1}(m) pi_{m,h} / sum_m F_{t-1}(m).
    std::vector<Real> rho(k);
    for (std::size_t h = 0; h < k; ++h) rho[h] = m.rho[static_cast<Eigen::Index>(h)];
    weights.push_back(rho);
    std::vector<Real> joint(k);
    for (std::size_t h = 0; h < k; ++h) joint[h] = rho[h] * emission(m, h, series, m.p);
    for (std::size_t t = m.p + 1; t < series.size(); ++t) {
        Real total = 0;
        for (Real v : joint) total += v;
        std::vector<Real> alpha(k, 0);
        std::vector<Real> next(k, 0);
        for (std::size_t h = 0; h < k; ++h) {
            Real s = 0;
            for (std::size_t j = 0; j < k; ++j) s += joint[j] * pi_at(m.transition, j, h);
            alpha[h] = s / total;
            next[h] = s * emission(m, h, series, t);
        }
        weights.push_back(alpha);
        joint = next;
    }
    return weights;
}

PathPosteriors enumerate_paths(const HmMarModel& m, std::span<const double> series) {
    const std::size_t k = m.k;
    const std::size_t steps = series.size() - m.p;
    PathPosteriors out;
    out.smoothed.assign(steps, std::vector<Real>(k, 0));
    out.pairwise.assign(steps > 0 ? steps - 1 : 0, std::vector<std::vector<Real>>(k, std::vector<Real>(k, 0)));

    // Full-path joint densities for gamma, xi, and the likelihood.
    std::vector<std::size_t> path(steps, 0);
    do {
        Real joint = m.rho[static_cast<Eigen::Index>(path[0])] * emission(m, path[0], series, m.p);
        for (std::size_t i = 1; i < steps; ++i) {
            joint *= pi_at(m.transition, path[i - 1], path[i]) * emission(m, path[i], series, m.p + i);
        }
        out.likelihood += joint;
        for (std::size_t i = 0; i < steps; ++i) out.smoothed[i][path[i]] += joint;
        for (std::size_t i = 0; i + 1 < steps; ++i) out.pairwise[i][path[i]][path[i + 1]] += joint;
    } while (next_path(path, k));
    for (auto& row : out.smoothed) {
        for (Real& v : row) v /= out.likelihood;
    }
    for (auto& slice : out.pairwise) {
        for (auto& row : slice) {
            for (Real& v : row) v /= out.likelihood;
        }
    }

    // Predictive weights from prefix paths z_p..z_{t-1} and one more transition.
    out.weights.emplace_back(k);
    for (std::size_t h = 0; h < k; ++h) out.weights[0][h] = m.rho[static_cast<Eigen::Index>(h)];
    for (std::size_t len = 1; len < steps; ++len) {
        std::vector<Real> alpha(k, 0);
        Real total = 0;
        std::vector<std::size_t> prefix(len, 0);
        do {
            Real joint = m.rho[static_cast<Eigen::Index>(prefix[0])] * emission(m, prefix[0], series, m.p);
            for (std::size_t i = 1; i < len; ++i) {
                joint *= pi_at(m.transition, prefix[i - 1], prefix[i]) * emission(m, prefix[i], series, m.p + i);
            }
            total += joint;
            for (std::size_t h = 0; h < k; ++h) alpha[h] += joint * pi_at(m.transition, prefix[len - 1], h);
        } while (next_path(prefix, k));
        for (Real& v : alpha) v /= total;
        out.weights.push_back(alpha);
    }
    return out;
}

HmMarModel random_model(std::size_t k, std::size_t p, std::uint64_t seed) {
    CounterRng rng(derive_key(seed, 0x6F7261636C65ULL));
    auto uniform = [&rng](double lo, double hi) { return lo + (hi - lo) * rng.next_uniform(); };
    const auto kk = static_cast<Eigen::Index>(k);
    HmMarModel m;
    m.k = k;
    m.p = p;
    m.coeffs.resize(kk, static_cast<Eigen::Index>(p + 1));
    m.sigmas.resize(kk);
    m.transition.resize(kk, kk);
    m.rho.resize(kk);
    for (Eigen::Index h = 0; h < kk; ++h) {
        for (Eigen::Index j = 0; j <= static_cast<Eigen::Index>(p); ++j) m.coeffs(h, j) = uniform(-0.9, 0.9);
        m.sigmas[h] = uniform(0.5, 2.0);
        for (Eigen::Index j = 0; j < kk; ++j) m.transition(h, j) = uniform(0.05, 1.0);
        m.transition.row(h) /= m.transition.row(h).sum();
        m.rho[h] = uniform(0.05, 1.0);
    }
    m.rho /= m.rho.sum();
    return m;
}

std::vector<double> random_series(std::size_t n, std::uint64_t seed) {
    CounterRng rng(derive_key(seed, 0x736572696573ULL));
    std::vector<double> y(n);
    for (double& v : y) v = -3.0 + 6.0 * rng.next_uniform();
    return y;
}

}  // namespace hmmar::oracles

#pragma once

// Reference models and small independent oracles shared by the tests. None of
// the oracles call into the library's numerical routines.

#include "hmmar/model.hpp"

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace hmmar::ref {

inline HmMarModel make_model(std::size_t k, std::size_t p, const std::vector<std::vector<double>>& coeffs,
                             const std::vector<double>& sigmas, const std::vector<std::vector<double>>& transition,
                             const std::vector<double>& rho) {
    HmMarModel m;
    m.k = k;
    m.p = p;
    m.coeffs.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(p + 1));
    m.sigmas.resize(static_cast<Eigen::Index>(k));
    m.transition.resize(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    m.rho.resize(static_cast<Eigen::Index>(k));
    for (std::size_t h = 0; h < k; ++h) {
        const auto hi = static_cast<Eigen::Index>(h);
        for (std::size_t j = 0; j <= p; ++j) m.coeffs(hi, static_cast<Eigen::Index>(j)) = coeffs[h][j];
        for (std::size_t j = 0; j < k; ++j) m.transition(hi, static_cast<Eigen::Index>(j)) = transition[h][j];
        m.sigmas[hi] = sigmas[h];
        m.rho[hi] = rho[h];
    }
    return m;
}

/// Two-state invariant measure in closed form.
inline std::vector<double> two_state_stationary(double p12, double p21) {
    return {p21 / (p12 + p21), p12 / (p12 + p21)};
}

/// Data-generating model of the mixture experiment: two AR(2) regimes.
inline HmMarModel two_regime_ar2() {
    return make_model(2, 2, {{0.0, 0.7, 0.2}, {0.0, 0.5, 0.2}}, {1.0, 1.0},
                      {{0.8077, 0.1923}, {0.7619, 0.2381}}, {1.0, 0.0});
}

/// First-order reference model A: distinct intercepts, both regimes stable.
inline HmMarModel reference_a() {
    const auto mu = two_state_stationary(0.1, 0.2);
    return make_model(2, 1, {{1.0, 0.5}, {-1.0, 0.3}}, {1.0, 1.0}, {{0.9, 0.1}, {0.2, 0.8}}, mu);
}

/// Reference model B: regime 0 is explosive on its own (a1 = 1.2) but the
/// chain leaves it quickly enough for every moment condition to hold.
inline HmMarModel reference_b() {
    const auto mu = two_state_stationary(0.7, 0.6);
    return make_model(2, 1, {{0.5, 1.2}, {1.0, 0.1}}, {1.0, 0.5}, {{0.3, 0.7}, {0.6, 0.4}}, mu);
}

/// Reference model C: the AR(1) reduction of the mixture experiment model.
inline HmMarModel reference_c() {
    const auto mu = two_state_stationary(0.1923, 0.7619);
    return make_model(2, 1, {{0.0, 0.7}, {0.0, 0.5}}, {1.0, 1.0}, {{0.8077, 0.1923}, {0.7619, 0.2381}}, mu);
}

/// Standard normal CDF from the Maclaurin series of erf, 50 terms, long double.
inline long double series_normal_cdf(long double x) {
    const long double z = x / std::sqrt(2.0L);
    long double term = z;  // z^(2n+1) (-1)^n / n!
    long double sum = 0.0L;
    for (int n = 0; n < 50; ++n) {
        sum += term / static_cast<long double>(2 * n + 1);
        term *= -z * z / static_cast<long double>(n + 1);
    }
    const long double pi = 3.141592653589793238462643383279502884L;
    return 0.5L + sum / std::sqrt(pi);
}

/// Spectral radius of a 2x2 matrix from its characteristic polynomial.
inline double radius_2x2(double a, double b, double c, double d) {
    const std::complex<double> tr = a + d;
    const std::complex<double> det = a * d - b * c;
    const std::complex<double> disc = std::sqrt(tr * tr - 4.0 * det);
    return std::max(std::abs((tr + disc) / 2.0), std::abs((tr - disc) / 2.0));
}

/// mu' phi0 sum_{j=0}^{terms-1} (P phi1)^j 1 by repeated multiplication.
inline long double truncated_mean_series(const std::vector<std::vector<double>>& transition,
                                         const std::vector<double>& phi0, const std::vector<double>& phi1,
                                         const std::vector<double>& mu, int terms) {
    const std::size_t k = phi0.size();
    std::vector<long double> v(k, 1.0L);
    std::vector<long double> acc(k, 0.0L);
    for (int j = 0; j < terms; ++j) {
        for (std::size_t i = 0; i < k; ++i) acc[i] += v[i];
        std::vector<long double> next(k, 0.0L);
        for (std::size_t i = 0; i < k; ++i) {
            for (std::size_t l = 0; l < k; ++l) next[i] += transition[i][l] * phi1[l] * v[l];
        }
        v = next;
    }
    long double out = 0.0L;
    for (std::size_t i = 0; i < k; ++i) out += mu[i] * phi0[i] * acc[i];
    return out;
}

/// Conditional least squares AR(p) on y_p..y_{n-1} via Gauss-Jordan on the
/// normal equations in long double. Returns (intercept, a_1, ..., a_p).
inline std::vector<long double> ols_ar(const std::vector<double>& y, std::size_t p) {
    const std::size_t d = p + 1;
    std::vector<std::vector<long double>> a(d, std::vector<long double>(d + 1, 0.0L));
    for (std::size_t t = p; t < y.size(); ++t) {
        std::vector<long double> x(d, 1.0L);
        for (std::size_t i = 1; i <= p; ++i) x[i] = y[t - i];
        for (std::size_t i = 0; i < d; ++i) {
            for (std::size_t j = 0; j < d; ++j) a[i][j] += x[i] * x[j];
            a[i][d] += x[i] * y[t];
        }
    }
    for (std::size_t c = 0; c < d; ++c) {
        std::size_t piv = c;
        for (std::size_t r = c + 1; r < d; ++r) {
            if (std::fabs(a[r][c]) > std::fabs(a[piv][c])) piv = r;
        }
        std::swap(a[c], a[piv]);
        for (std::size_t r = 0; r < d; ++r) {
            if (r == c) continue;
            const long double f = a[r][c] / a[c][c];
            for (std::size_t j = c; j <= d; ++j) a[r][j] -= f * a[c][j];
        }
    }
    std::vector<long double> beta(d);
    for (std::size_t i = 0; i < d; ++i) beta[i] = a[i][d] / a[i][i];
    return beta;
}

}  // namespace hmmar::ref

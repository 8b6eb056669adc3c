#pragma once

namespace hmmar {

/// Standard normal distribution function, 0.5 * erfc(-x / sqrt(2)).
double gaussian_cdf(double x);

/// Density of N(mean, sd^2) at x.
double gaussian_pdf(double x, double mean, double sd);

/// Log-density of N(mean, sd^2) at x. Finite for every finite input.
double gaussian_log_pdf(double x, double mean, double sd);

/// Quantile function of the standard normal for u in (0, 1).
///
/// Starts from a rational approximation and polishes it with Newton steps on
/// gaussian_cdf until the step falls below 1e-14 (relative to max(1, |x|)).
/// The upper half is obtained by reflection so tail accuracy is symmetric.
double inverse_gaussian_cdf(double u);

}  // namespace hmmar

#include "hmmar/normal.hpp"

#include <cmath>
#include <limits>

namespace hmmar {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

// Acklam's rational approximation, relative error about 1e-9. Only used as a
// Newton starting point.
double quantile_initial_guess(double u) {
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                   -2.759285104469687e+02, 1.383577518672690e+02,
                                   -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                   -1.556989798598866e+02, 6.680131188771972e+01,
                                   -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                   -2.400758277161838e+00, -2.549732539343734e+00,
                                   4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                   2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double low = 0.02425;

    if (u < low) {
        const double q = std::sqrt(-2.0 * std::log(u));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = u - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Lower half only: u <= 0.5, so gaussian_cdf is evaluated where erfc keeps
// full relative precision.
double lower_quantile(double u) {
    double x = quantile_initial_guess(u);
    for (int iter = 0; iter < 50; ++iter) {
        const double density = std::exp(-0.5 * x * x - kLogSqrt2Pi);
        if (density <= 0.0) break;
        const double step = (gaussian_cdf(x) - u) / density;
        x -= step;
        if (std::fabs(step) <= 1e-14 * std::fmax(1.0, std::fabs(x))) break;
    }
    return x;
}

}  // namespace

double gaussian_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double gaussian_pdf(double x, double mean, double sd) {
    return std::exp(gaussian_log_pdf(x, mean, sd));
}

double gaussian_log_pdf(double x, double mean, double sd) {
    const double z = (x - mean) / sd;
    return -0.5 * z * z - std::log(sd) - kLogSqrt2Pi;
}

double inverse_gaussian_cdf(double u) {
    if (!(u > 0.0 && u < 1.0)) {
        if (u == 0.0) return -std::numeric_limits<double>::infinity();
        if (u == 1.0) return std::numeric_limits<double>::infinity();
        return std::numeric_limits<double>::quiet_NaN();
    }
    if (u <= 0.5) return lower_quantile(u);
    return -lower_quantile(1.0 - u);
}

}  // namespace hmmar

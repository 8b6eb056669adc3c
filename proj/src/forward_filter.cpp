#include "hmmar/forward_filter.hpp"

#include "hmmar/errors.hpp"
#include "hmmar/normal.hpp"

#include <cmath>
#include <limits>

namespace hmmar {

namespace {

void check_lags(const HmMarModel& model, std::span<const double> lags, const char* what) {
    if (lags.size() != model.p) {
        throw DimensionMismatch(std::string(what) + ": expected " + std::to_string(model.p) +
                                " lags, got " + std::to_string(lags.size()));
    }
}

std::vector<double> propagate(const HmMarModel& model, const std::vector<double>& filtered) {
    const std::size_t k = model.k;
    std::vector<double> out(k, 0.0);
    if (model.has_identical_rows()) {
        // Predictive weights do not depend on the data.
        for (std::size_t h = 0; h < k; ++h) out[h] = model.transition(0, static_cast<Eigen::Index>(h));
        return out;
    }
    for (std::size_t m = 0; m < k; ++m) {
        const double w = filtered[m];
        if (w == 0.0) continue;
        for (std::size_t h = 0; h < k; ++h) {
            out[h] += w * model.transition(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(h));
        }
    }
    double total = 0.0;
    for (double v : out) total += v;
    for (double& v : out) v /= total;
    return out;
}

}  // namespace

std::vector<double> lags_at(std::span<const double> series, std::size_t t, std::size_t p) {
    std::vector<double> lags(p);
    for (std::size_t i = 0; i < p; ++i) lags[i] = series[t - 1 - i];
    return lags;
}

ForwardState init_filter(const HmMarModel& model, std::span<const double> prefix) {
    if (prefix.size() != model.p) {
        throw DimensionMismatch("prefix must hold exactly p = " + std::to_string(model.p) +
                                " values, got " + std::to_string(prefix.size()));
    }
    ForwardState s;
    s.t = static_cast<long>(model.p) - 1;
    s.alpha_predictive.assign(model.rho.data(), model.rho.data() + model.rho.size());
    s.log_likelihood = 0.0;
    return s;
}

ForwardState filter_step(const ForwardState& state, const HmMarModel& model, double y_new,
                         std::span<const double> lags) {
    check_lags(model, lags, "filter_step");
    const long t = state.t + 1;
    const std::size_t k = model.k;
    if (!std::isfinite(y_new)) throw NumericalUnderflow(t, "observation is not finite");

    std::vector<double> log_w(k);
    double max_log = -std::numeric_limits<double>::infinity();
    for (std::size_t h = 0; h < k; ++h) {
        const double a = state.alpha_predictive[h];
        if (a <= 0.0) {
            log_w[h] = -std::numeric_limits<double>::infinity();
            continue;
        }
        const double mean = model.regime_mean(h, lags.data());
        log_w[h] = std::log(a) + gaussian_log_pdf(y_new, mean, model.sigmas[static_cast<Eigen::Index>(h)]);
        if (log_w[h] > max_log) max_log = log_w[h];
    }
    if (!std::isfinite(max_log)) throw NumericalUnderflow(t, "all regime densities vanish");

    ForwardState next;
    next.t = t;
    next.alpha_filtered.resize(k);
    double total = 0.0;
    for (std::size_t h = 0; h < k; ++h) {
        next.alpha_filtered[h] = std::exp(log_w[h] - max_log);
        total += next.alpha_filtered[h];
    }
    for (double& v : next.alpha_filtered) v /= total;
    next.log_likelihood = state.log_likelihood + max_log + std::log(total);
    next.alpha_predictive = propagate(model, next.alpha_filtered);
    return next;
}

ConditionalForecast forecast_one_step(const ForwardState& state, const HmMarModel& model,
                                      std::span<const double> lags) {
    check_lags(model, lags, "forecast_one_step");
    const std::size_t k = model.k;
    ConditionalForecast f;
    f.regime_means.resize(k);
    double mean = 0.0;
    double noise = 0.0;
    for (std::size_t h = 0; h < k; ++h) {
        const double a = state.alpha_predictive[h];
        const double s = model.sigmas[static_cast<Eigen::Index>(h)];
        f.regime_means[h] = model.regime_mean(h, lags.data());
        mean += a * f.regime_means[h];
        noise += a * s * s;
    }
    // Dispersion of the regime means around the mixture mean; equal to
    // sum(a * m^2) - mean^2 but never negative.
    double dispersion = 0.0;
    for (std::size_t h = 0; h < k; ++h) {
        const double d = f.regime_means[h] - mean;
        dispersion += state.alpha_predictive[h] * d * d;
    }
    f.mean = mean;
    f.variance = noise + dispersion;
    return f;
}

RollingForecast rolling_forecast(const HmMarModel& model, std::span<const double> series) {
    const std::size_t p = model.p;
    if (series.size() < p + 1) {
        throw InsufficientData("rolling_forecast needs at least p + 1 = " + std::to_string(p + 1) +
                               " observations");
    }
    RollingForecast out;
    ForwardState state = init_filter(model, series.first(p));
    out.records.reserve(series.size() - p);
    for (std::size_t t = p; t < series.size(); ++t) {
        const auto lags = lags_at(series, t, p);
        ForecastRecord rec;
        rec.t = static_cast<long>(t);
        rec.y = series[t];
        rec.forecast = forecast_one_step(state, model, lags);
        rec.abs_error = std::fabs(rec.y - rec.forecast.mean);
        out.total_abs_error += rec.abs_error;
        out.records.push_back(std::move(rec));
        state = filter_step(state, model, series[t], lags);
    }
    out.log_likelihood = state.log_likelihood;
    return out;
}

}  // namespace hmmar

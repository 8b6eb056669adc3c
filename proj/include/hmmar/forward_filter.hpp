#pragma once

#include "hmmar/model.hpp"

#include <span>
#include <vector>

namespace hmmar {

/// Scaled forward recursion state after absorbing y_p, ..., y_t.
///
/// `alpha_predictive` is the mixture weight vector used to forecast y_{t+1}.
/// `alpha_filtered` is empty until the first observation has been absorbed.
struct ForwardState {
    long t = -1;
    std::vector<double> alpha_filtered;
    std::vector<double> alpha_predictive;
    /// log density of y_p..y_t given y_0..y_{p-1}.
    double log_likelihood = 0.0;
};

struct ConditionalForecast {
    std::vector<double> regime_means;
    double mean = 0.0;
    double variance = 0.0;
};

/// Lags are ordered newest first: lags[0] = y_{t-1}, lags[p-1] = y_{t-p}.
ForwardState init_filter(const HmMarModel& model, std::span<const double> prefix);

/// Absorbs y_new. Densities are combined in log space, so only non-finite
/// data can raise NumericalUnderflow.
ForwardState filter_step(const ForwardState& state, const HmMarModel& model, double y_new,
                         std::span<const double> lags);

/// One-step predictive mean and variance from state.alpha_predictive.
ConditionalForecast forecast_one_step(const ForwardState& state, const HmMarModel& model,
                                      std::span<const double> lags);

struct ForecastRecord {
    long t = 0;
    double y = 0.0;
    ConditionalForecast forecast;
    double abs_error = 0.0;
};

struct RollingForecast {
    std::vector<ForecastRecord> records;  // one per t in [p, n-1]
    double total_abs_error = 0.0;
    double log_likelihood = 0.0;
};

/// Forecasts every y_t, t >= p, from y_0..y_{t-1}, then absorbs y_t.
RollingForecast rolling_forecast(const HmMarModel& model, std::span<const double> series);

/// Lag window for time t (newest first).
std::vector<double> lags_at(std::span<const double> series, std::size_t t, std::size_t p);

}  // namespace hmmar

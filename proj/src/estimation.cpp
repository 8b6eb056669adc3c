#include "hmmar/estimation.hpp"

#include "hmmar/errors.hpp"
#include "hmmar/forward_filter.hpp"
#include "hmmar/normal.hpp"
#include "hmmar/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>

namespace hmmar {

namespace {

constexpr double kNormalEquationRcond = 1e-14;

// Regressor row (1, y_{t-1}, ..., y_{t-p}).
Eigen::VectorXd regressors(std::span<const double> series, std::size_t t, std::size_t p) {
    Eigen::VectorXd x(static_cast<Eigen::Index>(p + 1));
    x[0] = 1.0;
    for (std::size_t i = 1; i <= p; ++i) x[static_cast<Eigen::Index>(i)] = series[t - i];
    return x;
}

Eigen::MatrixXd log_emissions(const HmMarModel& model, std::span<const double> series) {
    const std::size_t p = model.p;
    const std::size_t steps = series.size() - p;
    Eigen::MatrixXd out(static_cast<Eigen::Index>(steps), static_cast<Eigen::Index>(model.k));
    for (std::size_t i = 0; i < steps; ++i) {
        const std::size_t t = p + i;
        if (!std::isfinite(series[t])) throw NumericalUnderflow(static_cast<long>(t), "observation is not finite");
        const auto lags = lags_at(series, t, p);
        for (std::size_t h = 0; h < model.k; ++h) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(h)) = gaussian_log_pdf(
                series[t], model.regime_mean(h, lags.data()), model.sigmas[static_cast<Eigen::Index>(h)]);
        }
    }
    return out;
}

void validate_fit_config(const FitConfig& c) {
    if (c.k == 0) throw Error("k must be positive");
    if (!(c.tol > 0.0)) throw Error("tol must be positive");
    if (c.restarts < 1) throw Error("restarts must be at least 1");
    if (c.max_iter < 1) throw Error("max_iter must be at least 1");
}

std::uint64_t restart_key(std::uint64_t seed, int restart) {
    return derive_key(seed, kRestartStreamTag + static_cast<std::uint64_t>(restart) * CounterRng::kGamma);
}

Eigen::RowVectorXd sticky_row(CounterRng& rng, std::size_t k, std::size_t diag) {
    Eigen::RowVectorXd row(static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < k; ++j) row[static_cast<Eigen::Index>(j)] = rng.next_uniform();
    row /= row.sum();
    row *= 0.2;
    row[static_cast<Eigen::Index>(diag)] += 0.8;
    return row / row.sum();
}

Eigen::VectorXd perturbed_coeffs(const PooledAr& pooled, CounterRng& rng) {
    Eigen::VectorXd c = pooled.coeffs;
    for (Eigen::Index i = 0; i < c.size(); ++i) c[i] += 0.25 * pooled.std_errors[i] * rng.next_gaussian();
    return c;
}

// Fresh parameters for regime h after it collapsed; every row is blended with
// the uniform distribution so that h is reachable again.
HmMarModel reseed_regime(const HmMarModel& model, std::size_t h, const PooledAr& pooled, FitMode mode,
                         CounterRng& rng) {
    HmMarModel out = model;
    const auto hi = static_cast<Eigen::Index>(h);
    const auto k = static_cast<Eigen::Index>(model.k);
    out.coeffs.row(hi) = perturbed_coeffs(pooled, rng).transpose();
    out.sigmas[hi] = pooled.residual_sd;
    out.transition.row(hi) = sticky_row(rng, model.k, h);
    out.transition = 0.9 * out.transition + Eigen::MatrixXd::Constant(k, k, 0.1 / static_cast<double>(k));
    for (Eigen::Index i = 0; i < k; ++i) out.transition.row(i) /= out.transition.row(i).sum();
    if (mode == FitMode::Iid) {
        const Eigen::RowVectorXd mean_row = out.transition.colwise().mean();
        for (Eigen::Index i = 0; i < k; ++i) out.transition.row(i) = mean_row;
    }
    out.rho = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
    return out;
}

struct RestartOutcome {
    EmRun run;
    std::string failure;
};

}  // namespace

FitMode parse_fit_mode(const std::string& name) {
    if (name == "hmm") return FitMode::Hmm;
    if (name == "iid") return FitMode::Iid;
    throw Error("unknown fit mode '" + name + "' (expected hmm or iid)");
}

std::string to_string(FitMode mode) { return mode == FitMode::Hmm ? "hmm" : "iid"; }

Posteriors forward_backward(const HmMarModel& model, std::span<const double> series) {
    require_valid(model);
    const std::size_t p = model.p;
    if (series.size() < p + 2) {
        throw InsufficientData("forward_backward needs at least p + 2 = " + std::to_string(p + 2) +
                               " observations");
    }
    const auto k = static_cast<Eigen::Index>(model.k);
    const auto steps = static_cast<Eigen::Index>(series.size() - p);
    const Eigen::MatrixXd log_e = log_emissions(model, series);
    const Eigen::MatrixXd& trans = model.transition;

    Eigen::MatrixXd fwd(steps, k);
    Eigen::MatrixXd emis(steps, k);  // exp(log_e - shift_t)
    Eigen::VectorXd scale(steps);
    double loglik = 0.0;
    Eigen::RowVectorXd pred = model.rho.transpose();
    for (Eigen::Index t = 0; t < steps; ++t) {
        double shift = -std::numeric_limits<double>::infinity();
        for (Eigen::Index h = 0; h < k; ++h) {
            if (pred[h] > 0.0) shift = std::max(shift, log_e(t, h));
        }
        if (!std::isfinite(shift)) throw NumericalUnderflow(static_cast<long>(p) + t, "predictive weights vanish");
        for (Eigen::Index h = 0; h < k; ++h) emis(t, h) = std::exp(log_e(t, h) - shift);
        fwd.row(t) = pred.cwiseProduct(emis.row(t));
        scale[t] = fwd.row(t).sum();
        fwd.row(t) /= scale[t];
        loglik += shift + std::log(scale[t]);
        pred = fwd.row(t) * trans;
    }

    Eigen::MatrixXd bwd(steps, k);
    bwd.row(steps - 1).setOnes();
    for (Eigen::Index t = steps - 2; t >= 0; --t) {
        const Eigen::VectorXd next = emis.row(t + 1).transpose().cwiseProduct(bwd.row(t + 1).transpose());
        bwd.row(t) = (trans * next).transpose() / scale[t + 1];
    }

    Posteriors out;
    out.log_likelihood = loglik;
    out.smoothed.resize(steps, k);
    for (Eigen::Index t = 0; t < steps; ++t) {
        Eigen::RowVectorXd g = fwd.row(t).cwiseProduct(bwd.row(t));
        out.smoothed.row(t) = g / g.sum();
    }
    out.pairwise.reserve(static_cast<std::size_t>(steps - 1));
    for (Eigen::Index t = 0; t + 1 < steps; ++t) {
        const Eigen::RowVectorXd right = emis.row(t + 1).cwiseProduct(bwd.row(t + 1));
        Eigen::MatrixXd xi = fwd.row(t).transpose().asDiagonal() * trans * right.asDiagonal();
        out.pairwise.push_back(xi / xi.sum());
    }
    return out;
}

EmStep em_step(const HmMarModel& model, std::span<const double> series, FitMode mode) {
    const Posteriors post = forward_backward(model, series);
    const std::size_t p = model.p;
    const auto k = static_cast<Eigen::Index>(model.k);
    const auto width = static_cast<Eigen::Index>(p + 1);
    const auto steps = post.smoothed.rows();

    EmStep out{model, post.log_likelihood};
    HmMarModel& next = out.model;

    for (Eigen::Index h = 0; h < k; ++h) {
        const double mass = post.smoothed.col(h).sum();
        if (!(mass >= kMinRegimeMass)) {
            throw DegenerateRegime(static_cast<std::size_t>(h), "responsibility mass " + std::to_string(mass));
        }
        Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(width, width);
        Eigen::VectorXd moment = Eigen::VectorXd::Zero(width);
        for (Eigen::Index i = 0; i < steps; ++i) {
            const std::size_t t = p + static_cast<std::size_t>(i);
            const double w = post.smoothed(i, h);
            const Eigen::VectorXd x = regressors(series, t, p);
            gram.noalias() += w * x * x.transpose();
            moment.noalias() += (w * series[t]) * x;
        }
        Eigen::LDLT<Eigen::MatrixXd> ldlt(gram);
        if (ldlt.info() != Eigen::Success || !(ldlt.rcond() > kNormalEquationRcond)) {
            throw DegenerateRegime(static_cast<std::size_t>(h), "weighted normal equations are singular");
        }
        const Eigen::VectorXd beta = ldlt.solve(moment);
        double rss = 0.0;
        for (Eigen::Index i = 0; i < steps; ++i) {
            const std::size_t t = p + static_cast<std::size_t>(i);
            const double r = series[t] - regressors(series, t, p).dot(beta);
            rss += post.smoothed(i, h) * r * r;
        }
        next.coeffs.row(h) = beta.transpose();
        next.sigmas[h] = std::max(std::sqrt(rss / mass), kSigmaFloor);
    }

    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(k, k);
    for (const auto& xi : post.pairwise) counts += xi;
    if (mode == FitMode::Hmm) {
        for (Eigen::Index i = 0; i < k; ++i) {
            const double row_mass = counts.row(i).sum();
            if (row_mass > 0.0) next.transition.row(i) = counts.row(i) / row_mass;
        }
    } else {
        // Tied rows: the maximizer is the average occupancy of Z_{p+1}..Z_{n-1}.
        const Eigen::RowVectorXd occupancy = counts.colwise().sum();
        const Eigen::RowVectorXd row = occupancy / occupancy.sum();
        for (Eigen::Index i = 0; i < k; ++i) next.transition.row(i) = row;
    }
    next.rho = post.smoothed.row(0).transpose();
    return out;
}

EmRun run_em(const HmMarModel& initial, std::span<const double> series, FitMode mode, int max_iter, double tol) {
    EmRun run;
    EmStep step = em_step(initial, series, mode);
    run.model = initial;
    run.loglik_trace.push_back(step.log_likelihood);
    for (int it = 1; it <= max_iter; ++it) {
        HmMarModel candidate = std::move(step.model);
        step = em_step(candidate, series, mode);
        const double previous = run.loglik_trace.back();
        run.loglik_trace.push_back(step.log_likelihood);
        run.model = std::move(candidate);
        run.iterations = it;
        if (step.log_likelihood - previous < tol) {
            run.converged = true;
            break;
        }
    }
    return run;
}

PooledAr fit_pooled_ar(std::span<const double> series, std::size_t p) {
    if (series.size() < p + 2) throw InsufficientData("pooled AR fit needs at least p + 2 observations");
    const auto width = static_cast<Eigen::Index>(p + 1);
    const auto steps = static_cast<Eigen::Index>(series.size() - p);
    Eigen::MatrixXd design(steps, width);
    Eigen::VectorXd target(steps);
    for (Eigen::Index i = 0; i < steps; ++i) {
        const std::size_t t = p + static_cast<std::size_t>(i);
        design.row(i) = regressors(series, t, p).transpose();
        target[i] = series[t];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    qr.setThreshold(1e-10);
    if (qr.rank() < width) throw DegenerateRegime(0, "pooled AR design matrix is rank deficient");

    PooledAr out;
    out.coeffs = qr.solve(target);
    const Eigen::VectorXd resid = target - design * out.coeffs;
    const double rss = resid.squaredNorm();
    out.residual_sd = std::sqrt(rss / static_cast<double>(steps));
    const double scale = std::max(1.0, target.cwiseAbs().maxCoeff());
    if (!(out.residual_sd > 1e-12 * scale)) throw DegenerateRegime(0, "pooled AR residuals vanish");

    const double dof = static_cast<double>(std::max<Eigen::Index>(1, steps - width));
    const Eigen::MatrixXd cov = (design.transpose() * design).inverse() * (rss / dof);
    out.std_errors = cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    return out;
}

HmMarModel initial_model(const PooledAr& pooled, const FitConfig& config, int restart) {
    CounterRng rng(restart_key(config.seed, restart));
    const std::size_t k = config.k;
    const auto kk = static_cast<Eigen::Index>(k);
    HmMarModel m;
    m.k = k;
    m.p = config.p;
    m.coeffs.resize(kk, static_cast<Eigen::Index>(config.p + 1));
    m.sigmas.resize(kk);
    m.transition.resize(kk, kk);
    for (std::size_t h = 0; h < k; ++h) {
        const auto hi = static_cast<Eigen::Index>(h);
        m.coeffs.row(hi) = perturbed_coeffs(pooled, rng).transpose();
        // Stratified log-uniform factors covering [0.5, 2].
        const double u = (static_cast<double>(h) + rng.next_uniform()) / static_cast<double>(k);
        m.sigmas[hi] = pooled.residual_sd * 0.5 * std::pow(4.0, u);
        m.transition.row(hi) = sticky_row(rng, k, h);
    }
    if (config.mode == FitMode::Iid) {
        // Start from a point inside the constrained family.
        const Eigen::RowVectorXd mean_row = m.transition.colwise().mean();
        for (Eigen::Index i = 0; i < kk; ++i) m.transition.row(i) = mean_row;
    }
    m.rho = Eigen::VectorXd::Constant(kk, 1.0 / static_cast<double>(k));
    return m;
}

HmMarModel residual_split_model(std::span<const double> series, const PooledAr& pooled, const FitConfig& config,
                                int restart) {
    HmMarModel m = initial_model(pooled, config, restart);
    // Independent of the draws made by initial_model and by regime reseeding.
    CounterRng rng(restart_key(config.seed, restart), 1u << 21);
    const std::size_t p = config.p;
    const std::size_t steps = series.size() - p;
    std::vector<double> score(steps);
    for (std::size_t i = 0; i < steps; ++i) {
        const std::size_t t = p + i;
        const double resid = series[t] - regressors(series, t, p).dot(pooled.coeffs);
        score[i] = resid + 0.5 * pooled.residual_sd * rng.next_gaussian();
    }
    std::vector<std::size_t> order(steps);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return score[a] < score[b]; });

    const auto width = static_cast<Eigen::Index>(p + 1);
    for (std::size_t h = 0; h < config.k; ++h) {
        const std::size_t lo = h * steps / config.k;
        const std::size_t hi = (h + 1) * steps / config.k;
        const auto rows = static_cast<Eigen::Index>(hi - lo);
        if (rows < width + 1) continue;
        Eigen::MatrixXd design(rows, width);
        Eigen::VectorXd target(rows);
        for (Eigen::Index r = 0; r < rows; ++r) {
            const std::size_t t = p + order[lo + static_cast<std::size_t>(r)];
            design.row(r) = regressors(series, t, p).transpose();
            target[r] = series[t];
        }
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
        qr.setThreshold(1e-10);
        if (qr.rank() < width) continue;
        const Eigen::VectorXd beta = qr.solve(target);
        const double sd = std::sqrt((target - design * beta).squaredNorm() / static_cast<double>(rows));
        if (!(sd > kSigmaFloor)) continue;
        const auto hh = static_cast<Eigen::Index>(h);
        m.coeffs.row(hh) = beta.transpose();
        m.sigmas[hh] = sd;
    }
    return m;
}

std::vector<std::size_t> canonical_order(const HmMarModel& model) {
    std::vector<std::size_t> order(model.k);
    std::iota(order.begin(), order.end(), std::size_t{0});
    const Eigen::Index key_col = model.p >= 1 ? 1 : 0;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const double ka = model.coeffs(static_cast<Eigen::Index>(a), key_col);
        const double kb = model.coeffs(static_cast<Eigen::Index>(b), key_col);
        if (ka != kb) return ka < kb;
        return model.sigmas[static_cast<Eigen::Index>(a)] < model.sigmas[static_cast<Eigen::Index>(b)];
    });
    return order;
}

FitResult fit(std::span<const double> series, const FitConfig& config) {
    validate_fit_config(config);
    const std::size_t needed = (config.p + 1) * config.k + 5;
    if (series.size() < needed) {
        throw InsufficientData("fit needs at least (p + 1) k + 5 = " + std::to_string(needed) +
                               " observations, got " + std::to_string(series.size()));
    }
    for (std::size_t i = 0; i < series.size(); ++i) {
        if (!std::isfinite(series[i])) throw Error("series value " + std::to_string(i) + " is not finite");
    }

    const auto restarts = static_cast<std::size_t>(config.restarts);
    std::optional<PooledAr> pooled;
    try {
        pooled = fit_pooled_ar(series, config.p);
    } catch (const DegenerateRegime& e) {
        throw AllRestartsFailed(std::vector<std::string>(restarts, e.what()));
    }

    std::vector<RestartOutcome> outcomes(restarts);
    for (std::size_t r = 0; r < restarts; ++r) {
        const int restart = static_cast<int>(r);
        HmMarModel start = r % 2 == 0 ? initial_model(*pooled, config, restart)
                                      : residual_split_model(series, *pooled, config, restart);
        // The reseed stream continues past the draws used by initial_model.
        CounterRng reseed_rng(restart_key(config.seed, restart), 1u << 20);
        bool reseeded = false;
        while (true) {
            try {
                outcomes[r].run = run_em(start, series, config.mode, config.max_iter, config.tol);
                break;
            } catch (const DegenerateRegime& e) {
                if (reseeded) {
                    outcomes[r].failure = e.what();
                    break;
                }
                reseeded = true;
                start = reseed_regime(start, e.regime, *pooled, config.mode, reseed_rng);
            } catch (const NumericalUnderflow& e) {
                outcomes[r].failure = e.what();
                break;
            }
        }
    }

    // In hmm mode the constrained optimum is also a candidate starting point,
    // so the unconstrained fit can never end below the iid fit on the same data.
    if (config.mode == FitMode::Hmm && config.k > 1) {
        RestartOutcome warm;
        try {
            FitConfig tied = config;
            tied.mode = FitMode::Iid;
            const FitResult constrained = fit(series, tied);
            warm.run = run_em(constrained.model, series, FitMode::Hmm, config.max_iter, config.tol);
        } catch (const AllRestartsFailed&) {
            warm.failure = "iid warm start unavailable: every iid restart failed";
        } catch (const DegenerateRegime& e) {
            warm.failure = e.what();
        } catch (const NumericalUnderflow& e) {
            warm.failure = e.what();
        }
        outcomes.push_back(std::move(warm));
    }

    std::optional<std::size_t> best;
    for (std::size_t r = 0; r < outcomes.size(); ++r) {
        if (!outcomes[r].failure.empty()) continue;
        if (!best || outcomes[r].run.loglik_trace.back() > outcomes[*best].run.loglik_trace.back()) best = r;
    }
    std::vector<std::string> failures;
    for (std::size_t r = 0; r < restarts; ++r) failures.push_back(outcomes[r].failure);
    if (!best) throw AllRestartsFailed(failures);

    const EmRun& win = outcomes[*best].run;
    FitResult result;
    result.model = permute_regimes(win.model, canonical_order(win.model));
    result.loglik_trace = win.loglik_trace;
    result.converged = win.converged;
    result.iterations_used = win.iterations;
    result.restart_index = static_cast<int>(*best);
    result.iid_warm_start = *best == restarts;
    result.restart_failures = std::move(failures);
    result.posteriors = forward_backward(result.model, series);
    return result;
}

nlohmann::json diagnostics_to_json(const FitResult& result, const FitConfig& config) {
    nlohmann::json doc = nlohmann::json::object();
    doc["mode"] = to_string(config.mode);
    doc["k"] = config.k;
    doc["p"] = config.p;
    doc["seed"] = config.seed;
    doc["loglik_trace"] = result.loglik_trace;
    doc["final_loglik"] = result.loglik_trace.empty() ? 0.0 : result.loglik_trace.back();
    doc["converged"] = result.converged;
    doc["iterations_used"] = result.iterations_used;
    doc["restart_index"] = result.restart_index;
    doc["iid_warm_start"] = result.iid_warm_start;
    doc["restart_failures"] = result.restart_failures;
    return doc;
}

}  // namespace hmmar

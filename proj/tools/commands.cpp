#include "commands.hpp"

#include "hmmar/benchmark.hpp"
#include "hmmar/errors.hpp"
#include "hmmar/estimation.hpp"
#include "hmmar/forward_filter.hpp"
#include "hmmar/json_io.hpp"
#include "hmmar/oracles/enumeration.hpp"
#include "hmmar/rng.hpp"
#include "hmmar/series_io.hpp"
#include "hmmar/simulator.hpp"
#include "hmmar/stability.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <ostream>
#include <sstream>

namespace hmmar::cli {

namespace {

constexpr double kOracleTol = 1e-9;
constexpr std::size_t kOracleMaxK = 3;
constexpr std::size_t kOracleMaxN = 12;

/// Failure with a fixed exit code (usage errors detected after parsing).
struct CommandError {
    int code;
    std::string message;
};

HmMarModel load_valid_model(const std::string& path) {
    HmMarModel m = load_model(path);
    require_valid(m);
    return m;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string model;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    std::string out;
    bool emit_latent = false;
    std::optional<std::size_t> regime;
    std::vector<double> initial_lags;
    std::size_t replicates = 0;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
    const HmMarModel model = load_valid_model(a.model);
    SimulationConfig cfg;
    cfg.n = a.n;
    cfg.seed = a.seed;
    cfg.emit_latent = a.emit_latent;
    cfg.initial_regime = a.regime;
    cfg.initial_lags = a.initial_lags;

    if (a.replicates == 0) {
        const SimulationResult r = simulate(model, cfg);
        atomic_write_file(a.out, series_to_csv(r.y, r.z));
        out << "wrote " << r.y.size() << " observations to " << a.out << '\n';
        return kOk;
    }
    std::error_code ec;
    std::filesystem::create_directories(a.out, ec);
    if (ec) throw IoError("cannot create directory '" + a.out + "'");
    for (std::size_t i = 0; i < a.replicates; ++i) {
        SimulationConfig rc = cfg;
        rc.seed = replicate_seed(a.seed, i);
        const SimulationResult r = simulate(model, rc);
        const auto path = std::filesystem::path(a.out) / ("rep_" + std::to_string(i) + ".csv");
        atomic_write_file(path.string(), series_to_csv(r.y, r.z));
    }
    out << "wrote " << a.replicates << " replicates to " << a.out << '\n';
    return kOk;
}

// --------------------------------------------------------------------- fit

struct FitArgs {
    std::string series;
    std::string out;
    std::string diagnostics;
    std::string posteriors;
    std::size_t k = 0;
    std::size_t p = 0;
    std::string mode = "hmm";
    std::uint64_t seed = 0;
    int max_iter = 500;
    double tol = 1e-8;
    int restarts = 10;
};

std::string gamma_csv(const Posteriors& post, std::size_t p) {
    std::string s = "t";
    for (Eigen::Index h = 0; h < post.smoothed.cols(); ++h) s += ",gamma_" + std::to_string(h);
    s += '\n';
    for (Eigen::Index i = 0; i < post.smoothed.rows(); ++i) {
        s += std::to_string(p + static_cast<std::size_t>(i));
        for (Eigen::Index h = 0; h < post.smoothed.cols(); ++h) s += ',' + format_double(post.smoothed(i, h));
        s += '\n';
    }
    return s;
}

std::string xi_csv(const Posteriors& post, std::size_t p) {
    std::string s = "t,i,j,xi\n";
    for (std::size_t i = 0; i < post.pairwise.size(); ++i) {
        const auto& xi = post.pairwise[i];
        for (Eigen::Index a = 0; a < xi.rows(); ++a) {
            for (Eigen::Index b = 0; b < xi.cols(); ++b) {
                s += std::to_string(p + i) + ',' + std::to_string(a) + ',' + std::to_string(b) + ',' +
                     format_double(xi(a, b)) + '\n';
            }
        }
    }
    return s;
}

int cmd_fit(const FitArgs& a, std::ostream& out) {
    const std::vector<double> y = load_series(a.series);
    FitConfig cfg;
    cfg.k = a.k;
    cfg.p = a.p;
    cfg.mode = parse_fit_mode(a.mode);
    cfg.seed = a.seed;
    cfg.max_iter = a.max_iter;
    cfg.tol = a.tol;
    cfg.restarts = a.restarts;
    const FitResult result = fit(y, cfg);

    const std::string diag = a.diagnostics.empty() ? a.out + ".diagnostics.json" : a.diagnostics;
    atomic_write_file(a.out, dump_json(model_to_json(result.model)));
    atomic_write_file(diag, dump_json(diagnostics_to_json(result, cfg)));
    if (!a.posteriors.empty()) {
        atomic_write_file(a.posteriors + "_gamma.csv", gamma_csv(result.posteriors, cfg.p));
        atomic_write_file(a.posteriors + "_xi.csv", xi_csv(result.posteriors, cfg.p));
    }
    out << "loglik=" << format_double(result.loglik_trace.back()) << '\n';
    return kOk;
}

// ---------------------------------------------------------------- forecast

int cmd_forecast(const std::string& model_path, const std::string& series_path, const std::string& out_path,
                 std::ostream& out) {
    const HmMarModel model = load_valid_model(model_path);
    const std::vector<double> y = load_series(series_path);
    if (y.size() < model.p + 1) {
        throw CommandError{kInvalidInput, "series must hold at least p + 1 observations"};
    }
    const RollingForecast rf = rolling_forecast(model, y);
    std::string csv = "t,y,mean,variance,abs_error\n";
    for (const auto& r : rf.records) {
        csv += std::to_string(r.t) + ',' + format_double(r.y) + ',' + format_double(r.forecast.mean) + ',' +
               format_double(r.forecast.variance) + ',' + format_double(r.abs_error) + '\n';
    }
    csv += "total_abs_error=" + format_double(rf.total_abs_error) + '\n';
    atomic_write_file(out_path, csv);
    out << "total_abs_error=" << format_double(rf.total_abs_error) << '\n';
    return kOk;
}

// --------------------------------------------------------------- stability

int cmd_stability(const std::string& model_path, const std::string& out_path, std::ostream& out) {
    const HmMarModel model = load_valid_model(model_path);
    const StabilityReport report = analyze(model);
    atomic_write_file(out_path, dump_json(report_to_json(report)));
    auto b = [](bool v) { return v ? "true" : "false"; };
    out << "T1=" << b(report.theorem1_applicable) << " T2=" << b(report.theorem2_applicable)
        << " T3=" << b(report.theorem3_applicable) << '\n';
    return kOk;
}

// --------------------------------------------------------------- benchmark

int cmd_benchmark(const std::string& model_path, const BenchmarkConfig& cfg, const std::string& out_path,
                  std::ostream& out) {
    const HmMarModel truth = load_valid_model(model_path);
    const BenchmarkResult result = run_benchmark(truth, cfg);
    atomic_write_file(out_path, benchmark_to_csv(result));
    out << "wins=" << result.wins << " completed=" << result.completed << " replicates=" << result.rows.size()
        << " hmm_mean=" << format_double(result.hmm.mean) << " mar_mean=" << format_double(result.mar.mean)
        << '\n';
    return kOk;
}

// ------------------------------------------------------------------ oracle

struct OracleArgs {
    std::size_t k = kOracleMaxK;
    std::size_t n = kOracleMaxN;
    std::size_t models = 50;
    std::uint64_t seed = 1;
    bool inject_fault = false;
    std::string out;
};

struct OracleCheck {
    std::string name;
    double max_deviation = 0.0;
    std::size_t cases = 0;
};

std::uint64_t case_seed(std::uint64_t seed, std::size_t a, std::size_t b, std::size_t c) {
    return derive_key(seed, (static_cast<std::uint64_t>(a) << 40) ^ (static_cast<std::uint64_t>(b) << 20) ^ c);
}

int cmd_oracle(const OracleArgs& a, std::ostream& out) {
    if (a.k < 1 || a.k > kOracleMaxK) {
        throw CommandError{kInvalidInput, "--k must be in [1, 3]: enumeration grows as K^n"};
    }
    if (a.n < 2 || a.n > kOracleMaxN) {
        throw CommandError{kInvalidInput, "--n must be in [2, 12]: enumeration grows as K^n"};
    }
    using oracles::Real;
    OracleCheck product{"product_expectation"};
    OracleCheck weighted{"weighted_product"};
    OracleCheck weights{"filter_weights_vs_unscaled_recursion"};
    OracleCheck loglik{"loglik_vs_path_sum"};
    OracleCheck posterior{"posteriors_vs_path_enumeration"};

    const std::size_t product_n = std::min<std::size_t>(8, a.n);
    for (std::size_t k = 2; k <= std::max<std::size_t>(2, a.k); ++k) {
        if (k > a.k) break;
        for (std::size_t n = 2; n <= product_n; ++n) {
            for (std::size_t i = 0; i < a.models; ++i) {
                const HmMarModel m = oracles::random_model(k, 1, case_seed(a.seed, k, n, i));
                const Eigen::VectorXd phi0 = m.coeffs.col(0);
                const Eigen::VectorXd phi1 = m.coeffs.col(1);
                Eigen::VectorXd closed_phi1 = phi1;
                if (a.inject_fault) closed_phi1[0] = -closed_phi1[0];
                const Eigen::VectorXd mu = stationary_distribution(m.transition);

                const Eigen::VectorXd v = product_expectation_vector(m.transition, closed_phi1, static_cast<int>(n));
                const auto e = oracles::enumerate_product_expectation(m.transition, phi1, static_cast<int>(n));
                for (std::size_t j = 0; j < k; ++j) {
                    product.max_deviation = std::max(
                        product.max_deviation,
                        static_cast<double>(std::fabs(static_cast<Real>(v[static_cast<Eigen::Index>(j)]) - e[j])));
                }
                ++product.cases;

                const double w = weighted_product_expectation(m.transition, phi0, closed_phi1, mu, static_cast<int>(n));
                const Real ew = oracles::enumerate_weighted_product(m.transition, phi0, phi1, mu, static_cast<int>(n));
                weighted.max_deviation = std::max(weighted.max_deviation, static_cast<double>(std::fabs(w - ew)));
                ++weighted.cases;
            }
        }
    }

    const std::size_t short_n = std::min<std::size_t>(8, a.n);
    for (std::size_t k = 1; k <= a.k; ++k) {
        for (std::size_t p = 0; p <= 2; ++p) {
            for (std::size_t i = 0; i < a.models; ++i) {
                const std::uint64_t s = case_seed(a.seed ^ 0xF17E5ULL, k, p, i);
                const HmMarModel m = oracles::random_model(k, p, s);
                if (a.n >= p + 1) {
                    const std::vector<double> y = oracles::random_series(a.n, s);
                    const auto ref = oracles::unscaled_forward_weights(m, y);
                    ForwardState st = init_filter(m, std::span<const double>(y).first(p));
                    for (std::size_t t = p; t < y.size(); ++t) {
                        const auto& r = ref[t - p];
                        for (std::size_t h = 0; h < k; ++h) {
                            weights.max_deviation = std::max(
                                weights.max_deviation,
                                static_cast<double>(std::fabs(static_cast<Real>(st.alpha_predictive[h]) - r[h])));
                        }
                        st = filter_step(st, m, y[t], lags_at(y, t, p));
                    }
                    ++weights.cases;
                }
                if (short_n >= p + 2) {
                    const std::vector<double> y = oracles::random_series(short_n, s ^ 0x5EEDULL);
                    const auto paths = oracles::enumerate_paths(m, y);
                    const double ll = rolling_forecast(m, y).log_likelihood;
                    loglik.max_deviation = std::max(
                        loglik.max_deviation, static_cast<double>(std::fabs(ll - std::log(paths.likelihood))));
                    ++loglik.cases;

                    const Posteriors post = forward_backward(m, y);
                    double dev = 0.0;
                    for (std::size_t t = 0; t < paths.smoothed.size(); ++t) {
                        for (std::size_t h = 0; h < k; ++h) {
                            const auto ti = static_cast<Eigen::Index>(t);
                            const auto hi = static_cast<Eigen::Index>(h);
                            dev = std::max(dev, static_cast<double>(std::fabs(post.smoothed(ti, hi) - paths.smoothed[t][h])));
                        }
                    }
                    for (std::size_t t = 0; t < paths.pairwise.size(); ++t) {
                        for (std::size_t i2 = 0; i2 < k; ++i2) {
                            for (std::size_t j = 0; j < k; ++j) {
                                dev = std::max(dev, static_cast<double>(std::fabs(
                                                        post.pairwise[t](static_cast<Eigen::Index>(i2),
                                                                         static_cast<Eigen::Index>(j)) -
                                                        paths.pairwise[t][i2][j])));
                            }
                        }
                    }
                    posterior.max_deviation = std::max(posterior.max_deviation, dev);
                    ++posterior.cases;
                }
            }
        }
    }

    bool all_ok = true;
    std::ostringstream report;
    for (const OracleCheck* c : {&product, &weighted, &weights, &loglik, &posterior}) {
        if (c->cases == 0) continue;
        const bool ok = c->max_deviation <= kOracleTol;
        all_ok = all_ok && ok;
        report << c->name << " cases=" << c->cases << " max_abs_dev=" << format_double(c->max_deviation) << ' '
               << (ok ? "PASS" : "FAIL") << '\n';
    }
    report << (all_ok ? "oracle: all checks passed" : "oracle: FAILED") << '\n';
    out << report.str();
    if (!a.out.empty()) atomic_write_file(a.out, report.str());
    return all_ok ? kOk : kOracleFailure;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hidden Markov mixture autoregressive models: simulate, fit, forecast, analyze"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all");

    SimulateArgs sim;
    auto* simulate_cmd = app.add_subcommand("simulate", "Simulate a series from a model file");
    simulate_cmd->add_option("--model", sim.model, "Model JSON")->required();
    simulate_cmd->add_option("--n", sim.n, "Number of observations")->required()->check(CLI::PositiveNumber);
    simulate_cmd->add_option("--seed", sim.seed, "RNG seed")->required();
    simulate_cmd->add_option("--out", sim.out, "Output CSV (directory with --replicates)")->required();
    simulate_cmd->add_flag("--emit-latent", sim.emit_latent, "Add the regime column z");
    simulate_cmd->add_option("--regime", sim.regime, "Start in this regime instead of drawing from rho");
    simulate_cmd->add_option("--initial-lags", sim.initial_lags, "y_0..y_{p-1} (default zeros)")->delimiter(',');
    simulate_cmd->add_option("--replicates", sim.replicates, "Write rep_<i>.csv files into --out");

    FitArgs fa;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a model by EM");
    fit_cmd->add_option("--series", fa.series, "Series CSV")->required();
    fit_cmd->add_option("--k", fa.k, "Number of regimes")->required()->check(CLI::PositiveNumber);
    fit_cmd->add_option("--p", fa.p, "Autoregressive order")->required();
    fit_cmd->add_option("--mode", fa.mode, "hmm or iid")->required()->check(CLI::IsMember({"hmm", "iid"}));
    fit_cmd->add_option("--seed", fa.seed, "Initialization seed")->required();
    fit_cmd->add_option("--out", fa.out, "Fitted model JSON")->required();
    fit_cmd->add_option("--diagnostics", fa.diagnostics, "Diagnostics JSON (default <out>.diagnostics.json)");
    fit_cmd->add_option("--posteriors", fa.posteriors, "Write <prefix>_gamma.csv and <prefix>_xi.csv");
    fit_cmd->add_option("--max-iter", fa.max_iter, "EM iteration cap")->check(CLI::PositiveNumber);
    fit_cmd->add_option("--tol", fa.tol, "Log-likelihood improvement threshold")->check(CLI::PositiveNumber);
    fit_cmd->add_option("--restarts", fa.restarts, "Seeded restarts")->check(CLI::PositiveNumber);

    std::string fc_model, fc_series, fc_out;
    auto* forecast_cmd = app.add_subcommand("forecast", "Rolling one-step forecasts");
    forecast_cmd->add_option("--model", fc_model, "Model JSON")->required();
    forecast_cmd->add_option("--series", fc_series, "Series CSV")->required();
    forecast_cmd->add_option("--out", fc_out, "Forecast CSV")->required();

    std::string st_model, st_out;
    auto* stability_cmd = app.add_subcommand("stability", "Moment stability report for a p = 1 model");
    stability_cmd->add_option("--model", st_model, "Model JSON")->required();
    stability_cmd->add_option("--out", st_out, "Report JSON")->required();

    std::string bm_model, bm_out;
    BenchmarkConfig bm;
    bm.threads = 0;
    auto* benchmark_cmd = app.add_subcommand("benchmark", "HM-MAR versus MAR forecast-error benchmark");
    benchmark_cmd->add_option("--model", bm_model, "True model JSON")->required();
    benchmark_cmd->add_option("--replicates", bm.replicates, "Data replicates")->required()->check(CLI::PositiveNumber);
    benchmark_cmd->add_option("--n", bm.n, "Observations per replicate")->required()->check(CLI::PositiveNumber);
    benchmark_cmd->add_option("--seed", bm.seed, "Master seed")->required();
    benchmark_cmd->add_option("--out", bm_out, "Result CSV")->required();
    benchmark_cmd->add_option("--restarts", bm.restarts, "EM restarts per fit")->check(CLI::PositiveNumber);
    benchmark_cmd->add_option("--threads", bm.threads, "Worker threads (default HMMAR_THREADS or all cores)");

    OracleArgs oa;
    auto* oracle_cmd = app.add_subcommand("oracle", "Check closed forms and filters against enumeration");
    oracle_cmd->add_option("--k", oa.k, "Largest K in the grid (<= 3)");
    oracle_cmd->add_option("--n", oa.n, "Longest series length (<= 12)");
    oracle_cmd->add_option("--models", oa.models, "Random models per grid cell");
    oracle_cmd->add_option("--seed", oa.seed, "Seed for the random grid");
    oracle_cmd->add_flag("--inject-fault", oa.inject_fault, "Flip the sign of one lag-1 coefficient");
    oracle_cmd->add_option("--out", oa.out, "Also write the report here");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kInvalidInput;
    }

    try {
        if (simulate_cmd->parsed()) return cmd_simulate(sim, out);
        if (fit_cmd->parsed()) return cmd_fit(fa, out);
        if (forecast_cmd->parsed()) return cmd_forecast(fc_model, fc_series, fc_out, out);
        if (stability_cmd->parsed()) return cmd_stability(st_model, st_out, out);
        if (benchmark_cmd->parsed()) {
            if (bm.threads == 0) bm.threads = default_thread_count();
            return cmd_benchmark(bm_model, bm, bm_out, out);
        }
        if (oracle_cmd->parsed()) return cmd_oracle(oa, out);
    } catch (const CommandError& e) {
        err << "error: " << e.message << '\n';
        return e.code;
    } catch (const AllRestartsFailed& e) {
        err << "error: " << e.what() << '\n';
        return kFitFailure;
    } catch (const UnsupportedOrder& e) {
        err << "error: " << e.what() << '\n';
        return kUnsupportedOrder;
    } catch (const IoError& e) {
        err << "error: " << e.what() << '\n';
        return kIoFailure;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kInvalidInput;
    }
    return kInvalidInput;
}

}  // namespace hmmar::cli

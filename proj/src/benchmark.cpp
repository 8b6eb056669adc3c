#include "hmmar/benchmark.hpp"

#include "hmmar/errors.hpp"
#include "hmmar/forward_filter.hpp"
#include "hmmar/rng.hpp"
#include "hmmar/series_io.hpp"
#include "hmmar/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

namespace hmmar {

namespace {

constexpr std::uint64_t kFitSeedTag = 0x6669745F73656564ULL;  // "fit_seed"

BenchmarkRow run_replicate(const HmMarModel& truth, const BenchmarkConfig& config, std::size_t r) {
    BenchmarkRow row;
    row.replicate = r;
    row.data_seed = replicate_seed(config.seed, r);

    SimulationConfig sim;
    sim.n = config.n;
    sim.seed = row.data_seed;
    const std::vector<double> y = simulate(truth, sim).y;

    FitConfig fc;
    fc.k = truth.k;
    fc.p = truth.p;
    fc.max_iter = config.max_iter;
    fc.tol = config.tol;
    fc.restarts = config.restarts;
    fc.seed = derive_key(row.data_seed, kFitSeedTag);
    try {
        fc.mode = FitMode::Hmm;
        const FitResult hmm = fit(y, fc);
        fc.mode = FitMode::Iid;
        const FitResult mar = fit(y, fc);
        row.hmm_error = rolling_forecast(hmm.model, y).total_abs_error;
        row.mar_error = rolling_forecast(mar.model, y).total_abs_error;
        row.hmm_loglik = hmm.loglik_trace.back();
        row.mar_loglik = mar.loglik_trace.back();
        row.ok = true;
    } catch (const Error& e) {
        row.failure = e.what();
    }
    return row;
}

ColumnSummary summarize(const std::vector<double>& v) {
    ColumnSummary s;
    if (v.empty()) return s;
    for (double x : v) s.mean += x;
    s.mean /= static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - s.mean) * (x - s.mean);
        s.sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return s;
}

}  // namespace

unsigned default_thread_count() {
    if (const char* env = std::getenv("HMMAR_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

BenchmarkResult run_benchmark(const HmMarModel& truth, const BenchmarkConfig& config) {
    require_valid(truth);
    if (config.replicates == 0) throw Error("benchmark needs at least one replicate");

    BenchmarkResult result;
    result.rows.resize(config.replicates);
    const unsigned threads =
        std::max(1u, std::min<unsigned>(config.threads, static_cast<unsigned>(config.replicates)));
    auto work = [&](unsigned worker) {
        for (std::size_t r = worker; r < config.replicates; r += threads) {
            result.rows[r] = run_replicate(truth, config, r);
        }
    };
    if (threads == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
        for (auto& th : pool) th.join();
    }

    std::vector<double> hmm_errors;
    std::vector<double> mar_errors;
    for (const auto& row : result.rows) {
        if (!row.ok) continue;
        ++result.completed;
        hmm_errors.push_back(row.hmm_error);
        mar_errors.push_back(row.mar_error);
        if (row.hmm_error < row.mar_error) ++result.wins;
    }
    result.hmm = summarize(hmm_errors);
    result.mar = summarize(mar_errors);
    return result;
}

std::string benchmark_to_csv(const BenchmarkResult& result) {
    std::string out = "replicate,data_seed,status,hmm_abs_error,mar_abs_error,hmm_loglik,mar_loglik,failure\n";
    for (const auto& row : result.rows) {
        out += std::to_string(row.replicate) + ',' + std::to_string(row.data_seed) + ',';
        if (row.ok) {
            out += "ok," + format_double(row.hmm_error) + ',' + format_double(row.mar_error) + ',' +
                   format_double(row.hmm_loglik) + ',' + format_double(row.mar_loglik) + ",\n";
        } else {
            std::string reason = row.failure;
            std::replace(reason.begin(), reason.end(), ',', ';');
            std::replace(reason.begin(), reason.end(), '\n', ' ');
            out += "failed,,,,," + reason + '\n';
        }
    }
    out += "# wins=" + std::to_string(result.wins) + " completed=" + std::to_string(result.completed) +
           " replicates=" + std::to_string(result.rows.size()) + '\n';
    out += "# hmm_mean=" + format_double(result.hmm.mean) + " hmm_sd=" + format_double(result.hmm.sd) + '\n';
    out += "# mar_mean=" + format_double(result.mar.mean) + " mar_sd=" + format_double(result.mar.sd) + '\n';
    return out;
}

}  // namespace hmmar

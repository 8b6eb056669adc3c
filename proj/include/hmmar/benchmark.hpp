#pragma once

#include "hmmar/estimation.hpp"
#include "hmmar/model.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hmmar {

struct BenchmarkConfig {
    std::size_t replicates = 10;
    std::size_t n = 100;
    std::uint64_t seed = 0;
    /// Fit dimensions default to those of the true model.
    int restarts = 10;
    int max_iter = 500;
    double tol = 1e-8;
    unsigned threads = 1;
};

struct BenchmarkRow {
    std::size_t replicate = 0;
    std::uint64_t data_seed = 0;
    bool ok = false;
    double hmm_error = 0.0;  // total absolute one-step error of the fitted HM-MAR
    double mar_error = 0.0;  // same for the fitted iid-mixture (MAR) model
    double hmm_loglik = 0.0;
    double mar_loglik = 0.0;
    std::string failure;
};

struct ColumnSummary {
    double mean = 0.0;
    double sd = 0.0;  // sample standard deviation (divisor count - 1)
};

struct BenchmarkResult {
    std::vector<BenchmarkRow> rows;
    std::size_t wins = 0;       // replicates where hmm_error < mar_error
    std::size_t completed = 0;  // replicates where both fits succeeded
    ColumnSummary hmm;
    ColumnSummary mar;
};

/// Per replicate: simulate n observations from `truth`, fit in hmm and iid
/// modes, and score both fits by their in-sample rolling one-step total
/// absolute error. Failed fits are kept as rows with ok = false.
BenchmarkResult run_benchmark(const HmMarModel& truth, const BenchmarkConfig& config);

std::string benchmark_to_csv(const BenchmarkResult& result);

/// Worker count from HMMAR_THREADS, else hardware concurrency (at least 1).
unsigned default_thread_count();

}  // namespace hmmar

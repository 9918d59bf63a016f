#ifndef ULF_BENCHMARK_HPP
#define ULF_BENCHMARK_HPP

#include <limits>
#include <map>
#include <string>
#include <vector>

#include "ulf/metrics.hpp"
#include "ulf/scenario.hpp"
#include "ulf/unified.hpp"

namespace ulf {

/// A named filter configuration, either from the zoo or built explicitly.
struct FilterSpec {
    std::string name;
    Linearizer linearizer;
    IterationPolicy policy;

    static FilterSpec from_zoo(const std::string& zoo_name);
};

/// One trace row of a single run (emitted when traces are requested).
struct TraceRow {
    int step = 0;
    VectorXd truth;
    VectorXd estimate;
    VectorXd cov_diag;
    double nees = 0.0;
    double nis = 0.0;
    int iterations = 0;
    bool converged = true;
};

/// Per-filter outcome of one Monte Carlo run.
struct FilterRunResult {
    bool diverged = false;
    int divergence_step = -1;  // first non-finite/failed step when known
    std::string failure;       // error text when the run aborted
    double rmse_pos = std::numeric_limits<double>::quiet_NaN();
    double rmse_state = std::numeric_limits<double>::quiet_NaN();
    double mean_nees = std::numeric_limits<double>::quiet_NaN();
    VectorXd nees_seq;
    VectorXd nis_seq;
    double mean_iterations = 0.0;
    std::map<int, long> iteration_histogram;
    std::vector<TraceRow> trace;  // kept only when requested
};

/// Aggregates over the Monte Carlo batch for one filter. Diverged runs are
/// excluded from the means but counted in divergence_rate.
struct FilterSummary {
    std::string name;
    std::string linearizer;
    std::string filter_class;
    int n_runs = 0;
    int n_diverged = 0;
    double rmse_pos_mean = std::numeric_limits<double>::quiet_NaN();
    double rmse_pos_se = std::numeric_limits<double>::quiet_NaN();
    double rmse_state_mean = std::numeric_limits<double>::quiet_NaN();
    double nees_mean = std::numeric_limits<double>::quiet_NaN();
    double divergence_rate = 0.0;
    double mean_iterations = 0.0;
    std::map<int, long> iteration_histogram;
    std::vector<double> rmse_pos_runs;  // NaN for diverged runs (paired tests)
    VectorXd nees_time_mean;            // per-step mean NEES over clean runs
};

struct BenchmarkOptions {
    bool propagate_smoothed = false;
    bool keep_traces = false;
    int jobs = 0;  // 0 = library default thread count
};

struct BenchmarkResult {
    std::vector<FilterSummary> filters;
    std::vector<std::vector<FilterRunResult>> runs;  // [filter][run]
    int n_mc = 0;
    std::uint64_t base_seed = 0;
};

/// Execute one Monte Carlo run (simulation seed = given seed) for every
/// filter against the same truth/measurements.
std::vector<FilterRunResult> execute_run(const Scenario& scenario,
                                         const std::vector<FilterSpec>& filters,
                                         std::uint64_t seed, const BenchmarkOptions& options);

/// OpenMP-parallel Monte Carlo batch: run r uses seed base_seed + r, all
/// filters see identical data per run, aggregation is a deterministic
/// reduction independent of thread count.
BenchmarkResult run_benchmark(const Scenario& scenario, const std::vector<FilterSpec>& filters,
                              int n_mc, std::uint64_t base_seed,
                              const BenchmarkOptions& options = {});

/// Serial reference implementation of the same batch; kept for testing and
/// the parallel-speedup benchmark. Must produce results identical to
/// run_benchmark.
BenchmarkResult run_benchmark_serial(const Scenario& scenario,
                                     const std::vector<FilterSpec>& filters, int n_mc,
                                     std::uint64_t base_seed, const BenchmarkOptions& options = {});

}  // namespace ulf

#endif  // ULF_BENCHMARK_HPP

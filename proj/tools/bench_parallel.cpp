// Wall-time comparison of the serial and OpenMP Monte Carlo drivers on the
// default scenario, and a check that both produce identical aggregates.
//
//   bench_parallel [n_mc] [base_seed]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "ulf/benchmark.hpp"

using h_clock = std::chrono::high_resolution_clock;

namespace {

double seconds_since(h_clock::time_point start) {
    return std::chrono::duration<double>(h_clock::now() - start).count();
}

bool results_match(const ulf::BenchmarkResult& a, const ulf::BenchmarkResult& b) {
    if (a.filters.size() != b.filters.size()) return false;
    for (std::size_t f = 0; f < a.filters.size(); ++f) {
        const auto& fa = a.filters[f];
        const auto& fb = b.filters[f];
        const bool rmse_same = (std::isnan(fa.rmse_pos_mean) && std::isnan(fb.rmse_pos_mean)) ||
                               fa.rmse_pos_mean == fb.rmse_pos_mean;
        if (!rmse_same || fa.n_diverged != fb.n_diverged ||
            fa.mean_iterations != fb.mean_iterations) {
            return false;
        }
    }
    return true;
}

}  // namespace

int main(int argc, char** argv) {
    const int n_mc = argc > 1 ? std::atoi(argv[1]) : 100;
    const std::uint64_t base_seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;

    const ulf::Scenario scenario = ulf::default_scenario();
    std::vector<ulf::FilterSpec> filters;
    for (const std::string& name : ulf::zoo_names()) {
        filters.push_back(ulf::FilterSpec::from_zoo(name));
    }

    auto t0 = h_clock::now();
    const ulf::BenchmarkResult serial =
        ulf::run_benchmark_serial(scenario, filters, n_mc, base_seed);
    const double serial_s = seconds_since(t0);

    t0 = h_clock::now();
    const ulf::BenchmarkResult parallel = ulf::run_benchmark(scenario, filters, n_mc, base_seed);
    const double parallel_s = seconds_since(t0);

#ifdef _OPENMP
    const int threads = omp_get_max_threads();
#else
    const int threads = 1;
#endif
    std::printf("runs: %d  filters: %zu  threads: %d\n", n_mc, filters.size(), threads);
    std::printf("serial:   %8.3f s\n", serial_s);
    std::printf("parallel: %8.3f s  (speedup %.2fx)\n", parallel_s,
                parallel_s > 0.0 ? serial_s / parallel_s : 0.0);

    if (!results_match(serial, parallel)) {
        std::fprintf(stderr, "FAIL: serial and parallel aggregates differ\n");
        return 1;
    }
    std::printf("aggregates identical: yes\n");
    return 0;
}

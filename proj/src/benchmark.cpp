#include "ulf/benchmark.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ulf {

namespace {

constexpr double kNeesDivergenceThreshold = 1e4;

FilterRunResult run_one_filter(const SimulationResult& sim, const Scenario& scenario,
                               const FilterSpec& spec, const BenchmarkOptions& options) {
    FilterRunResult result;
    const NonlinearModel dyn = dynamics_model(scenario.dynamics, scenario.dt);
    const NonlinearModel meas = measurement_model(scenario);
    const StepOptions step_options{options.propagate_smoothed};

    std::vector<StepRecord> records;
    records.reserve(sim.measurements.size());
    const GaussianDensity* current = &scenario.init_filter;
    for (std::size_t k = 0; k < sim.measurements.size(); ++k) {
        try {
            records.push_back(general_step(*current, sim.measurements[k], dyn, meas,
                                           spec.linearizer, spec.policy, step_options));
        } catch (const Error& e) {
            result.diverged = true;
            result.divergence_step = static_cast<int>(k);
            result.failure = e.what();
            return result;
        }
        current = &records.back().posterior;
    }

    RunMetrics m;
    try {
        m = metrics(sim.truth, records);
    } catch (const Error& e) {
        result.diverged = true;
        result.failure = e.what();
        return result;
    }

    result.rmse_pos = m.rmse_pos;
    result.rmse_state = m.rmse_state;
    result.nees_seq = m.nees_seq;
    result.nis_seq = m.nis_seq;
    result.mean_nees = m.nees_seq.size() > 0 ? m.nees_seq.mean() : 0.0;

    long total_iters = 0;
    for (const StepRecord& rec : records) {
        total_iters += rec.iterations_used;
        ++result.iteration_histogram[rec.iterations_used];
    }
    result.mean_iterations =
        records.empty() ? 0.0 : static_cast<double>(total_iters) / static_cast<double>(records.size());

    const bool finite = std::isfinite(m.rmse_pos) && std::isfinite(m.rmse_state) &&
                        m.nees_seq.allFinite() && m.nis_seq.allFinite();
    if (!finite || (m.nees_seq.size() > 0 && m.nees_seq.maxCoeff() > kNeesDivergenceThreshold)) {
        result.diverged = true;
        if (!finite) result.failure = "non-finite metrics";
        for (Eigen::Index k = 0; k < m.nees_seq.size(); ++k) {
            if (!std::isfinite(m.nees_seq(k)) || m.nees_seq(k) > kNeesDivergenceThreshold) {
                result.divergence_step = static_cast<int>(k);
                break;
            }
        }
    }

    if (options.keep_traces) {
        result.trace.reserve(records.size());
        for (std::size_t k = 0; k < records.size(); ++k) {
            TraceRow row;
            row.step = static_cast<int>(k);
            row.truth = sim.truth[k];
            row.estimate = records[k].posterior.mean;
            row.cov_diag = records[k].posterior.cov.diagonal();
            row.nees = m.nees_seq(static_cast<Eigen::Index>(k));
            row.nis = m.nis_seq(static_cast<Eigen::Index>(k));
            row.iterations = records[k].iterations_used;
            row.converged = records[k].converged;
            result.trace.push_back(std::move(row));
        }
    }
    return result;
}

BenchmarkResult aggregate(const Scenario& scenario, const std::vector<FilterSpec>& filters,
                          std::vector<std::vector<FilterRunResult>>&& per_run, int n_mc,
                          std::uint64_t base_seed) {
    BenchmarkResult out;
    out.n_mc = n_mc;
    out.base_seed = base_seed;
    out.runs.assign(filters.size(), {});
    for (std::size_t f = 0; f < filters.size(); ++f) {
        out.runs[f].reserve(per_run.size());
        for (auto& run : per_run) out.runs[f].push_back(std::move(run[f]));
    }

    for (std::size_t f = 0; f < filters.size(); ++f) {
        FilterSummary summary;
        summary.name = filters[f].name;
        summary.linearizer = to_string(filters[f].linearizer.kind);
        summary.filter_class = to_string(filters[f].policy.filter_class);
        summary.n_runs = n_mc;
        summary.rmse_pos_runs.assign(n_mc, std::numeric_limits<double>::quiet_NaN());
        summary.nees_time_mean = VectorXd::Zero(scenario.n_steps);

        double rmse_sum = 0.0, rmse_sq_sum = 0.0, state_sum = 0.0;
        double nees_sum = 0.0, iter_sum = 0.0;
        int clean = 0;
        for (int r = 0; r < n_mc; ++r) {
            const FilterRunResult& res = out.runs[f][static_cast<std::size_t>(r)];
            if (res.diverged) {
                ++summary.n_diverged;
                continue;
            }
            ++clean;
            summary.rmse_pos_runs[static_cast<std::size_t>(r)] = res.rmse_pos;
            rmse_sum += res.rmse_pos;
            rmse_sq_sum += res.rmse_pos * res.rmse_pos;
            state_sum += res.rmse_state;
            nees_sum += res.mean_nees;
            iter_sum += res.mean_iterations;
            summary.nees_time_mean += res.nees_seq;
            for (const auto& [iters, count] : res.iteration_histogram) {
                summary.iteration_histogram[iters] += count;
            }
        }
        summary.divergence_rate = static_cast<double>(summary.n_diverged) / std::max(1, n_mc);
        if (clean > 0) {
            summary.rmse_pos_mean = rmse_sum / clean;
            summary.rmse_state_mean = state_sum / clean;
            summary.nees_mean = nees_sum / clean;
            summary.mean_iterations = iter_sum / clean;
            summary.nees_time_mean /= static_cast<double>(clean);
            if (clean > 1) {
                const double var =
                    (rmse_sq_sum - clean * summary.rmse_pos_mean * summary.rmse_pos_mean) /
                    (clean - 1);
                summary.rmse_pos_se = std::sqrt(std::max(0.0, var) / clean);
            } else {
                summary.rmse_pos_se = 0.0;
            }
        } else {
            summary.nees_time_mean.setConstant(std::numeric_limits<double>::quiet_NaN());
        }
        out.filters.push_back(std::move(summary));
    }
    return out;
}

}  // namespace

FilterSpec FilterSpec::from_zoo(const std::string& zoo_name) {
    auto [linearizer, policy] = filter_zoo(zoo_name);
    return FilterSpec{zoo_name, linearizer, policy};
}

std::vector<FilterRunResult> execute_run(const Scenario& scenario,
                                         const std::vector<FilterSpec>& filters,
                                         std::uint64_t seed, const BenchmarkOptions& options) {
    std::vector<FilterRunResult> results(filters.size());
    SimulationResult sim;
    try {
        sim = simulate(scenario, seed);
    } catch (const Error& e) {
        for (FilterRunResult& r : results) {
            r.diverged = true;
            r.failure = std::string("simulation failed: ") + e.what();
        }
        return results;
    }
    for (std::size_t f = 0; f < filters.size(); ++f) {
        results[f] = run_one_filter(sim, scenario, filters[f], options);
    }
    return results;
}

BenchmarkResult run_benchmark(const Scenario& scenario, const std::vector<FilterSpec>& filters,
                              int n_mc, std::uint64_t base_seed, const BenchmarkOptions& options) {
    if (n_mc < 1) throw InvalidArgument("run_benchmark: n_mc must be >= 1");
    validate(scenario);

    std::vector<std::vector<FilterRunResult>> per_run(static_cast<std::size_t>(n_mc));
#ifdef _OPENMP
    const int threads = options.jobs > 0 ? options.jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (int r = 0; r < n_mc; ++r) {
        per_run[static_cast<std::size_t>(r)] =
            execute_run(scenario, filters, base_seed + static_cast<std::uint64_t>(r), options);
    }
#else
    for (int r = 0; r < n_mc; ++r) {
        per_run[static_cast<std::size_t>(r)] =
            execute_run(scenario, filters, base_seed + static_cast<std::uint64_t>(r), options);
    }
#endif
    return aggregate(scenario, filters, std::move(per_run), n_mc, base_seed);
}

BenchmarkResult run_benchmark_serial(const Scenario& scenario,
                                     const std::vector<FilterSpec>& filters, int n_mc,
                                     std::uint64_t base_seed, const BenchmarkOptions& options) {
    if (n_mc < 1) throw InvalidArgument("run_benchmark_serial: n_mc must be >= 1");
    validate(scenario);

    std::vector<std::vector<FilterRunResult>> per_run(static_cast<std::size_t>(n_mc));
    for (int r = 0; r < n_mc; ++r) {
        per_run[static_cast<std::size_t>(r)] =
            execute_run(scenario, filters, base_seed + static_cast<std::uint64_t>(r), options);
    }
    return aggregate(scenario, filters, std::move(per_run), n_mc, base_seed);
}

}  // namespace ulf

#ifndef ULF_OUTPUT_HPP
#define ULF_OUTPUT_HPP

#include <string>

#include "ulf/benchmark.hpp"
#include "ulf/config.hpp"

namespace ulf {

inline constexpr const char* kToolVersion = "0.1.0";

/// Lossless decimal formatting of a 64-bit float (17 significant digits).
std::string format_g17(double value);

/// summary.csv with the fixed schema:
/// filter,linearizer,class,n_mc,rmse_pos_mean,rmse_pos_se,nees_mean,divergence_rate,mean_iterations
void write_summary_csv(const std::string& path, const BenchmarkResult& result);

/// Per-step mean NEES per filter (consumed by plot-data).
void write_nees_time_csv(const std::string& path, const BenchmarkResult& result);

/// trace_<filter>_run<r>.csv files for every kept trace.
void write_traces(const std::string& dir, const BenchmarkResult& result);

/// Run metadata: all config values, tool version, seeds.
void write_meta_json(const std::string& path, const ExperimentConfig& config, int jobs);

/// Convert a results directory into whitespace-delimited plot files
/// (rmse_vs_filter.dat, nees_vs_time.dat). Values are copied as strings, so
/// they match the CSVs bit for bit. Throws MissingResults when summary.csv
/// is absent or empty.
void write_plot_data(const std::string& results_dir);

}  // namespace ulf

#endif  // ULF_OUTPUT_HPP

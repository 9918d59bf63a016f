// ulf command-line front end: reproducible filter-benchmark experiments.
//
//   ulf run <config> [--traces] [--propagate-smoothed] [--jobs N]
//   ulf zoo
//   ulf plot-data <dir>

#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "ulf/output.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitAllRunsDiverged = 3;

int cmd_run(const std::string& config_path, bool traces, bool propagate_smoothed, int jobs) {
    ulf::ExperimentConfig config;
    try {
        config = ulf::parse_config_file(config_path);
    } catch (const ulf::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
    if (propagate_smoothed) config.propagate_smoothed = true;

    std::error_code ec;
    std::filesystem::create_directories(config.output_dir, ec);
    if (ec) {
        std::cerr << "error: " << config_path << ": output_dir '" << config.output_dir
                  << "': " << ec.message() << "\n";
        return kExitConfigError;
    }

    ulf::BenchmarkOptions options;
    options.propagate_smoothed = config.propagate_smoothed;
    options.keep_traces = traces;
    options.jobs = jobs;

    ulf::BenchmarkResult result;
    try {
        result = ulf::run_benchmark(config.scenario, config.filters, config.n_mc,
                                    config.base_seed, options);
    } catch (const ulf::Error& e) {
        std::cerr << "error: " << config_path << ": " << e.what() << "\n";
        return kExitConfigError;
    }

    try {
        ulf::write_summary_csv(config.output_dir + "/summary.csv", result);
        ulf::write_nees_time_csv(config.output_dir + "/nees_time.csv", result);
        ulf::write_meta_json(config.output_dir + "/meta.json", config, jobs);
        if (traces) ulf::write_traces(config.output_dir, result);
    } catch (const ulf::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }

    bool any_filter_fully_diverged = false;
    for (const ulf::FilterSummary& f : result.filters) {
        if (f.n_diverged == f.n_runs) {
            std::cerr << "error: all " << f.n_runs << " runs of filter '" << f.name
                      << "' diverged\n";
            any_filter_fully_diverged = true;
        }
    }
    return any_filter_fully_diverged ? kExitAllRunsDiverged : kExitOk;
}

int cmd_zoo() {
    std::printf("%-6s %-12s %s\n", "name", "linearizer", "class");
    for (const std::string& name : ulf::zoo_names()) {
        auto [linearizer, policy] = ulf::filter_zoo(name);
        std::printf("%-6s %-12s %s\n", name.c_str(), ulf::to_string(linearizer.kind),
                    ulf::to_string(policy.filter_class));
    }
    return kExitOk;
}

int cmd_plotdata(const std::string& results_dir) {
    try {
        ulf::write_plot_data(results_dir);
    } catch (const ulf::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Unified linearization-based filtering benchmark"};
    app.require_subcommand(1);

    std::string config_path;
    bool traces = false;
    bool propagate_smoothed = false;
    int jobs = 0;
    CLI::App* run = app.add_subcommand("run", "Run the experiment described by a config file");
    run->add_option("config", config_path, "Experiment config file")->required();
    run->add_flag("--traces", traces, "Write per-run trace CSVs");
    run->add_flag("--propagate-smoothed", propagate_smoothed,
                  "Feed the smoothed previous state into subsequent time updates");
    run->add_option("--jobs", jobs, "Worker threads for the Monte Carlo loop (0 = default)");

    CLI::App* zoo = app.add_subcommand("zoo", "List the built-in filter configurations");

    std::string results_dir;
    CLI::App* plot = app.add_subcommand("plot-data", "Emit whitespace-delimited plot files");
    plot->add_option("dir", results_dir, "Results directory with summary.csv")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfigError;
    }

    if (run->parsed()) return cmd_run(config_path, traces, propagate_smoothed, jobs);
    if (zoo->parsed()) return cmd_zoo();
    if (plot->parsed()) return cmd_plotdata(results_dir);
    return kExitConfigError;
}

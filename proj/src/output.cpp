#include "ulf/output.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace ulf {

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InvalidArgument("cannot open '" + path + "' for writing");
    return out;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

std::vector<std::vector<std::string>> read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw MissingResults("missing results file '" + path + "'");
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        rows.push_back(split_csv_line(line));
    }
    return rows;
}

}  // namespace

std::string format_g17(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.17g", value);
    return buffer;
}

void write_summary_csv(const std::string& path, const BenchmarkResult& result) {
    std::ofstream out = open_out(path);
    out << "filter,linearizer,class,n_mc,rmse_pos_mean,rmse_pos_se,nees_mean,divergence_rate,"
           "mean_iterations\n";
    for (const FilterSummary& f : result.filters) {
        out << f.name << ',' << f.linearizer << ',' << f.filter_class << ',' << f.n_runs << ','
            << format_g17(f.rmse_pos_mean) << ',' << format_g17(f.rmse_pos_se) << ','
            << format_g17(f.nees_mean) << ',' << format_g17(f.divergence_rate) << ','
            << format_g17(f.mean_iterations) << '\n';
    }
}

void write_nees_time_csv(const std::string& path, const BenchmarkResult& result) {
    std::ofstream out = open_out(path);
    out << "step";
    for (const FilterSummary& f : result.filters) out << ',' << f.name;
    out << '\n';
    const Eigen::Index steps =
        result.filters.empty() ? 0 : result.filters.front().nees_time_mean.size();
    for (Eigen::Index k = 0; k < steps; ++k) {
        out << k;
        for (const FilterSummary& f : result.filters) out << ',' << format_g17(f.nees_time_mean(k));
        out << '\n';
    }
}

void write_traces(const std::string& dir, const BenchmarkResult& result) {
    for (std::size_t f = 0; f < result.filters.size(); ++f) {
        for (std::size_t r = 0; r < result.runs[f].size(); ++r) {
            const FilterRunResult& run = result.runs[f][r];
            if (run.trace.empty()) continue;
            std::ostringstream name;
            name << dir << "/trace_" << result.filters[f].name << "_run" << r << ".csv";
            std::ofstream out = open_out(name.str());

            const Eigen::Index n = run.trace.front().truth.size();
            out << "step";
            for (Eigen::Index i = 0; i < n; ++i) out << ",truth_" << i;
            for (Eigen::Index i = 0; i < n; ++i) out << ",est_" << i;
            for (Eigen::Index i = 0; i < n; ++i) out << ",var_" << i;
            out << ",nees,nis,iterations,converged\n";
            for (const TraceRow& row : run.trace) {
                out << row.step;
                for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_g17(row.truth(i));
                for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_g17(row.estimate(i));
                for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_g17(row.cov_diag(i));
                out << ',' << format_g17(row.nees) << ',' << format_g17(row.nis) << ','
                    << row.iterations << ',' << (row.converged ? 1 : 0) << '\n';
            }
        }
    }
}

void write_meta_json(const std::string& path, const ExperimentConfig& config, int jobs) {
    nlohmann::json meta;
    meta["tool"] = "ulf";
    meta["version"] = kToolVersion;
    meta["config"] = nlohmann::json::parse(serialize_config(config));
    meta["base_seed"] = config.base_seed;
    meta["n_mc"] = config.n_mc;
    meta["propagate_smoothed"] = config.propagate_smoothed;
    meta["jobs"] = jobs;
    std::ofstream out = open_out(path);
    out << meta.dump(2) << '\n';
}

void write_plot_data(const std::string& results_dir) {
    const std::string summary_path = results_dir + "/summary.csv";
    const auto summary = read_csv(summary_path);
    if (summary.size() < 2) {
        throw MissingResults("summary at '" + summary_path + "' has no data rows");
    }

    {
        std::ofstream out = open_out(results_dir + "/rmse_vs_filter.dat");
        out << "# filter linearizer class rmse_pos_mean rmse_pos_se nees_mean divergence_rate\n";
        for (std::size_t i = 1; i < summary.size(); ++i) {
            const auto& row = summary[i];
            if (row.size() < 9) throw MissingResults("malformed summary row in summary.csv");
            out << row[0] << ' ' << row[1] << ' ' << row[2] << ' ' << row[4] << ' ' << row[5]
                << ' ' << row[6] << ' ' << row[7] << '\n';
        }
    }

    const std::string nees_path = results_dir + "/nees_time.csv";
    const auto nees = read_csv(nees_path);
    std::ofstream out = open_out(results_dir + "/nees_vs_time.dat");
    for (std::size_t i = 0; i < nees.size(); ++i) {
        std::string sep = i == 0 ? "# " : "";
        for (const std::string& field : nees[i]) {
            out << sep << field;
            sep = " ";
        }
        out << '\n';
    }
}

}  // namespace ulf

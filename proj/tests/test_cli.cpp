#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "ulf/output.hpp"

using namespace ulf;
namespace fs = std::filesystem;

namespace {

const char* kConfigText = R"({
  "scenario": {
    "n_steps": 8,
    "dt": 1.0,
    "dynamics": {"type": "ncv", "q": 0.1},
    "sensors": [
      {"type": "range_bearing", "position": [0.0, 0.0], "sigma_range": 1.0, "sigma_bearing": 0.1}
    ],
    "init_truth": {"mean": [40.0, 15.0, -2.0, -0.3], "cov_diag": [100.0, 100.0, 1.0, 1.0]},
    "init_filter": {"mean": [40.0, 15.0, -2.0, -0.3], "cov_diag": [100.0, 100.0, 1.0, 1.0]}
  },
  "filters": ["EKF", "IUKF", {"name": "damped", "linearizer": "unscented", "class": "iterated",
               "max_iters": 5, "tol": 1e-6, "damping": 0.5, "alpha": 0.9, "beta": 2.0}],
  "n_mc": 3,
  "base_seed": 7,
  "output_dir": "OUTDIR",
  "propagate_smoothed": false
})";

fs::path temp_dir() {
    fs::path dir = fs::temp_directory_path() /
                   ("ulf_test_" + std::to_string(::getpid()) + "_" +
                    std::to_string(rand()));
    fs::create_directories(dir);
    return dir;
}

std::string config_with_outdir(const fs::path& outdir) {
    std::string text = kConfigText;
    const std::string token = "OUTDIR";
    text.replace(text.find(token), token.size(), outdir.string());
    return text;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

int run_command(const std::string& cmd) {
    const int status = std::system(cmd.c_str());
    REQUIRE(status != -1);
    return WEXITSTATUS(status);
}

std::string capture_stdout(const std::string& cmd) {
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 512> buffer{};
    std::string out;
    while (fgets(buffer.data(), buffer.size(), pipe)) out += buffer.data();
    pclose(pipe);
    return out;
}

const char* cli_bin() { return std::getenv("ULF_CLI_BIN"); }

}  // namespace

TEST_CASE("config round-trips through serialization") {
    const ExperimentConfig parsed = parse_config_text(config_with_outdir("out"));
    const std::string serialized = serialize_config(parsed);
    const ExperimentConfig reparsed = parse_config_text(serialized);
    CHECK(parsed == reparsed);
    CHECK(serialize_config(reparsed) == serialized);
}

TEST_CASE("unknown config keys are a hard error naming the key") {
    std::string text = config_with_outdir("out");
    text.replace(text.find("\"n_mc\""), 6, "\"n_mcc\"");
    try {
        parse_config_text(text);
        FAIL("expected InvalidArgument");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("n_mcc") != std::string::npos);
    }
}

TEST_CASE("missing required fields are reported by name") {
    std::string text = config_with_outdir("out");
    const auto pos = text.find("  \"n_mc\": 3,\n");
    text.erase(pos, std::string("  \"n_mc\": 3,\n").size());
    try {
        parse_config_text(text);
        FAIL("expected InvalidArgument");
    } catch (const InvalidArgument& e) {
        CHECK(std::string(e.what()).find("n_mc") != std::string::npos);
    }
}

TEST_CASE("custom filter entries parse their policy fields") {
    const ExperimentConfig cfg = parse_config_text(config_with_outdir("out"));
    REQUIRE(cfg.filters.size() == 3);
    CHECK(cfg.filters[0].name == "EKF");
    const FilterSpec& damped = cfg.filters[2];
    CHECK(damped.name == "damped");
    CHECK(damped.policy.max_iters == 5);
    CHECK(damped.policy.damping == 0.5);
    const auto& rule = std::get<UnscentedRule>(damped.linearizer.rule.kind);
    CHECK(rule.alpha == 0.9);
    CHECK(rule.beta == 2.0);
    CHECK_FALSE(rule.kappa.has_value());
}

TEST_CASE("format_g17 round-trips doubles exactly") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> uniform(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        const double value = uniform(rng) * std::pow(10.0, static_cast<int>(i % 7) - 3);
        const double back = std::strtod(format_g17(value).c_str(), nullptr);
        CHECK(back == value);
    }
}

TEST_CASE("summary and plot files agree bit for bit") {
    const fs::path dir = temp_dir();
    const ExperimentConfig cfg = parse_config_text(config_with_outdir(dir));
    const BenchmarkResult result =
        run_benchmark(cfg.scenario, cfg.filters, cfg.n_mc, cfg.base_seed);
    write_summary_csv((dir / "summary.csv").string(), result);
    write_nees_time_csv((dir / "nees_time.csv").string(), result);
    write_plot_data(dir.string());

    const std::string summary = read_file(dir / "summary.csv");
    const std::string dat = read_file(dir / "rmse_vs_filter.dat");

    // Every numeric field of the summary must appear verbatim in the .dat.
    std::istringstream lines(summary);
    std::string line;
    std::getline(lines, line);  // header
    while (std::getline(lines, line)) {
        std::istringstream fields(line);
        std::string field;
        int idx = 0;
        while (std::getline(fields, field, ',')) {
            if (idx >= 4 && idx <= 7) {
                CAPTURE(field);
                CHECK(dat.find(field) != std::string::npos);
            }
            ++idx;
        }
    }
    fs::remove_all(dir);
}

TEST_CASE("plot-data fails cleanly without results") {
    const fs::path dir = temp_dir();
    CHECK_THROWS_AS(write_plot_data(dir.string()), MissingResults);
    // Header-only summary counts as empty.
    std::ofstream(dir / "summary.csv")
        << "filter,linearizer,class,n_mc,rmse_pos_mean,rmse_pos_se,nees_mean,divergence_rate,"
           "mean_iterations\n";
    CHECK_THROWS_AS(write_plot_data(dir.string()), MissingResults);
    fs::remove_all(dir);
}

TEST_CASE("zoo command prints the nine filters") {
    REQUIRE(cli_bin() != nullptr);
    const std::string out = capture_stdout(std::string(cli_bin()) + " zoo");
    CHECK(out.find("EKF") != std::string::npos);
    CHECK(out.find("IEKF") != std::string::npos);
    CHECK(out.find("DIPLF") != std::string::npos);
    int rows = 0;
    std::istringstream lines(out);
    std::string line;
    while (std::getline(lines, line)) {
        if (!line.empty()) ++rows;
    }
    CHECK(rows == 10);  // header + 9 filters

    // The EKF row names its linearizer and class.
    CHECK(out.find("Analytical") != std::string::npos);
    std::istringstream again(out);
    while (std::getline(again, line)) {
        if (line.rfind("EKF", 0) == 0) {
            CHECK(line.find("Analytical") != std::string::npos);
            CHECK(line.find("Standard") != std::string::npos);
        }
    }
}

TEST_CASE("run command produces deterministic byte-identical summaries") {
    REQUIRE(cli_bin() != nullptr);
    const fs::path dir = temp_dir();
    const fs::path out1 = dir / "out1";
    const fs::path out2 = dir / "out2";

    {
        std::ofstream cfg(dir / "exp1.json");
        cfg << config_with_outdir(out1);
    }
    {
        std::ofstream cfg(dir / "exp2.json");
        cfg << config_with_outdir(out2);
    }
    const std::string bin = cli_bin();
    CHECK(run_command(bin + " run " + (dir / "exp1.json").string() + " --traces") == 0);
    CHECK(run_command(bin + " run " + (dir / "exp2.json").string()) == 0);
    CHECK(read_file(out1 / "summary.csv") == read_file(out2 / "summary.csv"));
    CHECK(fs::exists(out1 / "meta.json"));
    CHECK(fs::exists(out1 / "nees_time.csv"));
    CHECK(fs::exists(out1 / "trace_EKF_run0.csv"));
    CHECK_FALSE(fs::exists(out2 / "trace_EKF_run0.csv"));

    // plot-data over a real results directory.
    CHECK(run_command(bin + " plot-data " + out1.string()) == 0);
    CHECK(fs::exists(out1 / "rmse_vs_filter.dat"));
    CHECK(fs::exists(out1 / "nees_vs_time.dat"));

    fs::remove_all(dir);
}

TEST_CASE("run command rejects a malformed config with exit code 2") {
    REQUIRE(cli_bin() != nullptr);
    const fs::path dir = temp_dir();
    {
        std::ofstream cfg(dir / "bad.json");
        std::string text = config_with_outdir(dir / "out");
        const auto pos = text.find("  \"n_mc\": 3,\n");
        text.erase(pos, std::string("  \"n_mc\": 3,\n").size());
        cfg << text;
    }
    CHECK(run_command(std::string(cli_bin()) + " run " + (dir / "bad.json").string() +
                      " 2>/dev/null") == 2);
    CHECK(run_command(std::string(cli_bin()) + " run " + (dir / "missing.json").string() +
                      " 2>/dev/null") == 2);
    CHECK(run_command(std::string(cli_bin()) + " plot-data " + (dir / "nowhere").string() +
                      " 2>/dev/null") == 2);
    fs::remove_all(dir);
}

TEST_CASE("run command reports total divergence with exit code 3") {
    REQUIRE(cli_bin() != nullptr);
    const fs::path dir = temp_dir();
    // Zero process noise, zero sensor noise, zero initial filter covariance:
    // the innovation covariance is singular at step 0 for every run.
    const std::string text = R"({
  "scenario": {
    "n_steps": 3,
    "dt": 1.0,
    "dynamics": {"type": "ncv", "q": 0.0},
    "sensors": [{"type": "position", "position": [0.0, 0.0], "sigma": 0.0}],
    "init_truth": {"mean": [0.0, 0.0, 1.0, 1.0], "cov_diag": [1.0, 1.0, 1.0, 1.0]},
    "init_filter": {"mean": [0.0, 0.0, 1.0, 1.0], "cov_diag": [0.0, 0.0, 0.0, 0.0]}
  },
  "filters": ["EKF"],
  "n_mc": 2,
  "base_seed": 1,
  "output_dir": ")" + (dir / "out").string() + R"("
})";
    {
        std::ofstream cfg(dir / "diverge.json");
        cfg << text;
    }
    CHECK(run_command(std::string(cli_bin()) + " run " + (dir / "diverge.json").string() +
                      " 2>/dev/null") == 3);
    fs::remove_all(dir);
}

#ifndef ULF_CONFIG_HPP
#define ULF_CONFIG_HPP

#include <string>
#include <vector>

#include "ulf/benchmark.hpp"
#include "ulf/scenario.hpp"

namespace ulf {

/// Full experiment description as read from a config file.
struct ExperimentConfig {
    Scenario scenario;
    std::vector<FilterSpec> filters;
    int n_mc = 1;
    std::uint64_t base_seed = 0;
    std::string output_dir = "out";
    bool propagate_smoothed = false;
};

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);

/// Parse a config file. Unknown keys are a hard error; error messages name
/// the offending field. Throws InvalidArgument.
ExperimentConfig parse_config_file(const std::string& path);

/// Parse config text (JSON).
ExperimentConfig parse_config_text(const std::string& text);

/// Serialize back to config text; parse_config_text(serialize_config(c))
/// equals c.
std::string serialize_config(const ExperimentConfig& config);

}  // namespace ulf

#endif  // ULF_CONFIG_HPP

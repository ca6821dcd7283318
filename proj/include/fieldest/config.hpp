#pragma once

#include <map>
#include <string>
#include <vector>

#include "fieldest/eval.hpp"

namespace fieldest {

class ConfigError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Everything the CLI can steer: a scenario plus batch/output knobs.
struct CliConfig {
    ScenarioConfig scenario;
    int workers = 0;  // 0: hardware concurrency
    int bench_scenarios = 100;
    bool bench_both = false;  // bench runs both estimators
    bool per_step_mse = false;
    std::string out_dir = "out";

    int effective_workers() const;
};

/// Flat `key = value` document with dotted keys. `#` starts a comment.
/// Unknown keys are an error.
std::map<std::string, std::string> parse_key_value_file(const std::string& path);

/// Applies one dotted key; throws ConfigError for unknown keys or bad values.
void apply_config_key(CliConfig& config, const std::string& key, const std::string& value);

void apply_config_map(CliConfig& config, const std::map<std::string, std::string>& values);

/// All keys with their current values, in a fixed order. Writing these lines
/// back through parse/apply reproduces the config.
std::vector<std::pair<std::string, std::string>> config_entries(const CliConfig& config);

void write_effective_config(const std::string& path, const CliConfig& config);

EstimatorKind parse_estimator(const std::string& name);  // "exact" | "approx"

}  // namespace fieldest

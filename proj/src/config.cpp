#include "fieldest/config.hpp"

#include <fstream>
#include <thread>

#include "fieldest/io.hpp"

namespace fieldest {

namespace {

std::string trim(const std::string& s) {
    const auto begin = s.find_first_not_of(" \t\r\n");
    if (begin == std::string::npos) return {};
    const auto end = s.find_last_not_of(" \t\r\n");
    return s.substr(begin, end - begin + 1);
}

double to_double(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(value, &used);
    } catch (const std::exception&) {
        throw ConfigError("config: bad number for " + key + ": '" + value + "'");
    }
    if (used != value.size())
        throw ConfigError("config: bad number for " + key + ": '" + value + "'");
    return v;
}

long long to_int(const std::string& key, const std::string& value) {
    std::size_t used = 0;
    long long v = 0;
    try {
        v = std::stoll(value, &used);
    } catch (const std::exception&) {
        throw ConfigError("config: bad integer for " + key + ": '" + value + "'");
    }
    if (used != value.size())
        throw ConfigError("config: bad integer for " + key + ": '" + value + "'");
    return v;
}

bool to_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigError("config: bad boolean for " + key + ": '" + value + "'");
}

}  // namespace

int CliConfig::effective_workers() const {
    if (workers > 0) return workers;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

EstimatorKind parse_estimator(const std::string& name) {
    if (name == "exact") return EstimatorKind::Exact;
    if (name == "approx") return EstimatorKind::Approx;
    throw ConfigError("config: unknown estimator '" + name + "' (want exact|approx)");
}

std::map<std::string, std::string> parse_key_value_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);

    std::map<std::string, std::string> values;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto comment = line.find('#');
        if (comment != std::string::npos) line.erase(comment);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: " + path + ":" + std::to_string(line_no) +
                              ": expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError("config: " + path + ":" + std::to_string(line_no) +
                              ": empty key");
        values[key] = value;
    }
    return values;
}

void apply_config_key(CliConfig& c, const std::string& key, const std::string& value) {
    ScenarioConfig& s = c.scenario;
    if (key == "seed") {
        s.seed = static_cast<std::uint64_t>(to_int(key, value));
    } else if (key == "steps") {
        s.steps = static_cast<int>(to_int(key, value));
    } else if (key == "estimator") {
        if (value == "both") {
            c.bench_both = true;
        } else {
            c.bench_both = false;
            s.estimator = parse_estimator(value);
        }
    } else if (key == "workers") {
        c.workers = static_cast<int>(to_int(key, value));
    } else if (key == "out") {
        c.out_dir = value;
    } else if (key == "area.x_min") {
        s.area.x_min = to_double(key, value);
    } else if (key == "area.x_max") {
        s.area.x_max = to_double(key, value);
    } else if (key == "area.y_min") {
        s.area.y_min = to_double(key, value);
    } else if (key == "area.y_max") {
        s.area.y_max = to_double(key, value);
    } else if (key == "cost.eta") {
        s.cost.eta = to_double(key, value);
    } else if (key == "cost.tau") {
        s.cost.tau = to_double(key, value);
    } else if (key == "truth.noise_variance") {
        s.noise_variance = to_double(key, value);
    } else if (key == "model.grid") {
        s.model_grid = static_cast<int>(to_int(key, value));
    } else if (key == "model.sigma") {
        s.model_sigma = to_double(key, value);
    } else if (key == "approx.epsilon") {
        s.approx.epsilon = to_double(key, value);
    } else if (key == "exact.damping") {
        s.exact.damping_multiplier = to_double(key, value);
    } else if (key == "exact.regularization") {
        s.exact.regularization = to_double(key, value);
    } else if (key == "exact.switch_threshold") {
        s.exact.switch_threshold = to_double(key, value);
    } else if (key == "exact.singular_threshold") {
        s.exact.singular_threshold = to_double(key, value);
    } else if (key == "sensing.rho") {
        s.sensing_step = to_double(key, value);
    } else if (key == "sensing.alpha") {
        s.sensing_alpha = to_double(key, value);
    } else if (key == "sensing.candidate_grid") {
        s.candidate_grid = static_cast<int>(to_int(key, value));
    } else if (key == "eval.resolution") {
        s.eval_resolution = static_cast<int>(to_int(key, value));
    } else if (key == "run.initial_x") {
        s.initial_position[0] = to_double(key, value);
    } else if (key == "run.initial_y") {
        s.initial_position[1] = to_double(key, value);
    } else if (key == "bench.scenarios") {
        c.bench_scenarios = static_cast<int>(to_int(key, value));
    } else if (key == "bench.per_step_mse") {
        c.per_step_mse = to_bool(key, value);
    } else {
        throw ConfigError("config: unknown key '" + key + "'");
    }
}

void apply_config_map(CliConfig& config, const std::map<std::string, std::string>& values) {
    for (const auto& [key, value] : values) apply_config_key(config, key, value);
}

std::vector<std::pair<std::string, std::string>> config_entries(const CliConfig& c) {
    const ScenarioConfig& s = c.scenario;
    const std::string estimator =
        c.bench_both ? "both" : estimator_name(s.estimator);
    return {
        {"seed", std::to_string(s.seed)},
        {"steps", std::to_string(s.steps)},
        {"estimator", estimator},
        {"workers", std::to_string(c.workers)},
        {"area.x_min", format_double(s.area.x_min)},
        {"area.x_max", format_double(s.area.x_max)},
        {"area.y_min", format_double(s.area.y_min)},
        {"area.y_max", format_double(s.area.y_max)},
        {"cost.eta", format_double(s.cost.eta)},
        {"cost.tau", format_double(s.cost.tau)},
        {"truth.noise_variance", format_double(s.noise_variance)},
        {"model.grid", std::to_string(s.model_grid)},
        {"model.sigma", format_double(s.model_sigma)},
        {"approx.epsilon", format_double(s.approx.epsilon)},
        {"exact.damping", format_double(s.exact.damping_multiplier)},
        {"exact.regularization", format_double(s.exact.regularization)},
        {"exact.switch_threshold", format_double(s.exact.switch_threshold)},
        {"exact.singular_threshold", format_double(s.exact.singular_threshold)},
        {"sensing.rho", format_double(s.sensing_step)},
        {"sensing.alpha", format_double(s.sensing_alpha)},
        {"sensing.candidate_grid", std::to_string(s.candidate_grid)},
        {"eval.resolution", std::to_string(s.eval_resolution)},
        {"run.initial_x", format_double(s.initial_position[0])},
        {"run.initial_y", format_double(s.initial_position[1])},
        {"bench.scenarios", std::to_string(c.bench_scenarios)},
        {"bench.per_step_mse", c.per_step_mse ? "true" : "false"},
    };
}

void write_effective_config(const std::string& path, const CliConfig& config) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    for (const auto& [key, value] : config_entries(config))
        out << key << " = " << value << '\n';
    out.flush();
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace fieldest

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <vector>

#include "fieldest/config.hpp"
#include "fieldest/io.hpp"

namespace {

using namespace fieldest;

// Exit codes: 0 success, 1 usage/config error, 2 I/O error, 3 numerical failure.
constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitIo = 2;
constexpr int kExitNumerical = 3;

struct SharedFlags {
    std::string config_path;
    std::string seed, out, estimator, steps, workers;
    CLI::Option* seed_opt = nullptr;
    CLI::Option* out_opt = nullptr;
    CLI::Option* estimator_opt = nullptr;
    CLI::Option* steps_opt = nullptr;
    CLI::Option* workers_opt = nullptr;
};

void add_shared_options(CLI::App* cmd, SharedFlags& f) {
    cmd->add_option("--config", f.config_path, "Key-value config file; flags override it");
    f.seed_opt = cmd->add_option("--seed", f.seed, "Scenario seed");
    f.out_opt = cmd->add_option("--out", f.out, "Output directory");
    f.estimator_opt =
        cmd->add_option("--estimator", f.estimator, "exact | approx (bench also: both)");
    f.steps_opt = cmd->add_option("--steps", f.steps, "Measurements per scenario");
    f.workers_opt = cmd->add_option("--workers", f.workers, "Worker threads (0 = all cores)");
}

// Defaults, then the config file, then any flags given on the command line.
CliConfig build_config(const SharedFlags& f) {
    CliConfig config;
    if (!f.config_path.empty()) apply_config_map(config, parse_key_value_file(f.config_path));
    if (f.seed_opt->count()) apply_config_key(config, "seed", f.seed);
    if (f.out_opt->count()) apply_config_key(config, "out", f.out);
    if (f.estimator_opt->count()) apply_config_key(config, "estimator", f.estimator);
    if (f.steps_opt->count()) apply_config_key(config, "steps", f.steps);
    if (f.workers_opt->count()) apply_config_key(config, "workers", f.workers);
    return config;
}

std::filesystem::path prepare_out_dir(const CliConfig& config) {
    std::filesystem::path dir(config.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string());
    return dir;
}

int cmd_generate_field(const CliConfig& config) {
    config.scenario.validate();
    const auto dir = prepare_out_dir(config);

    Rng rng(config.scenario.seed);
    GroundTruth gt = sample_ground_truth(config.scenario.area, rng);
    gt.noise_variance = config.scenario.noise_variance;
    gt.threshold = config.scenario.cost.tau;

    const EvalGrid grid{config.scenario.eval_resolution, config.scenario.area};
    write_field_csv((dir / "field.csv").string(), gt.model, std::sqrt(gt.noise_variance),
                    gt.threshold, grid);
    write_effective_config((dir / "effective_config.txt").string(), config);

    std::printf("field dump: %s (%d points)\n", (dir / "field.csv").c_str(), grid.size());
    return kExitOk;
}

int cmd_run(const CliConfig& config) {
    if (config.bench_both)
        throw ConfigError("run: pick one estimator (exact or approx), not both");
    config.scenario.validate();
    const auto dir = prepare_out_dir(config);

    const RunRecord rec = run_scenario(config.scenario);

    write_trace_csv((dir / "estimate_trace.csv").string(), rec);
    write_waypoints_csv((dir / "waypoints.csv").string(), rec);
    write_step_mse_csv((dir / "mse.csv").string(), {rec});
    write_field_csv((dir / "estimated_field.csv").string(), rec.estimate,
                    std::sqrt(rec.truth.noise_variance), rec.truth.threshold,
                    EvalGrid{config.scenario.eval_resolution, config.scenario.area});
    write_effective_config((dir / "effective_config.txt").string(), config);

    if (rec.aborted) {
        std::fprintf(stderr, "run aborted: %s\n", rec.failure.c_str());
        return kExitNumerical;
    }
    std::printf("%s: %d steps, final MSE %.6g, estimator+sensing time %.3f s\n",
                estimator_name(rec.estimator), config.scenario.steps, rec.final_mse(),
                rec.algo_seconds);
    return kExitOk;
}

int cmd_bench(const CliConfig& config, const CLI::Option* scenarios_opt,
              const std::string& scenarios_flag, bool per_step_flag) {
    CliConfig cfg = config;
    if (scenarios_opt->count()) apply_config_key(cfg, "bench.scenarios", scenarios_flag);
    if (per_step_flag) cfg.per_step_mse = true;
    if (cfg.bench_scenarios < 1) throw ConfigError("bench: need at least one scenario");
    cfg.scenario.validate();
    const auto dir = prepare_out_dir(cfg);

    std::vector<EstimatorKind> kinds;
    if (cfg.bench_both)
        kinds = {EstimatorKind::Approx, EstimatorKind::Exact};
    else
        kinds = {cfg.scenario.estimator};

    std::vector<RunRecord> all;
    std::vector<BoxplotRow> box_rows;
    std::printf("%-8s %12s %12s %12s %14s %8s\n", "method", "median MSE", "min MSE",
                "max MSE", "time/run (s)", "aborted");
    for (EstimatorKind kind : kinds) {
        ScenarioConfig scenario = cfg.scenario;
        scenario.estimator = kind;
        std::vector<RunRecord> records =
            run_batch(scenario, cfg.bench_scenarios, cfg.effective_workers());
        const Summary summary = summarize(records);
        std::printf("%-8s %12.5g %12.5g %12.5g %14.3f %5d/%d\n", estimator_name(kind),
                    summary.median_mse, summary.min_mse, summary.max_mse,
                    summary.mean_time_s, summary.aborted, summary.total);
        box_rows.push_back({estimator_name(kind), summary});
        all.insert(all.end(), std::make_move_iterator(records.begin()),
                   std::make_move_iterator(records.end()));
    }

    write_results_csv((dir / "results.csv").string(), all);
    write_boxplot_csv((dir / "boxplot.csv").string(), box_rows);
    if (cfg.per_step_mse) write_step_mse_csv((dir / "per_step_mse.csv").string(), all);
    write_effective_config((dir / "effective_config.txt").string(), cfg);

    int completed = 0;
    for (const RunRecord& rec : all)
        if (!rec.aborted) ++completed;
    const double rate = static_cast<double>(completed) / static_cast<double>(all.size());
    if (rate < 0.9) {
        std::fprintf(stderr, "bench: only %d/%zu runs completed\n", completed, all.size());
        return kExitNumerical;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Spatial field estimation from binary sensor measurements"};
    app.require_subcommand(1);

    SharedFlags gen_flags, run_flags, bench_flags;
    CLI::App* gen = app.add_subcommand(
        "generate-field", "Sample a ground-truth field and dump it over the grid");
    add_shared_options(gen, gen_flags);

    CLI::App* run = app.add_subcommand(
        "run", "One scenario: simulate, estimate online, export traces");
    add_shared_options(run, run_flags);

    CLI::App* bench = app.add_subcommand(
        "bench", "Seeded scenario batch with summary statistics");
    add_shared_options(bench, bench_flags);
    std::string scenarios_flag;
    CLI::Option* scenarios_opt =
        bench->add_option("--scenarios,-n", scenarios_flag, "Scenarios per estimator");
    bool per_step_flag = false;
    bench->add_flag("--per-step-mse", per_step_flag, "Also export the per-step MSE CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (gen->parsed()) return cmd_generate_field(build_config(gen_flags));
        if (run->parsed()) return cmd_run(build_config(run_flags));
        if (bench->parsed())
            return cmd_bench(build_config(bench_flags), scenarios_opt, scenarios_flag,
                             per_step_flag);
    } catch (const IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitIo;
    } catch (const NumericalError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumerical;
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitNumerical;
    }
    return kExitConfig;
}

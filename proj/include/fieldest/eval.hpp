#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fieldest/field.hpp"
#include "fieldest/onm_approx.hpp"
#include "fieldest/onm_exact.hpp"
#include "fieldest/sensing.hpp"

namespace fieldest {

/// Cell-centered resolution x resolution lattice over the area.
struct EvalGrid {
    int resolution = 32;
    AreaOfInterest area;

    Eigen::Vector2d point(int ix, int iy) const;
    int size() const { return resolution * resolution; }
};

/// Mean squared gap between the two detection-probability maps over the
/// grid, both evaluated with the truth's noise level and threshold.
double mse_probability_field(const GroundTruth& truth, const FieldModel& estimate,
                             const EvalGrid& grid);

enum class EstimatorKind { Exact, Approx };
const char* estimator_name(EstimatorKind kind);

struct ScenarioConfig {
    std::uint64_t seed = 0;
    AreaOfInterest area;
    EstimatorKind estimator = EstimatorKind::Approx;
    ExactOnmConfig exact;
    ApproxOnmConfig approx;
    CostParams cost;               // cost.tau doubles as the sensor threshold
    double noise_variance = 0.1;
    int model_grid = 4;            // estimation basis: model_grid^2 kernels
    double model_sigma = 25.0;
    int steps = 1000;
    Eigen::Vector2d initial_position{50.0, 50.0};
    double sensing_step = 5.0;
    double sensing_alpha = 0.4;
    int candidate_grid = 0;        // 0: kernel centers; n > 0: n x n uniform grid
    int eval_resolution = 32;
    bool track_regret = false;     // expensive: one batch solve per step
    BatchConfig batch;

    void validate() const;  // throws std::invalid_argument
};

struct StepDiag {
    double grad_norm = 0.0;
    double hessian_min_eig = 0.0;
    bool damped = false;
};

struct RunRecord {
    int scenario_id = 0;
    std::uint64_t seed = 0;
    EstimatorKind estimator = EstimatorKind::Approx;
    bool aborted = false;
    std::string failure;

    // Index k holds the state after k measurements; entry 0 is the initial
    // estimate. Diagnostics and waypoints have one entry per step taken.
    std::vector<double> mse_trace;
    std::vector<Eigen::VectorXd> beta_trace;
    std::vector<StepDiag> step_diags;
    std::vector<Eigen::Vector2d> positions;  // where each measurement was taken
    std::vector<Eigen::Vector2d> targets;
    std::vector<double> target_lambda;

    std::vector<double> step_seconds;  // estimator update only
    double algo_seconds = 0.0;         // estimator + sensing, excludes evaluation

    GroundTruth truth;
    FieldModel estimate;  // basis with the final coefficients

    // Filled when track_regret is set.
    std::vector<double> regret;               // partial sums
    std::vector<double> accumulated_min_eig;  // frozen-term Hessian sum

    double final_mse() const { return mse_trace.back(); }
};

/// One full scenario: sample a ground truth, walk the vehicle, feed the
/// estimator, record everything. Estimator failures are recorded as an
/// aborted run, not thrown. Deterministic given the seed.
RunRecord run_scenario(const ScenarioConfig& config);

struct Summary {
    int total = 0;
    int aborted = 0;
    double median_mse = 0.0;
    double min_mse = 0.0;
    double max_mse = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double whisker_lo = 0.0;  // Tukey 1.5 IQR, clamped to the data
    double whisker_hi = 0.0;
    std::vector<double> outliers;
    double mean_time_s = 0.0;
};

/// Order statistics of the final MSE over completed runs; aborted runs are
/// counted but excluded.
Summary summarize(const std::vector<RunRecord>& records);

/// n scenarios seeded base.seed + index, run across `workers` threads,
/// returned in seed order.
std::vector<RunRecord> run_batch(const ScenarioConfig& base, int n_scenarios, int workers);

}  // namespace fieldest

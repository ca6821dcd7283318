#include "fieldest/eval.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace fieldest {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_between(Clock::time_point a, Clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

std::vector<Eigen::Vector2d> cell_centered_points(const AreaOfInterest& area, int per_axis) {
    std::vector<Eigen::Vector2d> points;
    points.reserve(static_cast<std::size_t>(per_axis) * per_axis);
    const double dx = area.width() / per_axis;
    const double dy = area.height() / per_axis;
    for (int iy = 0; iy < per_axis; ++iy)
        for (int ix = 0; ix < per_axis; ++ix)
            points.emplace_back(area.x_min + (ix + 0.5) * dx, area.y_min + (iy + 0.5) * dy);
    return points;
}

double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) return 0.0;
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

Eigen::Vector2d EvalGrid::point(int ix, int iy) const {
    const double dx = area.width() / resolution;
    const double dy = area.height() / resolution;
    return {area.x_min + (ix + 0.5) * dx, area.y_min + (iy + 0.5) * dy};
}

double mse_probability_field(const GroundTruth& truth, const FieldModel& estimate,
                             const EvalGrid& grid) {
    if (grid.resolution < 1)
        throw std::invalid_argument("mse_probability_field: empty grid");

    const double sigma_v = std::sqrt(truth.noise_variance);
    double sum = 0.0;
    for (int iy = 0; iy < grid.resolution; ++iy) {
        for (int ix = 0; ix < grid.resolution; ++ix) {
            const Eigen::Vector2d x = grid.point(ix, iy);
            const double p_truth =
                detection_probability(truth.model, sigma_v, truth.threshold, x);
            const double p_estimate =
                detection_probability(estimate, sigma_v, truth.threshold, x);
            const double gap = p_truth - p_estimate;
            sum += gap * gap;
        }
    }
    return sum / grid.size();
}

const char* estimator_name(EstimatorKind kind) {
    return kind == EstimatorKind::Exact ? "exact" : "approx";
}

void ScenarioConfig::validate() const {
    if (!area.valid()) throw std::invalid_argument("scenario: invalid area");
    if (steps < 0) throw std::invalid_argument("scenario: steps must be >= 0");
    if (model_grid < 1) throw std::invalid_argument("scenario: model_grid must be >= 1");
    if (!(model_sigma > 0.0)) throw std::invalid_argument("scenario: model_sigma must be > 0");
    if (!(noise_variance > 0.0))
        throw std::invalid_argument("scenario: noise_variance must be > 0");
    if (!(cost.eta > 0.0)) throw std::invalid_argument("scenario: eta must be > 0");
    if (!(cost.tau > 0.0)) throw std::invalid_argument("scenario: tau must be > 0");
    if (!(sensing_step > 0.0)) throw std::invalid_argument("scenario: sensing step must be > 0");
    if (sensing_alpha < 0.0 || sensing_alpha > 1.0)
        throw std::invalid_argument("scenario: sensing alpha must be in [0,1]");
    if (candidate_grid < 0)
        throw std::invalid_argument("scenario: candidate_grid must be >= 0");
    if (eval_resolution < 1)
        throw std::invalid_argument("scenario: eval_resolution must be >= 1");
    if (!(approx.epsilon > 0.0)) throw std::invalid_argument("scenario: epsilon must be > 0");
    if (!area.contains(initial_position))
        throw std::invalid_argument("scenario: initial position outside the area");
}

RunRecord run_scenario(const ScenarioConfig& config) {
    config.validate();

    RunRecord rec;
    rec.seed = config.seed;
    rec.estimator = config.estimator;

    Rng rng(config.seed);
    rec.truth = sample_ground_truth(config.area, rng);
    rec.truth.noise_variance = config.noise_variance;
    rec.truth.threshold = config.cost.tau;

    const FieldModel basis = make_grid_model(config.area, config.model_grid, config.model_sigma);
    const Eigen::Index p = basis.basis_count();

    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Eigen::VectorXd beta0(p);
    for (Eigen::Index i = 0; i < p; ++i) beta0[i] = unit(rng);

    SensingConfig sensing;
    sensing.step = config.sensing_step;
    sensing.alpha = config.sensing_alpha;
    sensing.area = config.area;
    if (config.candidate_grid > 0) {
        sensing.candidates = cell_centered_points(config.area, config.candidate_grid);
    } else {
        sensing.candidates.reserve(p);
        for (Eigen::Index i = 0; i < p; ++i) sensing.candidates.push_back(basis.centers.col(i));
    }

    const EvalGrid grid{config.eval_resolution, config.area};

    // Truth probabilities and basis kernels over the grid never change;
    // cache them so the per-step MSE trace costs one dot product per point.
    // Same point order and arithmetic as mse_probability_field.
    const double sigma_v = std::sqrt(rec.truth.noise_variance);
    const int grid_points = grid.size();
    std::vector<double> truth_prob(grid_points);
    std::vector<Eigen::VectorXd> grid_kernels(grid_points);
    for (int iy = 0; iy < grid.resolution; ++iy) {
        for (int ix = 0; ix < grid.resolution; ++ix) {
            const int g = iy * grid.resolution + ix;
            const Eigen::Vector2d x = grid.point(ix, iy);
            truth_prob[g] =
                detection_probability(rec.truth.model, sigma_v, rec.truth.threshold, x);
            grid_kernels[g] = kernel_vector(basis, x);
        }
    }
    const auto estimate_mse = [&](const Eigen::VectorXd& beta) {
        double sum = 0.0;
        for (int g = 0; g < grid_points; ++g) {
            const double phi = beta.dot(grid_kernels[g]);
            const double prob =
                standard_normal_cdf((phi - rec.truth.threshold) / sigma_v);
            const double gap = truth_prob[g] - prob;
            sum += gap * gap;
        }
        return sum / grid_points;
    };

    ExactOnmState exact;
    ApproxOnmState approx;
    const bool is_exact = config.estimator == EstimatorKind::Exact;
    if (is_exact)
        exact = init_exact(beta0);
    else
        approx = init_approx(beta0, config.approx);

    VehicleState vehicle{config.initial_position, std::nullopt};

    rec.beta_trace.push_back(beta0);
    rec.mse_trace.push_back(estimate_mse(beta0));
    rec.step_seconds.reserve(config.steps);

    RunTrace regret_trace;
    Eigen::MatrixXd frozen_hessian_sum;
    if (config.track_regret) {
        regret_trace.betas.push_back(beta0);
        frozen_hessian_sum = Eigen::MatrixXd::Zero(p, p);
    }

    double algo_seconds = 0.0;
    for (int k = 0; k < config.steps; ++k) {
        const Measurement m = simulate_measurement(rec.truth, vehicle.position, k, rng);
        rec.positions.push_back(vehicle.position);

        const Eigen::VectorXd beta_before =
            is_exact ? exact.beta_hat : approx.beta_hat;
        StepDiag diag;
        try {
            const auto t0 = Clock::now();
            if (is_exact) {
                const ExactStepInfo info =
                    exact_step(exact, basis, config.exact, config.cost, m);
                diag = {info.grad_norm, info.hessian_min_eig, info.damped};
            } else {
                const ApproxStepInfo info = approx_step(approx, basis, config.cost, m);
                diag.grad_norm = info.grad_norm;
                diag.damped = false;
            }
            const auto t1 = Clock::now();
            rec.step_seconds.push_back(seconds_between(t0, t1));
            algo_seconds += rec.step_seconds.back();

            const Eigen::VectorXd& beta_now = is_exact ? exact.beta_hat : approx.beta_hat;
            if (!beta_now.allFinite())
                throw NumericalError("non-finite estimate after step " + std::to_string(k));

            if (!is_exact) {
                // lambda_min of the accumulated Hessian is 1/lambda_max(P).
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(
                    approx.inv_hessian, Eigen::EigenvaluesOnly);
                diag.hessian_min_eig = 1.0 / solver.eigenvalues().maxCoeff();
            }

            // Pick the next measurement location.
            const auto t2 = Clock::now();
            Eigen::MatrixXd sensed_hessian;
            if (is_exact) {
                sensed_hessian = total_hessian(config.cost, exact.beta_hat, exact.history);
            } else {
                sensed_hessian = approx.inv_hessian.llt().solve(
                    Eigen::MatrixXd::Identity(p, p));
                sensed_hessian = (0.5 * (sensed_hessian + sensed_hessian.transpose())).eval();
            }
            const TargetChoice target =
                select_target(sensed_hessian, beta_now, config.cost, basis, sensing);
            const MotionStep motion = next_position(vehicle, target.point, sensing);
            const auto t3 = Clock::now();
            algo_seconds += seconds_between(t2, t3);

            vehicle = {motion.position, motion.direction};
            rec.targets.push_back(target.point);
            rec.target_lambda.push_back(target.lambda_min);
        } catch (const std::exception& e) {
            rec.aborted = true;
            rec.failure = e.what();
            break;
        }

        const Eigen::VectorXd& beta_now = is_exact ? exact.beta_hat : approx.beta_hat;
        rec.beta_trace.push_back(beta_now);
        rec.step_diags.push_back(diag);
        rec.mse_trace.push_back(estimate_mse(beta_now));

        if (config.track_regret) {
            const StageTerm term = make_stage_term(basis, m);
            frozen_hessian_sum.noalias() +=
                stage_hessian(config.cost, beta_before, term);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(frozen_hessian_sum,
                                                                  Eigen::EigenvaluesOnly);
            rec.accumulated_min_eig.push_back(solver.eigenvalues()(0));
            regret_trace.history.push_back(term);
            regret_trace.betas.push_back(beta_now);
        }
    }
    rec.algo_seconds = algo_seconds;

    rec.estimate = basis;
    rec.estimate.coefficients = rec.beta_trace.back();

    if (config.track_regret && !rec.aborted && !regret_trace.history.empty()) {
        try {
            rec.regret = empirical_regret(config.cost, regret_trace, config.batch);
        } catch (const std::exception& e) {
            rec.aborted = true;
            rec.failure = e.what();
        }
    }

    return rec;
}

Summary summarize(const std::vector<RunRecord>& records) {
    if (records.empty()) throw std::invalid_argument("summarize: no records");

    Summary s;
    s.total = static_cast<int>(records.size());

    std::vector<double> mse;
    double time_sum = 0.0;
    for (const RunRecord& rec : records) {
        if (rec.aborted) {
            ++s.aborted;
            continue;
        }
        mse.push_back(rec.final_mse());
        time_sum += rec.algo_seconds;
    }
    if (mse.empty()) return s;

    std::sort(mse.begin(), mse.end());
    s.min_mse = mse.front();
    s.max_mse = mse.back();
    s.median_mse = quantile_sorted(mse, 0.5);
    s.q1 = quantile_sorted(mse, 0.25);
    s.q3 = quantile_sorted(mse, 0.75);
    s.mean_time_s = time_sum / static_cast<double>(mse.size());

    const double iqr = s.q3 - s.q1;
    const double lo_fence = s.q1 - 1.5 * iqr;
    const double hi_fence = s.q3 + 1.5 * iqr;
    s.whisker_lo = s.max_mse;
    s.whisker_hi = s.min_mse;
    for (double v : mse) {
        if (v >= lo_fence && v <= hi_fence) {
            s.whisker_lo = std::min(s.whisker_lo, v);
            s.whisker_hi = std::max(s.whisker_hi, v);
        } else {
            s.outliers.push_back(v);
        }
    }
    return s;
}

std::vector<RunRecord> run_batch(const ScenarioConfig& base, int n_scenarios, int workers) {
    if (n_scenarios < 1) throw std::invalid_argument("run_batch: need at least one scenario");
    base.validate();

    std::vector<RunRecord> records(n_scenarios);
    std::atomic<int> next{0};
    const auto work = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n_scenarios) return;
            ScenarioConfig config = base;
            config.seed = base.seed + static_cast<std::uint64_t>(i);
            records[static_cast<std::size_t>(i)] = run_scenario(config);
            records[static_cast<std::size_t>(i)].scenario_id = i;
        }
    };

    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (std::thread& t : pool) t.join();
    }
    return records;
}

}  // namespace fieldest

#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "fieldest/onm_approx.hpp"
#include "fieldest/onm_exact.hpp"
#include "fieldest/sensing.hpp"
#include "oracles.hpp"

using namespace fieldest;

namespace {

// Two well-separated kernels.
FieldModel two_kernel_model() {
    FieldModel model;
    model.centers.resize(2, 2);
    model.centers.col(0) = Eigen::Vector2d(25.0, 50.0);
    model.centers.col(1) = Eigen::Vector2d(75.0, 50.0);
    model.length_scales = Eigen::VectorXd::Constant(2, 25.0);
    model.coefficients = Eigen::VectorXd::Zero(2);
    return model;
}

// Measurements drawn from a known field so labels are mixed and the batch
// minimizer is interior.
std::vector<Measurement> synthetic_measurements(const FieldModel& basis,
                                                const Eigen::VectorXd& beta_true,
                                                int count, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Measurement> out;
    const CostParams params;
    for (int t = 0; t < count; ++t) {
        const Eigen::Vector2d x = oracles::random_point(AreaOfInterest{}, rng);
        const Eigen::VectorXd kernel = kernel_vector(basis, x);
        const double margin = beta_true.dot(kernel) - params.tau;
        const double prob = 1.0 / (1.0 + std::exp(-params.eta * margin));
        out.push_back(oracles::make_measurement(x, unit(rng) < prob ? 1 : 0, t));
    }
    return out;
}

}  // namespace

TEST_CASE("a saturated-correct measurement leaves the estimate in place") {
    FieldModel single;
    single.centers.resize(2, 1);
    single.centers.col(0) = Eigen::Vector2d(0.0, 0.0);
    single.length_scales = Eigen::VectorXd::Constant(1, 10.0);
    single.coefficients = Eigen::VectorXd::Zero(1);

    ExactOnmState state = init_exact(Eigen::VectorXd::Constant(1, 500.0));
    const Eigen::VectorXd before = state.beta_hat;
    exact_step(state, single, ExactOnmConfig{}, CostParams{},
               oracles::make_measurement(Eigen::Vector2d(0.0, 0.0), 1, 0));
    CHECK((state.beta_hat - before).norm() < 1e-8);
}

TEST_CASE("online estimate lands near the batch optimum on a synthetic history") {
    const FieldModel basis = two_kernel_model();
    const CostParams params;
    std::mt19937_64 rng(61);
    const Eigen::VectorXd beta_true = (Eigen::VectorXd(2) << 1.2, 0.9).finished();
    const auto measurements = synthetic_measurements(basis, beta_true, 30, rng);

    ExactOnmState state = init_exact((Eigen::VectorXd(2) << 0.5, 0.5).finished());
    for (const Measurement& m : measurements)
        exact_step(state, basis, ExactOnmConfig{}, params, m);

    const BatchResult opt = batch_optimum(params, state.history, state.beta_hat);
    CHECK(opt.converged);
    CHECK(opt.iterations <= 3);
}

TEST_CASE("above the switch threshold the step is the plain Newton step") {
    const FieldModel basis = two_kernel_model();
    const CostParams params;
    std::mt19937_64 rng(67);
    const Eigen::VectorXd beta_true = (Eigen::VectorXd(2) << 1.3, 1.1).finished();
    const auto measurements = synthetic_measurements(basis, beta_true, 60, rng);

    ExactOnmConfig config;
    ExactOnmState state = init_exact((Eigen::VectorXd(2) << 0.8, 0.8).finished());
    bool saw_undamped = false;
    for (const Measurement& m : measurements) {
        const Eigen::VectorXd beta_before = state.beta_hat;
        std::vector<StageTerm> with_new = state.history;
        with_new.push_back(make_stage_term(basis, m));

        const ExactStepInfo info = exact_step(state, basis, config, params, m);
        if (info.damped) continue;
        saw_undamped = true;

        // Recompute the plain Newton step from the pre-step estimate.
        Eigen::VectorXd grad;
        Eigen::MatrixXd hess;
        total_gradient_hessian(params, beta_before, with_new, grad, hess);
        CHECK(oracles::jacobi_min_eigenvalue(hess) >=
              config.switch_threshold - 1e-9);
        const Eigen::VectorXd expected = beta_before - hess.llt().solve(grad);
        CHECK((state.beta_hat - expected).norm() <= 1e-12 * (1.0 + expected.norm()));
        CHECK_FALSE(info.regularized);
    }
    CHECK(saw_undamped);
}

TEST_CASE("degenerate Hessian reports the offending step") {
    const FieldModel basis = two_kernel_model();
    ExactOnmConfig config;
    config.regularization = 0.0;
    config.switch_threshold = 0.0;  // force the Newton branch
    config.singular_threshold = 1e-6;

    ExactOnmState state = init_exact((Eigen::VectorXd(2) << 0.5, 0.5).finished());
    try {
        exact_step(state, basis, config, CostParams{},
                   oracles::make_measurement(Eigen::Vector2d(25.0, 50.0), 1, 0));
        FAIL("expected DegenerateHessianError");
    } catch (const DegenerateHessianError& e) {
        CHECK(e.step() == 0);
        CHECK(std::string(e.what()).find("step 0") != std::string::npos);
    }
}

TEST_CASE("fixed seeds reproduce the estimate trace bit for bit") {
    const FieldModel basis = two_kernel_model();
    const CostParams params;
    const Eigen::VectorXd beta_true = (Eigen::VectorXd(2) << 1.0, 1.2).finished();

    const auto run_once = [&] {
        std::mt19937_64 rng(71);
        ExactOnmState state = init_exact((Eigen::VectorXd(2) << 0.4, 0.6).finished());
        std::vector<Eigen::VectorXd> trace;
        for (const Measurement& m : synthetic_measurements(basis, beta_true, 25, rng)) {
            exact_step(state, basis, ExactOnmConfig{}, params, m);
            trace.push_back(state.beta_hat);
        }
        return trace;
    };
    const auto a = run_once();
    const auto b = run_once();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("batch optimum") {
    const CostParams params;

    SUBCASE("already-saturated consistent history returns the start point") {
        FieldModel single;
        single.centers.resize(2, 1);
        single.centers.col(0) = Eigen::Vector2d(0.0, 0.0);
        single.length_scales = Eigen::VectorXd::Constant(1, 10.0);
        single.coefficients = Eigen::VectorXd::Zero(1);
        const Eigen::VectorXd beta0 = Eigen::VectorXd::Constant(1, 300.0);
        std::vector<StageTerm> history;
        for (int t = 0; t < 5; ++t)
            history.push_back(make_stage_term(
                single, oracles::make_measurement(Eigen::Vector2d(0.0, 0.0), 1, t)));
        const BatchResult result = batch_optimum(params, history, beta0);
        CHECK(result.converged);
        CHECK(result.iterations == 0);
        CHECK(result.beta == beta0);
    }
    SUBCASE("one separable measurement drives the cost to zero") {
        FieldModel single;
        single.centers.resize(2, 1);
        single.centers.col(0) = Eigen::Vector2d(0.0, 0.0);
        single.length_scales = Eigen::VectorXd::Constant(1, 10.0);
        single.coefficients = Eigen::VectorXd::Zero(1);
        std::vector<StageTerm> history{make_stage_term(
            single, oracles::make_measurement(Eigen::Vector2d(0.0, 0.0), 1, 0))};
        const BatchResult result =
            batch_optimum(params, history, Eigen::VectorXd::Zero(1));
        CHECK(result.converged);
        CHECK(result.beta[0] > params.tau);  // margin well past zero
        CHECK(total_cost(params, result.beta, history) < 1e-6);
    }
    SUBCASE("beats 1000 random probe points") {
        FieldModel model;
        model.centers.resize(2, 3);
        model.centers.col(0) = Eigen::Vector2d(20.0, 20.0);
        model.centers.col(1) = Eigen::Vector2d(80.0, 30.0);
        model.centers.col(2) = Eigen::Vector2d(50.0, 80.0);
        model.length_scales = Eigen::VectorXd::Constant(3, 30.0);
        model.coefficients = Eigen::VectorXd::Zero(3);

        std::mt19937_64 rng(73);
        const Eigen::VectorXd beta_true = (Eigen::VectorXd(3) << 1.1, 0.8, 1.3).finished();
        std::vector<StageTerm> history;
        for (const Measurement& m : synthetic_measurements(model, beta_true, 50, rng))
            history.push_back(make_stage_term(model, m));
        const BatchResult result =
            batch_optimum(params, history, Eigen::VectorXd::Constant(3, 0.5));
        CHECK(result.converged);
        const double best = total_cost(params, result.beta, history);
        std::uniform_real_distribution<double> probe(-2.0, 4.0);
        for (int trial = 0; trial < 1000; ++trial) {
            Eigen::VectorXd candidate(3);
            for (int i = 0; i < 3; ++i) candidate[i] = probe(rng);
            CHECK(best <= total_cost(params, candidate, history) + 1e-12);
        }
    }
    SUBCASE("a converged point is a Newton fixed point") {
        const FieldModel basis = two_kernel_model();
        std::mt19937_64 rng(79);
        const Eigen::VectorXd beta_true = (Eigen::VectorXd(2) << 1.2, 1.0).finished();
        std::vector<StageTerm> history;
        for (const Measurement& m : synthetic_measurements(basis, beta_true, 40, rng))
            history.push_back(make_stage_term(basis, m));
        const BatchResult result =
            batch_optimum(params, history, (Eigen::VectorXd(2) << 0.5, 0.5).finished());
        REQUIRE(result.converged);

        Eigen::VectorXd grad;
        Eigen::MatrixXd hess;
        total_gradient_hessian(params, result.beta, history, grad, hess);
        hess.diagonal().array() += 1e-8;
        CHECK(hess.llt().solve(grad).norm() < 1e-6);
    }
    SUBCASE("empty history is rejected") {
        CHECK_THROWS_AS(
            batch_optimum(params, std::span<const StageTerm>{}, Eigen::VectorXd::Zero(2)),
            std::invalid_argument);
    }
}

TEST_CASE("empirical regret") {
    const FieldModel basis = two_kernel_model();
    const CostParams params;
    std::mt19937_64 rng(83);
    const Eigen::VectorXd beta_true = (Eigen::VectorXd(2) << 1.1, 0.9).finished();

    SUBCASE("tracking the per-step optimum gives zero regret") {
        RunTrace trace;
        for (const Measurement& m : synthetic_measurements(basis, beta_true, 10, rng))
            trace.history.push_back(make_stage_term(basis, m));
        Eigen::VectorXd warm = (Eigen::VectorXd(2) << 0.5, 0.5).finished();
        for (std::size_t k = 0; k < trace.history.size(); ++k) {
            const std::span<const StageTerm> prefix(trace.history.data(), k + 1);
            warm = batch_optimum(params, prefix, warm).beta;
            trace.betas.push_back(warm);
        }
        const std::vector<double> regret = empirical_regret(params, trace);
        for (double r : regret) CHECK(std::abs(r) <= 1e-9);
    }
    SUBCASE("partial sums are nonnegative and nondecreasing on an online run") {
        // p = 4, and a batch oracle loose enough for the separable prefixes
        // that show up early in an online run.
        const FieldModel grid = make_grid_model(AreaOfInterest{}, 2, 35.0);
        BatchConfig batch;
        batch.grad_tolerance = 1e-6;
        batch.max_iterations = 300;

        std::mt19937_64 run_rng(85);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        Eigen::VectorXd truth(4);
        for (int i = 0; i < 4; ++i) truth[i] = 0.7 + 0.7 * unit(run_rng);

        ExactOnmState state = init_exact(Eigen::VectorXd::Constant(4, 0.5));
        RunTrace trace;
        trace.betas.push_back(state.beta_hat);
        for (const Measurement& m : synthetic_measurements(grid, truth, 50, run_rng)) {
            trace.history.push_back(make_stage_term(grid, m));
            exact_step(state, grid, ExactOnmConfig{}, params, m);
            trace.betas.push_back(state.beta_hat);
        }
        const std::vector<double> regret = empirical_regret(params, trace, batch);
        REQUIRE(regret.size() == 50);
        double prev = 0.0;
        for (double r : regret) {
            CHECK(r >= -1e-9);
            CHECK(r >= prev - 1e-9);
            prev = r;
        }
        // Average regret shrinks as tracking improves.
        CHECK(regret[49] / 50.0 < regret[9] / 10.0);
    }
}

TEST_CASE("sliding-window minimum eigenvalue") {
    const CostParams params;

    SUBCASE("identical positions leave the window sum rank deficient") {
        const FieldModel basis = two_kernel_model();
        RunTrace trace;
        for (int t = 0; t < 8; ++t) {
            trace.history.push_back(make_stage_term(
                basis, oracles::make_measurement(Eigen::Vector2d(25.0, 50.0), 1, t)));
            trace.betas.push_back((Eigen::VectorXd(2) << 0.5, 0.5).finished());
        }
        for (double lam : window_min_eigenvalue(params, trace, 5))
            CHECK(std::abs(lam) <= 1e-12);
    }
    SUBCASE("window 1 at p = 1 reduces to the stage curvature") {
        FieldModel single;
        single.centers.resize(2, 1);
        single.centers.col(0) = Eigen::Vector2d(50.0, 50.0);
        single.length_scales = Eigen::VectorXd::Constant(1, 30.0);
        single.coefficients = Eigen::VectorXd::Zero(1);

        std::mt19937_64 rng(89);
        RunTrace trace;
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int t = 0; t < 12; ++t) {
            trace.history.push_back(make_stage_term(
                single, oracles::make_measurement(
                            oracles::random_point(AreaOfInterest{}, rng), t % 2, t)));
            trace.betas.push_back(Eigen::VectorXd::Constant(1, unit(rng)));
        }
        const std::vector<double> lams = window_min_eigenvalue(params, trace, 1);
        REQUIRE(lams.size() == 12);
        for (int t = 0; t < 12; ++t) {
            const double expected =
                stage_hessian_scale(params, trace.betas[t], trace.history[t]) *
                trace.history[t].kernel[0] * trace.history[t].kernel[0];
            CHECK(lams[t] == doctest::Approx(expected).epsilon(1e-12));
        }
    }
    SUBCASE("a trace shorter than the window yields nothing") {
        const FieldModel basis = two_kernel_model();
        RunTrace trace;
        trace.history.push_back(make_stage_term(
            basis, oracles::make_measurement(Eigen::Vector2d(25.0, 50.0), 1, 0)));
        trace.betas.push_back((Eigen::VectorXd(2) << 0.5, 0.5).finished());
        CHECK(window_min_eigenvalue(params, trace, 5).empty());
        CHECK_THROWS_AS(window_min_eigenvalue(params, trace, 0), std::invalid_argument);
    }
    SUBCASE("active sensing beats a parked sensor on window richness") {
        const AreaOfInterest area;
        const FieldModel basis = make_grid_model(area, 4, 25.0);  // p = 16
        std::mt19937_64 rng(211);
        const GroundTruth gt = sample_ground_truth(area, rng);

        SensingConfig sensing;
        sensing.area = area;
        for (Eigen::Index i = 0; i < basis.basis_count(); ++i)
            sensing.candidates.push_back(basis.centers.col(i));

        const auto run_trace = [&](bool active) {
            Rng stream(31415);
            ApproxOnmState state = init_approx(Eigen::VectorXd::Constant(16, 0.5),
                                               ApproxOnmConfig{});
            VehicleState vehicle{{50.0, 50.0}, std::nullopt};
            RunTrace trace;
            for (int t = 0; t < 200; ++t) {
                const Measurement m = simulate_measurement(gt, vehicle.position, t, stream);
                trace.betas.push_back(state.beta_hat);
                trace.history.push_back(make_stage_term(basis, m));
                approx_step(state, basis, params, m);
                if (active) {
                    const Eigen::MatrixXd hessian =
                        Eigen::MatrixXd(state.inv_hessian.llt().solve(
                                            Eigen::MatrixXd::Identity(16, 16)))
                            .selfadjointView<Eigen::Lower>();
                    const TargetChoice target =
                        select_target(hessian, state.beta_hat, params, basis, sensing);
                    vehicle = [&] {
                        const MotionStep motion = next_position(vehicle, target.point, sensing);
                        return VehicleState{motion.position, motion.direction};
                    }();
                }
            }
            return trace;
        };

        const auto median_of = [](std::vector<double> xs) {
            std::sort(xs.begin(), xs.end());
            return xs[xs.size() / 2];
        };
        const double active_median =
            median_of(window_min_eigenvalue(params, run_trace(true), 64));
        const double parked_median =
            median_of(window_min_eigenvalue(params, run_trace(false), 64));
        CHECK(active_median > parked_median);
    }
}

#include "fieldest/onm_exact.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>

namespace fieldest {

namespace {

double symmetric_min_eig(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(0);
}

}  // namespace

DegenerateHessianError::DegenerateHessianError(int step, double min_eig)
    : NumericalError("degenerate Hessian at step " + std::to_string(step) +
                     " (min eigenvalue " + std::to_string(min_eig) + ")"),
      step_(step) {}

ExactOnmState init_exact(const Eigen::VectorXd& beta0) {
    if (beta0.size() < 1) throw std::invalid_argument("init_exact: empty initial estimate");
    ExactOnmState state;
    state.beta_hat = beta0;
    state.k = -1;
    return state;
}

ExactStepInfo exact_step(ExactOnmState& state, const FieldModel& basis,
                         const ExactOnmConfig& config, const CostParams& params,
                         const Measurement& m) {
    if (m.index != state.k + 1)
        throw std::invalid_argument("exact_step: measurement index out of sequence");

    state.history.push_back(make_stage_term(basis, m));

    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
    total_gradient_hessian(params, state.beta_hat, state.history, grad, hess);

    ExactStepInfo info;
    info.grad_norm = grad.norm();
    info.hessian_min_eig = symmetric_min_eig(hess);

    // Hybrid update. While the accumulated curvature is weak the Newton
    // direction amplifies the gradient through near-null directions, so the
    // step falls back to a damped gradient move; once the minimum eigenvalue
    // clears the switch threshold the plain Newton step takes over. The
    // gradient move backtracks on the accumulated cost because the raw
    // gradient norm grows with the history length.
    info.damped = info.hessian_min_eig < config.switch_threshold;
    if (info.damped) {
        const double cost0 = total_cost(params, state.beta_hat, state.history);
        const double g2 = grad.squaredNorm();
        double step = config.damping_multiplier;
        for (int bt = 0; bt < 30; ++bt) {
            const Eigen::VectorXd candidate = state.beta_hat - step * grad;
            if (total_cost(params, candidate, state.history) <=
                cost0 - 1e-4 * step * g2) {
                state.beta_hat = candidate;
                break;
            }
            step *= 0.5;
        }
        state.k = m.index;
        return info;
    }

    // Adding r*I shifts every eigenvalue by exactly r.
    double min_eig = info.hessian_min_eig;
    if (min_eig < config.singular_threshold) {
        hess.diagonal().array() += config.regularization;
        min_eig += config.regularization;
        info.regularized = true;
    }
    if (min_eig <= 1e-12) throw DegenerateHessianError(m.index, min_eig);

    Eigen::LLT<Eigen::MatrixXd> llt(hess);
    if (llt.info() != Eigen::Success) {
        // One more shot of regularization before giving up.
        hess.diagonal().array() += config.regularization;
        min_eig += config.regularization;
        info.regularized = true;
        llt.compute(hess);
        if (llt.info() != Eigen::Success || min_eig <= 1e-12)
            throw DegenerateHessianError(m.index, min_eig);
    }

    state.beta_hat.noalias() -= llt.solve(grad);
    state.k = m.index;
    return info;
}

BatchResult batch_optimum(const CostParams& params, std::span<const StageTerm> history,
                          const Eigen::VectorXd& beta_init, const BatchConfig& config) {
    if (history.empty()) throw std::invalid_argument("batch_optimum: empty history");

    BatchResult result;
    result.beta = beta_init;

    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
    for (result.iterations = 0; result.iterations < config.max_iterations;
         ++result.iterations) {
        total_gradient_hessian(params, result.beta, history, grad, hess);
        result.grad_inf_norm = grad.lpNorm<Eigen::Infinity>();
        if (result.grad_inf_norm <= config.grad_tolerance) {
            result.converged = true;
            return result;
        }

        hess.diagonal().array() += config.hessian_floor;
        Eigen::LLT<Eigen::MatrixXd> llt(hess);
        if (llt.info() != Eigen::Success) break;
        Eigen::VectorXd direction = -llt.solve(grad);
        // Along near-flat directions the floored solve can propose strides
        // far beyond where the model is trusted; cap the length so the
        // backtracking line search keeps making progress.
        const double cap = 10.0 * (1.0 + result.beta.norm());
        if (direction.norm() > cap) direction *= cap / direction.norm();
        const double slope = grad.dot(direction);  // < 0 for a PD solve

        const double cost0 = total_cost(params, result.beta, history);
        double step = 1.0;
        bool accepted = false;
        for (int bt = 0; bt < config.max_backtracks; ++bt) {
            const Eigen::VectorXd candidate = result.beta + step * direction;
            if (total_cost(params, candidate, history) <=
                cost0 + config.armijo_c * step * slope) {
                result.beta = candidate;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // no acceptable step left
    }

    result.grad_inf_norm =
        total_gradient(params, result.beta, history).lpNorm<Eigen::Infinity>();
    result.converged = result.grad_inf_norm <= config.grad_tolerance;
    return result;
}

std::vector<double> empirical_regret(const CostParams& params, const RunTrace& trace,
                                     const BatchConfig& config) {
    const std::size_t n = trace.history.size();
    if (trace.betas.size() < n)
        throw std::invalid_argument("empirical_regret: trace is missing estimates");

    std::vector<double> partial_sums(n);
    double sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const std::span<const StageTerm> prefix(trace.history.data(), k + 1);
        const Eigen::VectorXd& beta_k = trace.betas[k];
        // Warm-starting at the online estimate makes each gap nonnegative:
        // the line search never increases the cost.
        const BatchResult opt = batch_optimum(params, prefix, beta_k, config);
        if (!opt.converged)
            throw NumericalError("empirical_regret: batch solve did not converge at step " +
                                 std::to_string(k) + " (grad inf-norm " +
                                 std::to_string(opt.grad_inf_norm) + ")");
        sum += total_cost(params, beta_k, prefix) - total_cost(params, opt.beta, prefix);
        partial_sums[k] = sum;
    }
    return partial_sums;
}

std::vector<double> window_min_eigenvalue(const CostParams& params, const RunTrace& trace,
                                          int window) {
    if (window < 1) throw std::invalid_argument("window_min_eigenvalue: window must be >= 1");
    const std::size_t n = trace.history.size();
    if (trace.betas.size() < n)
        throw std::invalid_argument("window_min_eigenvalue: trace is missing estimates");
    if (n < static_cast<std::size_t>(window)) return {};

    // Each stage Hessian is frozen at the estimate in force when its
    // measurement arrived.
    std::vector<double> scales(n);
    for (std::size_t t = 0; t < n; ++t)
        scales[t] = stage_hessian_scale(params, trace.betas[t], trace.history[t]);

    const Eigen::Index p = trace.history.front().kernel.size();
    std::vector<double> out;
    out.reserve(n - window + 1);
    for (std::size_t start = 0; start + window <= n; ++start) {
        Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(p, p);
        for (std::size_t t = start; t < start + window; ++t)
            sum.selfadjointView<Eigen::Lower>().rankUpdate(trace.history[t].kernel,
                                                           scales[t]);
        out.push_back(symmetric_min_eig(Eigen::MatrixXd(sum.selfadjointView<Eigen::Lower>())));
    }
    return out;
}

}  // namespace fieldest

#include "fieldest/onm_approx.hpp"

#include <stdexcept>

namespace fieldest {

ApproxOnmState init_approx(const Eigen::VectorXd& beta0, const ApproxOnmConfig& config) {
    if (!(config.epsilon > 0.0))
        throw std::invalid_argument("init_approx: epsilon must be positive");
    if (beta0.size() < 1) throw std::invalid_argument("init_approx: empty initial estimate");

    ApproxOnmState state;
    state.beta_hat = beta0;
    state.inv_hessian =
        config.epsilon * Eigen::MatrixXd::Identity(beta0.size(), beta0.size());
    state.k = -1;
    return state;
}

ApproxStepInfo approx_step(ApproxOnmState& state, const FieldModel& basis,
                           const CostParams& params, const Measurement& m) {
    if (m.index != state.k + 1)
        throw std::invalid_argument("approx_step: measurement index out of sequence");

    const StageTerm term = make_stage_term(basis, m);
    const Eigen::VectorXd& kernel = term.kernel;

    // Fold the rank-one curvature of the new stage into P = H^{-1}:
    // P <- P - h (P K)(P K)^T / (1 + h K^T P K).
    const double h = stage_hessian_scale(params, state.beta_hat, term);
    const Eigen::VectorXd pk = state.inv_hessian * kernel;
    const double denom = 1.0 + h * kernel.dot(pk);
    if (!(denom > 0.0))
        throw std::logic_error(
            "approx_step: rank-one denominator not positive; inverse Hessian corrupted");
    state.inv_hessian.noalias() -= (h / denom) * (pk * pk.transpose());
    state.inv_hessian = (0.5 * (state.inv_hessian + state.inv_hessian.transpose())).eval();

    const Eigen::VectorXd grad = stage_gradient(params, state.beta_hat, term);
    state.beta_hat.noalias() -= state.inv_hessian * grad;
    state.k = m.index;
    return {grad.norm()};
}

const Eigen::MatrixXd& inv_hessian_of(const ApproxOnmState& state) {
    return state.inv_hessian;
}

}  // namespace fieldest

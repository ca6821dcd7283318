#pragma once

#include "fieldest/cost.hpp"

namespace fieldest {

struct ApproxOnmConfig {
    // Inverse-Hessian initialization scale: P_0 = epsilon * I. This is the
    // inverse convention; the accumulated Hessian starts at (1/epsilon) * I.
    double epsilon = 0.1;
};

struct ApproxOnmState {
    Eigen::VectorXd beta_hat;
    Eigen::MatrixXd inv_hessian;  // P_k, symmetric positive definite
    int k = -1;                   // index of the last ingested measurement
};

struct ApproxStepInfo {
    double grad_norm = 0.0;
};

ApproxOnmState init_approx(const Eigen::VectorXd& beta0, const ApproxOnmConfig& config);

/// Constant-cost update: fold the new measurement's rank-one curvature into
/// P via the Sherman-Morrison identity (evaluated at the current estimate),
/// then take the Newton step with the latest stage gradient only.
ApproxStepInfo approx_step(ApproxOnmState& state, const FieldModel& basis,
                           const CostParams& params, const Measurement& m);

const Eigen::MatrixXd& inv_hessian_of(const ApproxOnmState& state);

}  // namespace fieldest

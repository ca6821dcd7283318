#pragma once

#include <span>
#include <vector>

#include "fieldest/field.hpp"

namespace fieldest {

struct CostParams {
    double eta = 5.0;  // logistic sharpness
    double tau = 1.0;  // sensor threshold, shared with GroundTruth by value
};

/// One measurement plus its cached kernel vector. The position never
/// changes, so K(x_t) is computed once and reused on every history pass.
struct StageTerm {
    Measurement measurement;
    Eigen::VectorXd kernel;
};

StageTerm make_stage_term(const FieldModel& model, const Measurement& m);

// Overflow-safe scalar pieces of the logistic loss.
double softplus(double a);            // log(1 + exp(a))
double logistic(double a);            // 1 / (1 + exp(-a))
double logistic_curvature(double a);  // exp(a) / (1 + exp(a))^2

/// log(1 + exp(-eta * z~ * (beta^T K - tau)))
double stage_cost(const CostParams& params, const Eigen::VectorXd& beta,
                  const StageTerm& term);

Eigen::VectorXd stage_gradient(const CostParams& params, const Eigen::VectorXd& beta,
                               const StageTerm& term);

/// Scalar h with stage Hessian h * K K^T; always >= 0.
double stage_hessian_scale(const CostParams& params, const Eigen::VectorXd& beta,
                           const StageTerm& term);

Eigen::MatrixXd stage_hessian(const CostParams& params, const Eigen::VectorXd& beta,
                              const StageTerm& term);

// Sums over a measurement history; empty history gives zeros.
double total_cost(const CostParams& params, const Eigen::VectorXd& beta,
                  std::span<const StageTerm> history);
Eigen::VectorXd total_gradient(const CostParams& params, const Eigen::VectorXd& beta,
                               std::span<const StageTerm> history);
Eigen::MatrixXd total_hessian(const CostParams& params, const Eigen::VectorXd& beta,
                              std::span<const StageTerm> history);

/// Gradient and Hessian in one history pass (the margin is computed once per
/// term). Matches the separate sums term for term.
void total_gradient_hessian(const CostParams& params, const Eigen::VectorXd& beta,
                            std::span<const StageTerm> history,
                            Eigen::VectorXd& grad, Eigen::MatrixXd& hess);

}  // namespace fieldest

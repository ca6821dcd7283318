#pragma once

#include <optional>
#include <vector>

#include "fieldest/cost.hpp"

namespace fieldest {

struct SensingConfig {
    std::vector<Eigen::Vector2d> candidates;  // scored target positions
    double step = 5.0;                        // travel distance per measurement
    double alpha = 0.4;                       // direction smoothing weight, in [0,1]
    AreaOfInterest area;                      // positions are clamped to this box
};

struct VehicleState {
    Eigen::Vector2d position = Eigen::Vector2d::Zero();
    std::optional<Eigen::Vector2d> prev_direction;  // unit vector when present
};

/// Smallest eigenvalue of a symmetric matrix. Rejects inputs whose
/// asymmetry exceeds 1e-9 relative to the largest entry.
double min_eigenvalue(const Eigen::MatrixXd& m);

/// Current Hessian plus the curvature a measurement at `candidate` would
/// contribute. The contribution is the same for either binary outcome, so
/// no outcome probabilities enter.
Eigen::MatrixXd expected_hessian(const Eigen::MatrixXd& hessian,
                                 const Eigen::VectorXd& beta_hat,
                                 const CostParams& params, const FieldModel& basis,
                                 const Eigen::Vector2d& candidate);

struct TargetChoice {
    Eigen::Vector2d point = Eigen::Vector2d::Zero();
    int index = 0;
    double lambda_min = 0.0;
};

/// Candidate maximizing the minimum eigenvalue of the expected Hessian.
/// Candidates within 1e-12 of the maximum tie-break to the lowest index.
TargetChoice select_target(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& beta_hat,
                           const CostParams& params, const FieldModel& basis,
                           const SensingConfig& config);

struct MotionStep {
    Eigen::Vector2d position = Eigen::Vector2d::Zero();
    Eigen::Vector2d direction = Eigen::Vector2d::Zero();  // smoothed unit heading
};

/// One travel step of length `config.step` toward the target, with the
/// heading blended against the previous one and the result clamped to the
/// area. A target equal to the current position keeps the previous heading
/// and is an error when there is none.
MotionStep next_position(const VehicleState& vehicle, const Eigen::Vector2d& target,
                         const SensingConfig& config);

}  // namespace fieldest

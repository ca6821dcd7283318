#include "fieldest/sensing.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace fieldest {

double min_eigenvalue(const Eigen::MatrixXd& m) {
    if (m.rows() != m.cols() || m.rows() < 1)
        throw std::invalid_argument("min_eigenvalue: matrix must be square and nonempty");
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    const double asymmetry = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asymmetry > 1e-9 * scale)
        throw std::invalid_argument("min_eigenvalue: matrix is not symmetric");

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m, Eigen::EigenvaluesOnly);
    return solver.eigenvalues()(0);
}

Eigen::MatrixXd expected_hessian(const Eigen::MatrixXd& hessian,
                                 const Eigen::VectorXd& beta_hat,
                                 const CostParams& params, const FieldModel& basis,
                                 const Eigen::Vector2d& candidate) {
    if (hessian.rows() != beta_hat.size() || hessian.cols() != beta_hat.size())
        throw std::invalid_argument("expected_hessian: dimensions disagree");

    const Eigen::VectorXd kernel = kernel_vector(basis, candidate);
    // Curvature at the candidate; identical for either measurement outcome,
    // so the outcome probabilities drop out.
    const double a = params.eta * (beta_hat.dot(kernel) - params.tau);
    const double scale = params.eta * params.eta * logistic_curvature(a);

    // Lower-triangle update keeps the result symmetric to the bit.
    Eigen::MatrixXd out = hessian;
    out.selfadjointView<Eigen::Lower>().rankUpdate(kernel, scale);
    return out.selfadjointView<Eigen::Lower>();
}

TargetChoice select_target(const Eigen::MatrixXd& hessian, const Eigen::VectorXd& beta_hat,
                           const CostParams& params, const FieldModel& basis,
                           const SensingConfig& config) {
    if (config.candidates.empty())
        throw std::invalid_argument("select_target: no candidates");

    // Strict comparison: equal scores keep the earlier candidate.
    std::size_t best = 0;
    double best_lambda = min_eigenvalue(
        expected_hessian(hessian, beta_hat, params, basis, config.candidates[0]));
    for (std::size_t i = 1; i < config.candidates.size(); ++i) {
        const double lambda = min_eigenvalue(
            expected_hessian(hessian, beta_hat, params, basis, config.candidates[i]));
        if (lambda > best_lambda) {
            best = i;
            best_lambda = lambda;
        }
    }
    return {config.candidates[best], static_cast<int>(best), best_lambda};
}

MotionStep next_position(const VehicleState& vehicle, const Eigen::Vector2d& target,
                         const SensingConfig& config) {
    if (!(config.step > 0.0))
        throw std::invalid_argument("next_position: step must be positive");
    if (config.alpha < 0.0 || config.alpha > 1.0)
        throw std::invalid_argument("next_position: alpha must be in [0,1]");

    const Eigen::Vector2d delta = target - vehicle.position;
    const double distance = delta.norm();

    Eigen::Vector2d direction;
    if (distance == 0.0) {
        if (!vehicle.prev_direction)
            throw std::invalid_argument(
                "next_position: target equals the current position and no previous "
                "direction is available");
        direction = *vehicle.prev_direction;
    } else {
        const Eigen::Vector2d toward = delta / distance;
        if (vehicle.prev_direction) {
            const Eigen::Vector2d blend =
                config.alpha * toward + (1.0 - config.alpha) * (*vehicle.prev_direction);
            const double norm = blend.norm();
            // Exactly opposed headings can cancel; fall back to the new one.
            direction = norm > 0.0 ? Eigen::Vector2d(blend / norm) : toward;
        } else {
            direction = toward;
        }
    }

    return {config.area.clamp(vehicle.position + config.step * direction), direction};
}

}  // namespace fieldest

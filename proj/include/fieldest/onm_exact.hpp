#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "fieldest/cost.hpp"

namespace fieldest {

class NumericalError : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

class DegenerateHessianError : public NumericalError {
   public:
    DegenerateHessianError(int step, double min_eig);
    int step() const { return step_; }

   private:
    int step_;
};

struct ExactOnmConfig {
    double damping_multiplier = 0.1;
    double regularization = 0.1;       // added as a multiple of the identity
    double switch_threshold = 1.0;     // min eigenvalue above which the full step is taken
    double singular_threshold = 1e-6;  // min eigenvalue below which regularization is added
};

struct ExactOnmState {
    Eigen::VectorXd beta_hat;
    std::vector<StageTerm> history;
    int k = -1;
};

struct ExactStepInfo {
    double grad_norm = 0.0;
    double hessian_min_eig = 0.0;  // before regularization
    bool regularized = false;
    bool damped = false;
};

ExactOnmState init_exact(const Eigen::VectorXd& beta0);

/// Full-history Newton step at the current estimate. When the accumulated
/// Hessian is close to singular it is regularized, and the step is damped
/// until the minimum eigenvalue clears the switch threshold.
ExactStepInfo exact_step(ExactOnmState& state, const FieldModel& basis,
                         const ExactOnmConfig& config, const CostParams& params,
                         const Measurement& m);

struct BatchConfig {
    double grad_tolerance = 1e-8;  // infinity norm
    int max_iterations = 100;
    double armijo_c = 1e-4;
    int max_backtracks = 40;
    double hessian_floor = 1e-8;  // identity multiple added before each solve
};

struct BatchResult {
    Eigen::VectorXd beta;
    bool converged = false;
    double grad_inf_norm = 0.0;
    int iterations = 0;
};

/// Damped Newton with backtracking line search on the accumulated cost.
/// Non-convergence is reported through the result, not thrown.
BatchResult batch_optimum(const CostParams& params, std::span<const StageTerm> history,
                          const Eigen::VectorXd& beta_init, const BatchConfig& config = {});

/// A completed run: measurements 0..N-1 and the estimates around them.
/// betas[k] is the estimate in force when measurement k arrived; the final
/// estimate sits at betas[N].
struct RunTrace {
    std::vector<StageTerm> history;
    std::vector<Eigen::VectorXd> betas;
};

/// Partial sums of the gap between the online estimate's accumulated cost
/// and the per-step batch optimum's. One batch solve per step; opt-in.
std::vector<double> empirical_regret(const CostParams& params, const RunTrace& trace,
                                     const BatchConfig& config = {});

/// Minimum eigenvalue of each length-`window` sliding sum of stage Hessians,
/// each term frozen at the estimate in force when its measurement arrived.
/// Empty when the trace is shorter than the window.
std::vector<double> window_min_eigenvalue(const CostParams& params, const RunTrace& trace,
                                          int window);

}  // namespace fieldest

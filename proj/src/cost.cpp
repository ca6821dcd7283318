#include "fieldest/cost.hpp"

#include <cmath>
#include <stdexcept>

namespace fieldest {

namespace {

void check_dims(const Eigen::VectorXd& beta, const StageTerm& term) {
    if (beta.size() != term.kernel.size())
        throw std::invalid_argument("cost: estimate and kernel dimensions disagree");
}

// eta * z~ * (beta^T K - tau), the argument every logistic piece sees.
double signed_activation(const CostParams& params, const Eigen::VectorXd& beta,
                         const StageTerm& term) {
    const double margin = beta.dot(term.kernel) - params.tau;
    return params.eta * term.measurement.z_signed * margin;
}

int checked_z_signed_squared(const Measurement& m) {
    const int sq = m.z_signed * m.z_signed;
    if (sq != 1) throw std::logic_error("cost: z_signed must be -1 or +1");
    return sq;
}

}  // namespace

StageTerm make_stage_term(const FieldModel& model, const Measurement& m) {
    return {m, kernel_vector(model, m.position)};
}

double softplus(double a) {
    return std::max(a, 0.0) + std::log1p(std::exp(-std::abs(a)));
}

double logistic(double a) {
    if (a >= 0.0) return 1.0 / (1.0 + std::exp(-a));
    const double e = std::exp(a);
    return e / (1.0 + e);
}

double logistic_curvature(double a) {
    // exp(a)/(1+exp(a))^2 is symmetric in a; the |a| form never overflows.
    const double e = std::exp(-std::abs(a));
    const double d = 1.0 + e;
    return e / (d * d);
}

double stage_cost(const CostParams& params, const Eigen::VectorXd& beta,
                  const StageTerm& term) {
    check_dims(beta, term);
    return softplus(-signed_activation(params, beta, term));
}

Eigen::VectorXd stage_gradient(const CostParams& params, const Eigen::VectorXd& beta,
                               const StageTerm& term) {
    check_dims(beta, term);
    const double a = signed_activation(params, beta, term);
    const double factor = -params.eta * term.measurement.z_signed * logistic(-a);
    return factor * term.kernel;
}

double stage_hessian_scale(const CostParams& params, const Eigen::VectorXd& beta,
                           const StageTerm& term) {
    check_dims(beta, term);
    const double a = signed_activation(params, beta, term);
    const int z2 = checked_z_signed_squared(term.measurement);
    return params.eta * params.eta * z2 * logistic_curvature(a);
}

Eigen::MatrixXd stage_hessian(const CostParams& params, const Eigen::VectorXd& beta,
                              const StageTerm& term) {
    const double h = stage_hessian_scale(params, beta, term);
    // Build the lower triangle and mirror it; the result is symmetric to the
    // bit, which a full outer-product expression does not guarantee.
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(beta.size(), beta.size());
    hess.selfadjointView<Eigen::Lower>().rankUpdate(term.kernel, h);
    return hess.selfadjointView<Eigen::Lower>();
}

double total_cost(const CostParams& params, const Eigen::VectorXd& beta,
                  std::span<const StageTerm> history) {
    double sum = 0.0;
    for (const StageTerm& term : history) sum += stage_cost(params, beta, term);
    return sum;
}

Eigen::VectorXd total_gradient(const CostParams& params, const Eigen::VectorXd& beta,
                               std::span<const StageTerm> history) {
    Eigen::VectorXd grad = Eigen::VectorXd::Zero(beta.size());
    for (const StageTerm& term : history) {
        const double a = signed_activation(params, beta, term);
        const double factor = -params.eta * term.measurement.z_signed * logistic(-a);
        grad.noalias() += factor * term.kernel;
    }
    return grad;
}

Eigen::MatrixXd total_hessian(const CostParams& params, const Eigen::VectorXd& beta,
                              std::span<const StageTerm> history) {
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(beta.size(), beta.size());
    for (const StageTerm& term : history) {
        const double h = stage_hessian_scale(params, beta, term);
        hess.selfadjointView<Eigen::Lower>().rankUpdate(term.kernel, h);
    }
    return hess.selfadjointView<Eigen::Lower>();
}

void total_gradient_hessian(const CostParams& params, const Eigen::VectorXd& beta,
                            std::span<const StageTerm> history,
                            Eigen::VectorXd& grad, Eigen::MatrixXd& hess) {
    const Eigen::Index p = beta.size();
    grad = Eigen::VectorXd::Zero(p);
    hess = Eigen::MatrixXd::Zero(p, p);
    for (const StageTerm& term : history) {
        check_dims(beta, term);
        const double a = signed_activation(params, beta, term);
        const int z2 = checked_z_signed_squared(term.measurement);
        const double factor = -params.eta * term.measurement.z_signed * logistic(-a);
        const double h = params.eta * params.eta * z2 * logistic_curvature(a);
        grad.noalias() += factor * term.kernel;
        hess.selfadjointView<Eigen::Lower>().rankUpdate(term.kernel, h);
    }
    hess = hess.selfadjointView<Eigen::Lower>();
}

}  // namespace fieldest

#include "fieldest/field.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace fieldest {

bool AreaOfInterest::contains(const Eigen::Vector2d& x) const {
    return x[0] >= x_min && x[0] <= x_max && x[1] >= y_min && x[1] <= y_max;
}

Eigen::Vector2d AreaOfInterest::clamp(const Eigen::Vector2d& x) const {
    return {std::clamp(x[0], x_min, x_max), std::clamp(x[1], y_min, y_max)};
}

bool FieldModel::valid() const {
    const Eigen::Index p = coefficients.size();
    return p >= 1 && centers.cols() == p && length_scales.size() == p &&
           (length_scales.array() > 0.0).all();
}

Eigen::VectorXd kernel_vector(const FieldModel& model, const Eigen::Vector2d& x) {
    const Eigen::Index p = model.centers.cols();
    Eigen::VectorXd k(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        const double d2 = (model.centers.col(i) - x).squaredNorm();
        const double s = model.length_scales[i];
        k[i] = std::exp(-d2 / (s * s));
    }
    return k;
}

double field_value(const FieldModel& model, const Eigen::Vector2d& x) {
    return model.coefficients.dot(kernel_vector(model, x));
}

FieldModel make_grid_model(const AreaOfInterest& area, int per_axis, double sigma) {
    if (!area.valid()) throw std::invalid_argument("make_grid_model: invalid area");
    if (per_axis < 1) throw std::invalid_argument("make_grid_model: per_axis must be >= 1");
    if (!(sigma > 0.0)) throw std::invalid_argument("make_grid_model: sigma must be positive");

    const Eigen::Index p = static_cast<Eigen::Index>(per_axis) * per_axis;
    FieldModel model;
    model.centers.resize(2, p);
    model.length_scales = Eigen::VectorXd::Constant(p, sigma);
    model.coefficients = Eigen::VectorXd::Zero(p);

    const double dx = area.width() / per_axis;
    const double dy = area.height() / per_axis;
    for (int iy = 0; iy < per_axis; ++iy) {
        for (int ix = 0; ix < per_axis; ++ix) {
            model.centers.col(static_cast<Eigen::Index>(iy) * per_axis + ix) =
                Eigen::Vector2d(area.x_min + (ix + 0.5) * dx, area.y_min + (iy + 0.5) * dy);
        }
    }
    return model;
}

GroundTruth sample_ground_truth(const AreaOfInterest& area, Rng& rng) {
    if (!area.valid()) throw std::invalid_argument("sample_ground_truth: invalid area");

    constexpr int kTrueKernels = 4;
    std::uniform_real_distribution<double> coeff(0.7, 1.4);
    std::uniform_real_distribution<double> cx(area.x_min + 0.05 * area.width(),
                                              area.x_max - 0.05 * area.width());
    std::uniform_real_distribution<double> cy(area.y_min + 0.05 * area.height(),
                                              area.y_max - 0.05 * area.height());
    std::uniform_real_distribution<double> scale(25.0, 45.0);

    GroundTruth gt;
    gt.model.centers.resize(2, kTrueKernels);
    gt.model.length_scales.resize(kTrueKernels);
    gt.model.coefficients.resize(kTrueKernels);

    for (int i = 0; i < kTrueKernels; ++i) gt.model.coefficients[i] = coeff(rng);
    for (int i = 0; i < kTrueKernels; ++i) {
        gt.model.centers(0, i) = cx(rng);
        gt.model.centers(1, i) = cy(rng);
    }
    for (int i = 0; i < kTrueKernels; ++i) gt.model.length_scales[i] = scale(rng);

    gt.noise_variance = 0.1;
    gt.threshold = 1.0;
    return gt;
}

Measurement simulate_measurement(const GroundTruth& gt, const Eigen::Vector2d& x,
                                 int index, Rng& rng) {
    std::normal_distribution<double> noise(0.0, std::sqrt(gt.noise_variance));
    const double y = field_value(gt.model, x) + noise(rng);

    Measurement m;
    m.position = x;
    m.z = y > gt.threshold ? 1 : 0;
    m.z_signed = 2 * m.z - 1;
    m.index = index;
    return m;
}

double standard_normal_cdf(double u) {
    return 0.5 * std::erfc(-u / std::numbers::sqrt2);
}

double detection_probability(const FieldModel& model, double sigma_v, double tau,
                             const Eigen::Vector2d& x) {
    if (!(sigma_v > 0.0))
        throw std::invalid_argument("detection_probability: sigma_v must be positive");
    // 1 - Phi((tau - phi)/sigma) == Phi((phi - tau)/sigma); the erfc form
    // keeps precision at both tails.
    return standard_normal_cdf((field_value(model, x) - tau) / sigma_v);
}

}  // namespace fieldest

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <random>

namespace fieldest {

using Rng = std::mt19937_64;

struct AreaOfInterest {
    double x_min = 0.0;
    double x_max = 100.0;
    double y_min = 0.0;
    double y_max = 100.0;

    bool valid() const { return x_min < x_max && y_min < y_max; }
    double width() const { return x_max - x_min; }
    double height() const { return y_max - y_min; }
    bool contains(const Eigen::Vector2d& x) const;
    Eigen::Vector2d clamp(const Eigen::Vector2d& x) const;
};

/// Sum of Gaussian kernels: phi(x) = sum_i coefficients[i] *
/// exp(-|centers.col(i) - x|^2 / length_scales[i]^2).
struct FieldModel {
    Eigen::Matrix2Xd centers;      // one column per kernel
    Eigen::VectorXd length_scales;
    Eigen::VectorXd coefficients;

    Eigen::Index basis_count() const { return coefficients.size(); }
    bool valid() const;
};

struct GroundTruth {
    FieldModel model;
    double noise_variance = 0.1;  // sensor noise sigma_v^2
    double threshold = 1.0;       // binary sensor threshold tau
};

struct Measurement {
    Eigen::Vector2d position = Eigen::Vector2d::Zero();
    int z = 0;           // thresholded reading, {0,1}
    int z_signed = -1;   // 2z - 1
    int index = 0;
};

/// Kernel responses K(x); every entry in (0, 1].
Eigen::VectorXd kernel_vector(const FieldModel& model, const Eigen::Vector2d& x);

double field_value(const FieldModel& model, const Eigen::Vector2d& x);

/// per_axis^2 kernels at the centers of a uniform cell grid over the area,
/// all with the given length scale and zero coefficients. Row-major order,
/// x fastest.
FieldModel make_grid_model(const AreaOfInterest& area, int per_axis, double sigma);

/// Random 4-kernel field: coefficients U(0.7, 1.4), centers uniform with a
/// 5%-of-span margin from the boundary, length scales U(25, 45). Draw order
/// is fixed (coefficients, then per-kernel center x then y, then scales) so
/// a seed always regenerates the same field.
GroundTruth sample_ground_truth(const AreaOfInterest& area, Rng& rng);

/// One noisy thresholded reading: z = 1 iff phi(x) + N(0, sigma_v^2) > tau.
Measurement simulate_measurement(const GroundTruth& gt, const Eigen::Vector2d& x,
                                 int index, Rng& rng);

/// P(z = 1) = 1 - Phi((tau - phi(x)) / sigma_v).
double detection_probability(const FieldModel& model, double sigma_v, double tau,
                             const Eigen::Vector2d& x);

double standard_normal_cdf(double u);

}  // namespace fieldest

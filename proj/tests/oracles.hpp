// Test-only oracles, independent of the library's solver paths.
#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

#include "fieldest/cost.hpp"
#include "fieldest/field.hpp"

namespace oracles {

// Cyclic Jacobi rotations on a dense symmetric matrix; returns the
// eigenvalues sorted ascending. Deliberately not Eigen's solver.
inline std::vector<double> jacobi_eigenvalues(Eigen::MatrixXd a) {
    const int n = static_cast<int>(a.rows());
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
        if (std::sqrt(off) < 1e-14 * scale) break;

        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                if (std::abs(a(p, q)) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (int i = 0; i < n; ++i) {
                    const double aip = a(i, p), aiq = a(i, q);
                    a(i, p) = c * aip - s * aiq;
                    a(i, q) = s * aip + c * aiq;
                }
                for (int i = 0; i < n; ++i) {
                    const double api = a(p, i), aqi = a(q, i);
                    a(p, i) = c * api - s * aqi;
                    a(q, i) = s * api + c * aqi;
                }
            }
        }
    }
    std::vector<double> eigs(n);
    for (int i = 0; i < n; ++i) eigs[i] = a(i, i);
    std::sort(eigs.begin(), eigs.end());
    return eigs;
}

inline double jacobi_min_eigenvalue(const Eigen::MatrixXd& a) {
    return jacobi_eigenvalues(a).front();
}

// Central finite difference of a scalar function of a vector.
inline Eigen::VectorXd central_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                        const Eigen::VectorXd& x, double h) {
    Eigen::VectorXd g(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Eigen::VectorXd hi = x, lo = x;
        hi[i] += h;
        lo[i] -= h;
        g[i] = (f(hi) - f(lo)) / (2.0 * h);
    }
    return g;
}

// Central finite difference of a vector function, one column per coordinate.
inline Eigen::MatrixXd central_jacobian(
    const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f,
    const Eigen::VectorXd& x, double h) {
    Eigen::MatrixXd jac(x.size(), x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Eigen::VectorXd hi = x, lo = x;
        hi[i] += h;
        lo[i] -= h;
        jac.col(i) = (f(hi) - f(lo)) / (2.0 * h);
    }
    return jac;
}

// Convenience builders shared by several suites.

inline fieldest::FieldModel default_grid_model() {
    return fieldest::make_grid_model(fieldest::AreaOfInterest{}, 4, 25.0);
}

inline fieldest::Measurement make_measurement(const Eigen::Vector2d& x, int z, int index) {
    fieldest::Measurement m;
    m.position = x;
    m.z = z;
    m.z_signed = 2 * z - 1;
    m.index = index;
    return m;
}

inline Eigen::Vector2d random_point(const fieldest::AreaOfInterest& area, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ux(area.x_min, area.x_max);
    std::uniform_real_distribution<double> uy(area.y_min, area.y_max);
    const double x = ux(rng);
    const double y = uy(rng);
    return {x, y};
}

}  // namespace oracles

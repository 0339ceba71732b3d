#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "fodest/common.hpp"
#include "fodest/gradients.hpp"

namespace fod {

using DiffusionTensor = Eigen::Matrix3d;

/// Log-linearized least-squares fit of the single tensor model. Signals are
/// floored at 1e-6*s0 before the log; no SPD projection is applied, so noisy
/// voxels may yield negative eigenvalues.
inline DiffusionTensor single_tensor_fit(const Eigen::VectorXd& signals, double s0,
                                         const GradientTable& gradients) {
    const auto idx = gradients.diffusion_indices();
    const int n = static_cast<int>(idx.size());
    require(n >= 7, "single_tensor_fit: need at least 7 diffusion-weighted measurements");
    require(signals.size() == gradients.size(), "single_tensor_fit: signal/gradient length mismatch");
    require(s0 > 0.0, "single_tensor_fit: s0 must be positive");

    Eigen::MatrixXd design(n, 6);
    Eigen::VectorXd rhs(n);
    const double floor = 1e-6 * s0;
    for (int k = 0; k < n; ++k) {
        const int i = idx[k];
        const Direction& g = gradients.directions[i];
        design(k, 0) = g.x * g.x;
        design(k, 1) = g.y * g.y;
        design(k, 2) = g.z * g.z;
        design(k, 3) = 2.0 * g.x * g.y;
        design(k, 4) = 2.0 * g.x * g.z;
        design(k, 5) = 2.0 * g.y * g.z;
        const double s = std::max(signals[i], floor);
        rhs[k] = -std::log(s / s0) / gradients.bvals[i];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    require(qr.rank() == 6, "single_tensor_fit: rank-deficient gradient design");
    const Eigen::VectorXd p = qr.solve(rhs);

    DiffusionTensor d;
    d << p[0], p[3], p[4],
         p[3], p[1], p[5],
         p[4], p[5], p[2];
    return d;
}

inline Eigen::Vector3d tensor_eigenvalues_desc(const DiffusionTensor& t) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(t);
    Eigen::Vector3d ev = es.eigenvalues(); // ascending
    return {ev[2], ev[1], ev[0]};
}

/// Fractional anisotropy in [0, 1]; the all-zero tensor maps to 0.
inline double fractional_anisotropy(const DiffusionTensor& t) {
    const Eigen::Vector3d ev = tensor_eigenvalues_desc(t);
    const double l1 = ev[0], l2 = ev[1], l3 = ev[2];
    const double den = std::sqrt(l1 * l1 + l2 * l2 + l3 * l3);
    if (den == 0.0) return 0.0;
    const double num =
        std::sqrt((l1 - l2) * (l1 - l2) + (l2 - l3) * (l2 - l3) + (l3 - l1) * (l3 - l1));
    return std::sqrt(0.5) * num / den;
}

} // namespace fod

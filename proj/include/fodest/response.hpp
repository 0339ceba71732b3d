#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <vector>

#include "fodest/common.hpp"
#include "fodest/sh.hpp"
#include "fodest/tensor.hpp"

namespace fod {

namespace detail {

/// Gauss-Legendre nodes/weights on [-1, 1], Newton iteration on P_n.
struct GaussLegendre {
    std::vector<double> nodes, weights;

    explicit GaussLegendre(int n) : nodes(n), weights(n) {
        for (int i = 0; i < n; ++i) {
            double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int l = 2; l <= n; ++l) {
                    const double p2 = ((2.0 * l - 1.0) * x * p1 - (l - 1.0) * p0) / l;
                    p0 = p1;
                    p1 = p2;
                }
                pp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / pp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            nodes[i] = x;
            weights[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        }
    }
};

/// Legendre polynomials P_0..P_lmax at t.
inline void legendre_all(int l_max, double t, std::vector<double>& p) {
    p.resize(l_max + 1);
    p[0] = 1.0;
    if (l_max >= 1) p[1] = t;
    for (int l = 2; l <= l_max; ++l)
        p[l] = ((2.0 * l - 1.0) * t * p[l - 1] - (l - 1.0) * p[l - 2]) / l;
}

} // namespace detail

/// SH coefficients r_l = <R, Phi_l0> of the axially symmetric single-fiber
/// signal R(cos theta) = s0 exp(-b (lambda_major cos^2 + lambda_minor sin^2)),
/// by 1-D Gauss-Legendre quadrature in cos theta.
inline std::vector<double> response_sh_coefficients(double lambda_major, double lambda_minor,
                                                    double b, double s0, int l_max,
                                                    int quadrature_points = 4096) {
    require(l_max >= 0 && l_max % 2 == 0, "response_sh_coefficients: l_max must be even");
    require(quadrature_points >= l_max + 2, "response_sh_coefficients: too few quadrature points");
    const detail::GaussLegendre gl(quadrature_points);
    std::vector<double> r(l_max / 2 + 1, 0.0);
    std::vector<double> p;
    for (int k = 0; k < quadrature_points; ++k) {
        const double t = gl.nodes[k];
        const double response = s0 * std::exp(-b * (lambda_major * t * t + lambda_minor * (1.0 - t * t)));
        detail::legendre_all(l_max, t, p);
        for (int l = 0; l <= l_max; l += 2) {
            const double phi_l0 = std::sqrt((2.0 * l + 1.0) / kFourPi) * p[l];
            r[l / 2] += gl.weights[k] * response * phi_l0 * 2.0 * kPi;
        }
    }
    return r;
}

/// Axially symmetric convolution kernel: tensor eigenvalues, b-value, and the
/// derived SH coefficients r_l (index l/2).
struct ResponseKernel {
    double lambda_major = 1.7e-3;
    double lambda_minor = 3.0e-4;
    double b = 3000.0;
    double s0 = 1.0;
    std::vector<double> r;

    int l_max() const { return 2 * (static_cast<int>(r.size()) - 1); }

    double operator()(double cos_theta) const {
        const double c2 = cos_theta * cos_theta;
        return s0 * std::exp(-b * (lambda_major * c2 + lambda_minor * (1.0 - c2)));
    }

    double r_at(int l) const {
        require(l % 2 == 0 && l / 2 < static_cast<int>(r.size()), "ResponseKernel: level not present");
        return r[l / 2];
    }
};

inline ResponseKernel make_response_kernel(double lambda_major, double lambda_minor, double b,
                                           double s0, int l_max, int quadrature_points = 4096) {
    require(lambda_major >= lambda_minor && lambda_minor > 0.0,
            "make_response_kernel: need lambda_major >= lambda_minor > 0");
    require(b > 0.0 && s0 > 0.0, "make_response_kernel: b and s0 must be positive");
    ResponseKernel k;
    k.lambda_major = lambda_major;
    k.lambda_minor = lambda_minor;
    k.b = b;
    k.s0 = s0;
    k.r = response_sh_coefficients(lambda_major, lambda_minor, b, s0, l_max, quadrature_points);
    return k;
}

/// Diagonal convolution operator in SH coordinates: block l carries
/// r_l * sqrt(4 pi / (2l+1)) repeated 2l+1 times.
struct RMatrix {
    Eigen::VectorXd diag;
    int l_max = 0;
};

inline RMatrix build_r_matrix(const std::vector<double>& r, int l_max) {
    require(l_max >= 0 && l_max % 2 == 0, "build_r_matrix: l_max must be even");
    require(static_cast<int>(r.size()) >= l_max / 2 + 1, "build_r_matrix: missing response levels");
    RMatrix m;
    m.l_max = l_max;
    m.diag.resize(sh_coeff_count(l_max));
    for (int l = 0; l <= l_max; l += 2) {
        const double v = r[l / 2] * std::sqrt(kFourPi / (2.0 * l + 1.0));
        m.diag.segment(sh_level_offset(l), 2 * l + 1).setConstant(v);
    }
    return m;
}

inline RMatrix build_r_matrix(const ResponseKernel& kernel, int l_max) {
    return build_r_matrix(kernel.r, l_max);
}

struct ResponseVoxel {
    Eigen::VectorXd signals;
    double s0 = 1.0;
};

/// Single-fiber response estimation: per-voxel tensor fits, FA and
/// minor-eigenvalue-ratio filters, medians of the leading and averaged minor
/// eigenvalues across kept voxels. Signals are normalized per voxel by its
/// mean b0 intensity, so the kernel is built with s0 = 1.
inline ResponseKernel estimate_response(const std::vector<ResponseVoxel>& voxels,
                                        const GradientTable& gradients, int l_max,
                                        double fa_threshold = 0.8,
                                        double minor_ratio_threshold = 1.5,
                                        int quadrature_points = 4096) {
    std::vector<double> majors, minors;
    for (const auto& vox : voxels) {
        require(vox.s0 > 0.0, "estimate_response: voxel s0 must be positive");
        const Eigen::VectorXd normalized = vox.signals / vox.s0;
        const DiffusionTensor t = single_tensor_fit(normalized, 1.0, gradients);
        const Eigen::Vector3d ev = tensor_eigenvalues_desc(t);
        if (ev[2] <= 0.0) continue;
        const double ratio = ev[1] / ev[2];
        if (fractional_anisotropy(t) > fa_threshold && ratio < minor_ratio_threshold) {
            majors.push_back(ev[0]);
            minors.push_back((ev[1] + ev[2]) / 2.0);
        }
    }
    if (majors.empty())
        throw std::runtime_error(
            "estimate_response: no voxel passed the FA/eigenvalue-ratio filters; relax thresholds");

    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 ? v[n / 2] : (v[n / 2 - 1] + v[n / 2]) / 2.0;
    };
    return make_response_kernel(median(majors), median(minors), gradients.shell_b(), 1.0, l_max,
                                quadrature_points);
}

} // namespace fod

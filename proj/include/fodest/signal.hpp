#pragma once

#include <Eigen/Dense>
#include <vector>

#include "fodest/common.hpp"
#include "fodest/direction.hpp"
#include "fodest/gradients.hpp"
#include "fodest/response.hpp"

namespace fod {

/// Ground-truth fiber geometry: axial point masses with normalized weights.
struct FiberConfiguration {
    std::vector<Direction> directions;
    std::vector<double> weights;

    static FiberConfiguration equal_weight(std::vector<Direction> dirs) {
        FiberConfiguration c;
        c.weights.assign(dirs.size(), 1.0 / static_cast<double>(dirs.size()));
        c.directions = std::move(dirs);
        return c;
    }

    void validate() const {
        require(!directions.empty(), "FiberConfiguration: at least one fiber required");
        require(directions.size() == weights.size(), "FiberConfiguration: weight count mismatch");
        double sum = 0.0;
        for (double w : weights) {
            require(w >= 0.0, "FiberConfiguration: negative weight");
            sum += w;
        }
        require(std::abs(sum - 1.0) <= 1e-9, "FiberConfiguration: weights must sum to 1");
    }
};

/// Noiseless signal of a point-mass FOD: the spherical convolution collapses
/// to S(x) = sum_k w_k R(x . d_k), one value per diffusion direction.
inline Eigen::VectorXd synthesize_signal(const FiberConfiguration& config,
                                         const ResponseKernel& kernel,
                                         const std::vector<Direction>& gradient_directions) {
    config.validate();
    Eigen::VectorXd s(static_cast<int>(gradient_directions.size()));
    for (int i = 0; i < s.size(); ++i) {
        const Direction& x = gradient_directions[i];
        double v = 0.0;
        for (std::size_t k = 0; k < config.directions.size(); ++k)
            v += config.weights[k] * kernel(x.dot(config.directions[k]));
        s[i] = v;
    }
    return s;
}

inline Eigen::VectorXd synthesize_signal(const FiberConfiguration& config,
                                         const ResponseKernel& kernel,
                                         const GradientTable& gradients) {
    return synthesize_signal(config, kernel, gradients.diffusion_directions());
}

/// Rician corruption: out_i = sqrt((S_i + e1)^2 + e2^2) with e1, e2 ~
/// N(0, sigma^2), sigma = s0 / snr. Identical (seed, stream) gives identical
/// output regardless of call order.
inline Eigen::VectorXd add_rician_noise(const Eigen::VectorXd& signal, double s0, double snr,
                                        const CounterRng& rng) {
    require(snr > 0.0, "add_rician_noise: snr must be positive");
    const double sigma = s0 / snr;
    Eigen::VectorXd out(signal.size());
    for (int i = 0; i < signal.size(); ++i) {
        double g1, g2;
        rng.gaussian_pair(static_cast<std::uint64_t>(i), g1, g2);
        const double re = signal[i] + sigma * g1;
        const double im = sigma * g2;
        out[i] = std::sqrt(re * re + im * im);
    }
    return out;
}

inline Eigen::VectorXd add_rician_noise(const Eigen::VectorXd& signal, double s0, double snr,
                                        std::uint64_t seed) {
    return add_rician_noise(signal, s0, snr, CounterRng(seed, 0));
}

} // namespace fod

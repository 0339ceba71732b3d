#include <gtest/gtest.h>

#include "fodest/gradients.hpp"
#include "fodest/icosphere.hpp"
#include "fodest/signal.hpp"

using namespace fod;

TEST(SynthesizeSignal, AlignedAndPerpendicularGradients) {
    const ResponseKernel k = make_response_kernel(1.7e-3, 3e-4, 3000.0, 1.0, 8);
    const FiberConfiguration f = FiberConfiguration::equal_weight({{0, 0, 1}});
    const Eigen::VectorXd s = synthesize_signal(f, k, std::vector<Direction>{{0, 0, 1}, {1, 0, 0}});
    EXPECT_NEAR(s[0], std::exp(-3000.0 * 1.7e-3), 1e-14);
    EXPECT_NEAR(s[1], std::exp(-3000.0 * 3e-4), 1e-14);
}

TEST(SynthesizeSignal, LinearInWeights) {
    const ResponseKernel k = make_response_kernel(1.7e-3, 3e-4, 1000.0, 1.0, 8);
    const auto grads = make_design(40, 1000.0).diffusion_directions();
    const Direction d1{0, 0, 1};
    const Direction d2 = Direction{1, 0, 1}.normalized();
    const Eigen::VectorXd s1 = synthesize_signal(FiberConfiguration::equal_weight({d1}), k, grads);
    const Eigen::VectorXd s2 = synthesize_signal(FiberConfiguration::equal_weight({d2}), k, grads);
    FiberConfiguration mix;
    mix.directions = {d1, d2};
    mix.weights = {0.3, 0.7};
    const Eigen::VectorXd sm = synthesize_signal(mix, k, grads);
    EXPECT_LT((sm - (0.3 * s1 + 0.7 * s2)).cwiseAbs().maxCoeff(), 1e-14);
}

// dense-grid quadrature oracle with shrinking Watson-style bumps: the
// point-mass collapse of the convolution is the bump-width -> 0 limit
TEST(SynthesizeSignal, MatchesNarrowBumpQuadrature) {
    const ResponseKernel kernel = make_response_kernel(1.7e-3, 3e-4, 3000.0, 1.0, 8);
    const FiberConfiguration fibers =
        FiberConfiguration::equal_weight({Direction{std::sin(kPi / 8), 0, std::cos(kPi / 8)},
                                          Direction{-std::sin(kPi / 8), 0, std::cos(kPi / 8)}});
    const auto grads = make_design(40, 3000.0).diffusion_directions();
    const Eigen::VectorXd exact = synthesize_signal(fibers, kernel, grads);

    const SphericalGrid quad = icosphere_grid(6, GridMode::Vertices, Hemisphere::Full);
    auto bump_signal = [&](double kappa) {
        // weighted quadrature of Eq-style integral with Watson bumps around
        // each fiber axis
        std::vector<double> density(quad.size(), 0.0);
        double norm = 0.0;
        for (int j = 0; j < quad.size(); ++j) {
            double f = 0.0;
            for (std::size_t a = 0; a < fibers.directions.size(); ++a) {
                const double t = quad.directions[j].dot(fibers.directions[a]);
                f += fibers.weights[a] * std::exp(kappa * (t * t - 1.0));
            }
            density[j] = f;
            norm += quad.quadrature_weights[j] * f;
        }
        Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<int>(grads.size()));
        for (int i = 0; i < s.size(); ++i)
            for (int j = 0; j < quad.size(); ++j)
                s[i] += quad.quadrature_weights[j] * kernel(grads[i].dot(quad.directions[j])) *
                        density[j] / norm;
        return s;
    };

    double prev = std::numeric_limits<double>::infinity();
    for (double kappa : {200.0, 800.0, 3200.0}) {
        const double err = (bump_signal(kappa) - exact).cwiseAbs().maxCoeff() /
                           exact.cwiseAbs().maxCoeff();
        EXPECT_LT(err, prev) << "kappa=" << kappa;
        prev = err;
    }
    EXPECT_LT(prev, 1e-3);
}

TEST(RicianNoise, NoiselessLimit) {
    const Eigen::VectorXd s = Eigen::VectorXd::LinSpaced(50, 0.1, 1.0);
    const Eigen::VectorXd out = add_rician_noise(s, 1.0, 1e12, 7u);
    for (int i = 0; i < s.size(); ++i) EXPECT_NEAR(out[i] / s[i], 1.0, 1e-6);
}

TEST(RicianNoise, RayleighMeanAtZeroSignal) {
    const int n = 1'000'000;
    const double sigma = 0.05;
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
    const Eigen::VectorXd out = add_rician_noise(zero, 1.0, 1.0 / sigma, 123u);
    const double expected = sigma * std::sqrt(kPi / 2.0);
    EXPECT_NEAR(out.mean(), expected, 0.02 * expected);
}

TEST(RicianNoise, DeterministicGivenSeed) {
    const Eigen::VectorXd s = Eigen::VectorXd::LinSpaced(64, 0.05, 0.9);
    const Eigen::VectorXd a = add_rician_noise(s, 1.0, 50.0, 99u);
    const Eigen::VectorXd b = add_rician_noise(s, 1.0, 50.0, 99u);
    ASSERT_EQ(a.size(), b.size());
    for (int i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], b[i]);
    const Eigen::VectorXd c = add_rician_noise(s, 1.0, 50.0, 100u);
    EXPECT_NE(a[0], c[0]);
}

TEST(RicianNoise, RejectsNonpositiveSnr) {
    EXPECT_THROW(add_rician_noise(Eigen::VectorXd::Ones(4), 1.0, 0.0, 1u), std::invalid_argument);
}

TEST(FiberConfiguration, Validation) {
    FiberConfiguration f;
    EXPECT_THROW(f.validate(), std::invalid_argument);
    f.directions = {{0, 0, 1}};
    f.weights = {0.5};
    EXPECT_THROW(f.validate(), std::invalid_argument); // weights must sum to 1
    f.weights = {1.0};
    EXPECT_NO_THROW(f.validate());
}

#include <gtest/gtest.h>

#include "fodest/gradients.hpp"
#include "fodest/response.hpp"

using namespace fod;

TEST(ResponseShCoefficients, VanishingBLimit) {
    const auto r = response_sh_coefficients(1.7e-3, 3e-4, 1e-9, 2.0, 8);
    EXPECT_NEAR(r[0], 2.0 * std::sqrt(kFourPi), 1e-8);
    for (std::size_t i = 1; i < r.size(); ++i) EXPECT_NEAR(r[i], 0.0, 1e-8) << "l=" << 2 * i;
}

TEST(ResponseShCoefficients, IsotropicKernelHasOnlyLevelZero) {
    const auto r = response_sh_coefficients(8e-4, 8e-4, 3000.0, 1.0, 10);
    EXPECT_GT(r[0], 0.0);
    for (std::size_t i = 1; i < r.size(); ++i) EXPECT_NEAR(r[i], 0.0, 1e-12);
}

// refinement oracle: the default quadrature must already agree with a
// 65536-point evaluation
TEST(ResponseShCoefficients, QuadratureRefinementOracle) {
    const auto coarse = response_sh_coefficients(1.7e-3, 3e-4, 3000.0, 1.0, 16, 4096);
    const auto fine = response_sh_coefficients(1.7e-3, 3e-4, 3000.0, 1.0, 16, 65536);
    ASSERT_EQ(coarse.size(), fine.size());
    for (std::size_t i = 0; i < coarse.size(); ++i)
        EXPECT_NEAR(coarse[i], fine[i], 1e-9 * std::abs(fine[i]) + 1e-15) << "l=" << 2 * i;
}

TEST(ResponseShCoefficients, OddLevelsAbsentByConstruction) {
    // axially symmetric and antipodally even: only even levels are modeled
    const auto r = response_sh_coefficients(1.7e-3, 3e-4, 3000.0, 1.0, 12);
    EXPECT_EQ(static_cast<int>(r.size()), 7);
}

TEST(BuildRMatrix, ClosedFormAtLevelZero) {
    const RMatrix m = build_r_matrix(std::vector<double>{1.0}, 0);
    ASSERT_EQ(m.diag.size(), 1);
    EXPECT_NEAR(m.diag[0], std::sqrt(kFourPi), 1e-12); // ~3.5449
}

TEST(BuildRMatrix, BlockLayout) {
    const RMatrix m = build_r_matrix(std::vector<double>{2.0, 3.0, 4.0}, 4);
    ASSERT_EQ(m.diag.size(), 15);
    EXPECT_NEAR(m.diag[0], 2.0 * std::sqrt(kFourPi / 1.0), 1e-12);
    for (int i = 1; i <= 5; ++i) EXPECT_NEAR(m.diag[i], 3.0 * std::sqrt(kFourPi / 5.0), 1e-12);
    for (int i = 6; i <= 14; ++i) EXPECT_NEAR(m.diag[i], 4.0 * std::sqrt(kFourPi / 9.0), 1e-12);
}

TEST(BuildRMatrix, DecreasingBlocksForRealKernel) {
    const ResponseKernel k = make_response_kernel(1.7e-3, 3e-4, 3000.0, 1.0, 12);
    const RMatrix m = build_r_matrix(k, 12);
    for (int l = 2; l <= 12; l += 2)
        EXPECT_LT(std::abs(m.diag[sh_level_offset(l)]), std::abs(m.diag[sh_level_offset(l - 2)]))
            << "l=" << l;
}

TEST(BuildRMatrix, MissingLevels) {
    EXPECT_THROW(build_r_matrix(std::vector<double>{1.0, 0.5}, 6), std::invalid_argument);
}

namespace {

Eigen::VectorXd tensor_signals(const Eigen::Matrix3d& d, const GradientTable& t) {
    Eigen::VectorXd s(t.size());
    for (int i = 0; i < t.size(); ++i) {
        const Direction& g = t.directions[i];
        const Eigen::Vector3d x(g.x, g.y, g.z);
        s[i] = std::exp(-t.bvals[i] * x.dot(d * x));
    }
    return s;
}

} // namespace

TEST(EstimateResponse, IdenticalVoxelsGiveExactEigenvalues) {
    const GradientTable t = make_design(41, 3000.0);
    // FA of this tensor is 0.811, above the 0.8 single-fiber filter
    const Eigen::Matrix3d d = Eigen::Vector3d(1.8e-3, 3e-4, 3e-4).asDiagonal();
    std::vector<ResponseVoxel> voxels;
    for (int i = 0; i < 5; ++i) voxels.push_back({tensor_signals(d, t) * 100.0, 100.0});
    const ResponseKernel k = estimate_response(voxels, t, 12);
    EXPECT_NEAR(k.lambda_major, 1.8e-3, 1e-12);
    EXPECT_NEAR(k.lambda_minor, 3e-4, 1e-12);
    EXPECT_DOUBLE_EQ(k.s0, 1.0);
    EXPECT_DOUBLE_EQ(k.b, 3000.0);
}

TEST(EstimateResponse, IsotropicVoxelsFilteredOut) {
    const GradientTable t = make_design(41, 3000.0);
    const Eigen::Matrix3d fiber = Eigen::Vector3d(1.8e-3, 3e-4, 3e-4).asDiagonal();
    const Eigen::Matrix3d iso = Eigen::Vector3d(7e-4, 7e-4, 7e-4).asDiagonal();
    std::vector<ResponseVoxel> voxels;
    voxels.push_back({tensor_signals(fiber, t), 1.0});
    for (int i = 0; i < 10; ++i) voxels.push_back({tensor_signals(iso, t), 1.0});
    // isotropic voxels (FA ~ 0) are excluded, so the medians come from the
    // single anisotropic voxel alone
    const ResponseKernel k = estimate_response(voxels, t, 8);
    EXPECT_NEAR(k.lambda_major, 1.8e-3, 1e-10);
    EXPECT_NEAR(k.lambda_minor, 3e-4, 1e-10);
}

TEST(EstimateResponse, EmptyAfterFilterSignalsCaller) {
    const GradientTable t = make_design(41, 3000.0);
    const Eigen::Matrix3d iso = Eigen::Vector3d(7e-4, 7e-4, 7e-4).asDiagonal();
    std::vector<ResponseVoxel> voxels{{tensor_signals(iso, t), 1.0}};
    EXPECT_THROW(estimate_response(voxels, t, 8), std::runtime_error);
}

TEST(EstimateResponse, MinorRatioFilter) {
    const GradientTable t = make_design(41, 3000.0);
    // high FA but asymmetric minor eigenvalues beyond the 1.5 ratio
    const Eigen::Matrix3d bad = Eigen::Vector3d(2.5e-3, 6e-4, 1e-4).asDiagonal();
    std::vector<ResponseVoxel> voxels{{tensor_signals(bad, t), 1.0}};
    ASSERT_GT(fractional_anisotropy(bad), 0.8);
    EXPECT_THROW(estimate_response(voxels, t, 8), std::runtime_error);
    // explicit default thresholds: FA > 0.8, ratio < 1.5
    const Eigen::Matrix3d good = Eigen::Vector3d(1.8e-3, 3.5e-4, 2.5e-4).asDiagonal();
    voxels[0] = {tensor_signals(good, t), 1.0};
    const ResponseKernel k = estimate_response(voxels, t, 8, 0.8, 1.5);
    EXPECT_NEAR(k.lambda_minor, 3e-4, 1e-10); // average of the two smaller
}

#include <gtest/gtest.h>

#include "fodest/gradients.hpp"
#include "fodest/tensor.hpp"

using namespace fod;

namespace {

Eigen::VectorXd forward_signals(const DiffusionTensor& d, double s0, const GradientTable& t) {
    Eigen::VectorXd s(t.size());
    for (int i = 0; i < t.size(); ++i) {
        const Direction& g = t.directions[i];
        const Eigen::Vector3d x(g.x, g.y, g.z);
        s[i] = s0 * std::exp(-t.bvals[i] * x.dot(d * x));
    }
    return s;
}

} // namespace

TEST(SingleTensorFit, NoiselessRoundTrip) {
    const GradientTable t = make_design(41, 1000.0);
    DiffusionTensor d = Eigen::Vector3d(1.7e-3, 3e-4, 3e-4).asDiagonal();
    const DiffusionTensor fit = single_tensor_fit(forward_signals(d, 1.0, t), 1.0, t);
    EXPECT_LT((fit - d).cwiseAbs().maxCoeff(), 1e-10);

    // rotated anisotropic tensor
    const Eigen::AngleAxisd rot(0.9, Eigen::Vector3d(1, 2, 3).normalized());
    d = rot.toRotationMatrix() * d * rot.toRotationMatrix().transpose();
    const DiffusionTensor fit2 = single_tensor_fit(forward_signals(d, 1.0, t), 1.0, t);
    EXPECT_LT((fit2 - d).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(SingleTensorFit, IsotropicSignals) {
    const GradientTable t = make_design(40, 2000.0);
    const double diff = 7e-4;
    Eigen::VectorXd s(t.size());
    for (int i = 0; i < t.size(); ++i) s[i] = std::exp(-t.bvals[i] * diff);
    const DiffusionTensor fit = single_tensor_fit(s, 1.0, t);
    EXPECT_LT((fit - diff * Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SingleTensorFit, ConstantSignalGivesZeroTensor) {
    const GradientTable t = make_design(40, 1000.0);
    const Eigen::VectorXd s = Eigen::VectorXd::Constant(t.size(), 2.5);
    const DiffusionTensor fit = single_tensor_fit(s, 2.5, t);
    EXPECT_LT(fit.cwiseAbs().maxCoeff(), 1e-14);
}

TEST(SingleTensorFit, RejectsRankDeficientDesign) {
    GradientTable t;
    for (int i = 0; i < 8; ++i) {
        t.directions.push_back({0, 0, 1});
        t.bvals.push_back(1000.0);
    }
    EXPECT_THROW(single_tensor_fit(Eigen::VectorXd::Constant(8, 0.5), 1.0, t), std::invalid_argument);
}

TEST(SingleTensorFit, FloorsNonpositiveSignals) {
    const GradientTable t = make_design(40, 1000.0);
    Eigen::VectorXd s = forward_signals(Eigen::Vector3d(1.7e-3, 3e-4, 3e-4).asDiagonal(), 1.0, t);
    s[5] = 0.0;
    s[6] = -1.0;
    EXPECT_NO_THROW(single_tensor_fit(s, 1.0, t));
}

TEST(FractionalAnisotropy, KnownValues) {
    EXPECT_DOUBLE_EQ(fractional_anisotropy(5e-4 * Eigen::Matrix3d::Identity()), 0.0);
    EXPECT_NEAR(fractional_anisotropy(Eigen::Vector3d(1.7e-3, 3e-4, 3e-4).asDiagonal()), 0.7990,
                1e-3);
    EXPECT_DOUBLE_EQ(fractional_anisotropy(Eigen::Vector3d(1, 0, 0).asDiagonal()), 1.0);
    EXPECT_DOUBLE_EQ(fractional_anisotropy(Eigen::Matrix3d::Zero()), 0.0);
}

TEST(FractionalAnisotropy, ScaleInvariant) {
    const Eigen::AngleAxisd rot(0.4, Eigen::Vector3d(3, -1, 2).normalized());
    DiffusionTensor d = Eigen::Vector3d(1.3e-3, 5e-4, 2e-4).asDiagonal();
    d = rot.toRotationMatrix() * d * rot.toRotationMatrix().transpose();
    for (double c : {0.5, 2.0, 1e3}) {
        EXPECT_NEAR(fractional_anisotropy(c * d), fractional_anisotropy(d), 1e-12);
    }
}

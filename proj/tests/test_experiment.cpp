#include <gtest/gtest.h>

#include <Eigen/Geometry>

#include "fodest/config.hpp"
#include "fodest/experiment.hpp"

using namespace fod;

namespace {

SyntheticSetting table1_setting(double sep, double b, int n, int l_max, int l_max_super) {
    SyntheticSetting s;
    s.fibers = make_fiber_configuration(2, sep);
    s.gradient_directions = make_design(n, b).diffusion_directions();
    s.kernel = make_response_kernel(1.7e-3, 3e-4, b, 1.0, std::max(16, l_max_super));
    s.fit.l_max = l_max;
    s.fit.l_max_super = l_max_super;
    s.snr = 50.0;
    s.replicates = 100;
    s.seed = 42;
    return s;
}

} // namespace

TEST(FiberConfiguration, ThreeFiberPairwiseAngles) {
    for (double sep : {60.0, 90.0}) {
        const FiberConfiguration f = make_fiber_configuration(3, sep);
        ASSERT_EQ(f.directions.size(), 3u);
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j)
                EXPECT_NEAR(acute_angle_deg(f.directions[i], f.directions[j]), sep, 1e-9);
    }
}

TEST(FiberConfiguration, TwoFiberSeparation) {
    const FiberConfiguration f = make_fiber_configuration(2, 45.0);
    EXPECT_NEAR(acute_angle_deg(f.directions[0], f.directions[1]), 45.0, 1e-12);
}

TEST(RunExperiment, NoiselessSanity) {
    for (double sep : {45.0, 60.0, 90.0}) {
        SyntheticSetting s = table1_setting(sep, 3000.0, 41, 6, 12);
        s.snr = 1e12;
        s.replicates = 3;
        const auto reports = run_synthetic_experiment(s, {EstimatorKind::Bjs});
        const MetricsReport& r = reports.front().second;
        EXPECT_DOUBLE_EQ(r.detection_rate, 1.0) << "sep=" << sep;
        EXPECT_LE(r.rmsae, 2.0) << "sep=" << sep;
    }
}

TEST(RunExperiment, DeterministicAcrossRunsAndThreadCounts) {
    SyntheticSetting s = table1_setting(45.0, 3000.0, 41, 6, 12);
    s.replicates = 12;
    const auto a = run_synthetic_experiment(s, {EstimatorKind::Bjs, EstimatorKind::Shridge}, 1);
    const auto b = run_synthetic_experiment(s, {EstimatorKind::Bjs, EstimatorKind::Shridge}, 1);
    const auto c = run_synthetic_experiment(s, {EstimatorKind::Bjs, EstimatorKind::Shridge}, 2);
    for (std::size_t e = 0; e < a.size(); ++e) {
        EXPECT_EQ(a[e].second.detection_rate, b[e].second.detection_rate);
        EXPECT_EQ(a[e].second.detection_rate, c[e].second.detection_rate);
        if (a[e].second.n_correct > 0) {
            EXPECT_EQ(a[e].second.bias_sep, b[e].second.bias_sep);
            EXPECT_EQ(a[e].second.bias_sep, c[e].second.bias_sep);
            EXPECT_EQ(a[e].second.rmsae, c[e].second.rmsae);
        }
    }
}

TEST(RunExperiment, MetricsInvariantUnderJointRotation) {
    SyntheticSetting base = table1_setting(45.0, 3000.0, 41, 6, 12);
    base.replicates = 50;
    const auto ref = run_synthetic_experiment(base, {EstimatorKind::Bjs}).front().second;

    const CounterRng rng(2024, 0);
    for (int rot = 0; rot < 5; ++rot) {
        Eigen::Vector3d axis(rng.gaussian(3 * rot), rng.gaussian(3 * rot + 1),
                             rng.gaussian(3 * rot + 2));
        const Eigen::Matrix3d rotation =
            Eigen::AngleAxisd(0.3 + 0.5 * rot, axis.normalized()).toRotationMatrix();
        auto rotate = [&](const Direction& d) {
            const Eigen::Vector3d v = rotation * Eigen::Vector3d(d.x, d.y, d.z);
            return Direction{v[0], v[1], v[2]};
        };
        SyntheticSetting rotated = base;
        for (auto& d : rotated.fibers.directions) d = rotate(d);
        for (auto& d : rotated.gradient_directions) d = rotate(d);
        const auto rep = run_synthetic_experiment(rotated, {EstimatorKind::Bjs}).front().second;
        EXPECT_NEAR(rep.detection_rate, ref.detection_rate, 0.06) << "rotation " << rot;
        if (rep.n_correct > 0 && ref.n_correct > 0) {
            EXPECT_NEAR(rep.bias_sep, ref.bias_sep, 1.0) << "rotation " << rot;
            EXPECT_NEAR(rep.rmsae, ref.rmsae, 1.0) << "rotation " << rot;
        }
    }
}

TEST(RunExperiment, EstimatorFailuresCountAsDetectionFailures) {
    SyntheticSetting s = table1_setting(45.0, 3000.0, 41, 6, 12);
    s.replicates = 3;
    // a 12-point sharpening grid leaves the augmented system with fewer rows
    // than unknowns, so every BJS fit throws; the run must not crash
    s.dense_subdivision = 0;
    const auto reports = run_synthetic_experiment(s, {EstimatorKind::Bjs});
    EXPECT_DOUBLE_EQ(reports.front().second.detection_rate, 0.0);
    EXPECT_EQ(reports.front().second.n_correct, 0);
}

TEST(Benchmark, ThreadScaling) {
    if (std::thread::hardware_concurrency() < 4)
        GTEST_SKIP() << "thread-scaling check needs >= 4 hardware threads";
    SyntheticSetting s = table1_setting(45.0, 3000.0, 91, 10, 10);
    const auto results = benchmark_throughput(2000, s, {EstimatorKind::Bjs}, 4);
    EXPECT_GE(results[0].serial_seconds / results[0].parallel_seconds, 1.6);
}

TEST(Benchmark, RelativeOrdering) {
    SyntheticSetting s = table1_setting(45.0, 3000.0, 91, 10, 10);
    const auto results = benchmark_throughput(
        200, s, {EstimatorKind::Bjs, EstimatorKind::Shridge, EstimatorKind::Scsd}, 1);
    ASSERT_EQ(results.size(), 3u);
    const double bjs = results[0].serial_seconds;
    const double shridge = results[1].serial_seconds;
    const double scsd = results[2].serial_seconds;
    EXPECT_LT(bjs, shridge);
    EXPECT_LT(bjs, scsd);
}

TEST(ExperimentConfig, JsonRoundTripAndDefaults) {
    const nlohmann::json j = {{"name", "t1"},
                              {"fibers", 2},
                              {"separation_deg", 45.0},
                              {"b", 3000.0},
                              {"snr", 50.0},
                              {"n_gradients", 41},
                              {"l_max", 6},
                              {"l_max_super", 12},
                              {"replicates", 7},
                              {"seed", 9},
                              {"estimators", {"BJS", "SHridge"}}};
    const ExperimentConfig c = experiment_config_from_json(j);
    EXPECT_EQ(c.name, "t1");
    EXPECT_EQ(c.replicates, 7);
    ASSERT_EQ(c.estimators.size(), 2u);
    EXPECT_EQ(c.estimators[0], EstimatorKind::Bjs);
    EXPECT_DOUBLE_EQ(c.lambda_major, 1.7e-3); // default generator eigenvalues
    EXPECT_DOUBLE_EQ(c.lambda_minor, 3.0e-4);
    const SyntheticSetting s = to_setting(c);
    EXPECT_EQ(static_cast<int>(s.gradient_directions.size()), 41);
    EXPECT_EQ(s.fit.l_max, 6);

    const nlohmann::json multi = {{"settings", {j, j}}};
    EXPECT_EQ(experiment_configs_from_document(multi).size(), 2u);
}

TEST(ExperimentConfig, MetricsCsvShape) {
    ExperimentConfig c;
    c.name = "x";
    MetricsReport r;
    r.detection_rate = 0.5;
    r.n_correct = 50;
    r.mean_sep = 44.0;
    r.bias_sep = -1.0;
    r.bias_sep_se = 0.3;
    r.rmsae = 5.0;
    std::ostringstream out;
    write_metrics_csv(out, {{c, EstimatorKind::Bjs, r}});
    const std::string text = out.str();
    EXPECT_NE(text.find("name,estimator"), std::string::npos);
    EXPECT_NE(text.find("x,BJS,2,45,3000,50,41,6,12,100,42,0.5,50,44,-1,0.3,5,,"), std::string::npos);
}

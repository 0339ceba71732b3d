#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fodest/fodest.hpp"

namespace fs = std::filesystem;
using namespace fod;

namespace {

const std::string cli = FODEST_CLI_PATH;

int run(const std::string& args) {
    const std::string cmd = cli + " " + args + " >/dev/null 2>/dev/null";
    return std::system(cmd.c_str());
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path temp_dir() {
    static int counter = 0;
    fs::path d = fs::temp_directory_path() / ("fodest_cli_" + std::to_string(counter++));
    fs::create_directories(d);
    return d;
}

void write_fit_fixture(const fs::path& dir, int nx, int ny, int nz) {
    const GradientTable design = make_design(41, 3000.0);
    // bvecs / bvals with 6 leading b0 entries
    std::ofstream vecs(dir / "fix.bvecs"), vals(dir / "fix.bvals");
    for (int row = 0; row < 3; ++row) {
        for (int k = 0; k < 6; ++k) vecs << (k || row ? " " : "") << 0;
        for (const auto& d : design.directions)
            vecs << ' ' << (row == 0 ? d.x : row == 1 ? d.y : d.z);
        vecs << "\n";
    }
    for (int k = 0; k < 6; ++k) vals << (k ? " " : "") << 0;
    for (int i = 0; i < design.size(); ++i) vals << ' ' << 3000;
    vals << "\n";

    VolumeStack v;
    v.dims = {nx, ny, nz};
    v.frame_count = 6 + design.size();
    v.data.resize(v.voxels() * v.frame_count);
    const Eigen::Matrix3d d = Eigen::Vector3d(3e-4, 3e-4, 1.8e-3).asDiagonal();
    for (int f = 0; f < v.frame_count; ++f) {
        float value = 500.0f;
        if (f >= 6) {
            const Direction& g = design.directions[f - 6];
            const Eigen::Vector3d x(g.x, g.y, g.z);
            value = static_cast<float>(500.0 * std::exp(-3000.0 * x.dot(d * x)));
        }
        for (std::size_t i = 0; i < v.voxels(); ++i) v.data[f * v.voxels() + i] = value;
    }
    write_raw_volume((dir / "fix.f32").string(), (dir / "fix.f32.json").string(), v);

    VolumeStack mask;
    mask.dims = v.dims;
    mask.frame_count = 1;
    mask.data.assign(mask.voxels(), 1.0f);
    write_raw_volume((dir / "mask.f32").string(), (dir / "mask.f32.json").string(), mask);
}

} // namespace

TEST(Cli, VersionAndBadSubcommand) {
    EXPECT_EQ(run("--version"), 0);
    EXPECT_NE(run("frobnicate"), 0);
}

TEST(Cli, DesignAndGridExports) {
    const fs::path dir = temp_dir();
    EXPECT_EQ(run("design --n 41 --b 3000 --b0 6 --out-prefix " + (dir / "d").string()), 0);
    const GradientTable t =
        read_bvecs_bvals((dir / "d.bvecs").string(), (dir / "d.bvals").string());
    EXPECT_EQ(t.size(), 47);
    EXPECT_EQ(t.b0_indices().size(), 6u);
    EXPECT_EQ(t.diffusion_indices().size(), 41u);

    EXPECT_EQ(run("grid --subdivision 2 --mode face-centers --hemisphere upper --out " +
                  (dir / "g.csv").string()),
              0);
    const std::string grid = slurp(dir / "g.csv");
    EXPECT_EQ(std::count(grid.begin(), grid.end(), '\n'), 161); // header + 160
}

TEST(Cli, FitProducesOutputsAndManifest) {
    const fs::path dir = temp_dir();
    write_fit_fixture(dir, 3, 3, 2);
    const fs::path out = dir / "out";
    ASSERT_EQ(run("fit --volume " + (dir / "fix.f32").string() + " --bvecs " +
                  (dir / "fix.bvecs").string() + " --bvals " + (dir / "fix.bvals").string() +
                  " --mask " + (dir / "mask.f32").string() +
                  " --estimator bjs --lmax 6 --lmax-super 12 --threads 2 --out " + out.string()),
              0);
    EXPECT_TRUE(fs::exists(out / "coefficients.csv"));
    EXPECT_TRUE(fs::exists(out / "coefficients.fodc"));
    EXPECT_TRUE(fs::exists(out / "peaks.csv"));
    EXPECT_TRUE(fs::exists(out / "response.json"));

    std::ifstream mf(out / "manifest.json");
    nlohmann::json manifest;
    mf >> manifest;
    EXPECT_EQ(manifest.at("estimator"), "BJS");
    EXPECT_EQ(manifest.at("status_counts").at("ok"), 18);

    // every voxel found exactly one peak near +z
    std::ifstream peaks(out / "peaks.csv");
    std::string line;
    std::getline(peaks, line); // header
    int rows = 0;
    while (std::getline(peaks, line)) ++rows;
    EXPECT_EQ(rows, 18);

    const FodcFile fodc = [&] {
        std::ifstream f(out / "coefficients.fodc", std::ios::binary);
        return read_coefficients_fodc(f);
    }();
    EXPECT_EQ(fodc.l_max, 12);
    EXPECT_EQ(fodc.records.size(), 18u);
}

TEST(Cli, FitRejectsMismatchedMask) {
    const fs::path dir = temp_dir();
    write_fit_fixture(dir, 3, 3, 2);
    VolumeStack big;
    big.dims = {4, 4, 4};
    big.frame_count = 1;
    big.data.assign(big.voxels(), 1.0f);
    write_raw_volume((dir / "badmask.f32").string(), (dir / "badmask.f32.json").string(), big);
    EXPECT_NE(run("fit --volume " + (dir / "fix.f32").string() + " --bvecs " +
                  (dir / "fix.bvecs").string() + " --bvals " + (dir / "fix.bvals").string() +
                  " --mask " + (dir / "badmask.f32").string() + " --out " + (dir / "o").string()),
              0);
}

TEST(Cli, FitEmptyMaskSucceedsVacuously) {
    const fs::path dir = temp_dir();
    write_fit_fixture(dir, 3, 3, 2);
    VolumeStack empty;
    empty.dims = {3, 3, 2};
    empty.frame_count = 1;
    empty.data.assign(empty.voxels(), 0.0f);
    write_raw_volume((dir / "empty.f32").string(), (dir / "empty.f32.json").string(), empty);
    const fs::path out = dir / "out_empty";
    ASSERT_EQ(run("fit --volume " + (dir / "fix.f32").string() + " --bvecs " +
                  (dir / "fix.bvecs").string() + " --bvals " + (dir / "fix.bvals").string() +
                  " --mask " + (dir / "empty.f32").string() +
                  " --response " + [&] {
                      const auto k = make_response_kernel(1.7e-3, 3e-4, 3000.0, 1.0, 12);
                      const std::string p = (dir / "kernel.json").string();
                      save_kernel(p, k);
                      return p;
                  }() + " --lmax 6 --lmax-super 12 --out " + out.string()),
              0);
    std::ifstream mf(out / "manifest.json");
    nlohmann::json manifest;
    mf >> manifest;
    EXPECT_EQ(manifest.at("status_counts").at("ok"), 0);
    const std::string coeffs = slurp(out / "coefficients.csv");
    EXPECT_EQ(std::count(coeffs.begin(), coeffs.end(), '\n'), 1); // header only
}

TEST(Cli, SimulateByteIdenticalAcrossRunsAndThreads) {
    const fs::path dir = temp_dir();
    {
        std::ofstream cfg(dir / "sim.json");
        cfg << R"({"name":"tiny","fibers":2,"separation_deg":45,"b":3000,"snr":50,
                   "n_gradients":40,"l_max":6,"l_max_super":12,"replicates":8,"seed":7,
                   "estimators":["BJS","SHridge"]})";
    }
    const std::string base = "simulate --config " + (dir / "sim.json").string();
    ASSERT_EQ(run(base + " --threads 1 --out " + (dir / "m1.csv").string()), 0);
    ASSERT_EQ(run(base + " --threads 1 --out " + (dir / "m2.csv").string()), 0);
    ASSERT_EQ(run(base + " --threads 2 --out " + (dir / "m3.csv").string()), 0);
    const std::string a = slurp(dir / "m1.csv");
    EXPECT_FALSE(a.empty());
    EXPECT_EQ(a, slurp(dir / "m2.csv"));
    EXPECT_EQ(a, slurp(dir / "m3.csv"));
}

TEST(Cli, AnovaEndToEnd) {
    const fs::path dir = temp_dir();
    {
        std::ofstream csv(dir / "scores.csv");
        csv << "subject_id,score,handedness,gender\n";
        const CounterRng rng(3, 0);
        int id = 0;
        for (const char* h : {"left", "right"})
            for (const char* g : {"female", "male"})
                for (int k = 0; k < 6; ++k)
                    csv << ++id << ',' << 0.2 + 0.1 * rng.gaussian(id * 7 + k) << ',' << h << ','
                        << g << "\n";
    }
    ASSERT_EQ(run("anova --scores " + (dir / "scores.csv").string() + " --out " +
                  (dir / "anova.csv").string() + " --residuals " + (dir / "resid.csv").string()),
              0);
    const std::string table = slurp(dir / "anova.csv");
    EXPECT_NE(table.find("term,df,ss,ms,f,p"), std::string::npos);
    EXPECT_NE(table.find("handedness,1,"), std::string::npos);
    EXPECT_NE(table.find("residual,20,"), std::string::npos);
    const std::string resid = slurp(dir / "resid.csv");
    EXPECT_NE(resid.find("subject_id,residual"), std::string::npos);
    EXPECT_EQ(std::count(resid.begin(), resid.end(), '\n'), 25); // header + 24 subjects
}

TEST(Cli, SimulateSignalDump) {
    const fs::path dir = temp_dir();
    {
        std::ofstream cfg(dir / "sim.json");
        cfg << R"({"name":"dump","fibers":1,"separation_deg":0,"b":3000,"snr":50,
                   "n_gradients":40,"l_max":6,"l_max_super":12,"replicates":4,"seed":5,
                   "estimators":["BJS"]})";
    }
    ASSERT_EQ(run("simulate --config " + (dir / "sim.json").string() + " --out " +
                  (dir / "m.csv").string() + " --dump-signals " + (dir / "sig").string()),
              0);
    const std::string sig = slurp(dir / "sig_dump.csv");
    EXPECT_NE(sig.find("replicate,s0,"), std::string::npos);
    EXPECT_NE(sig.find("noiseless,"), std::string::npos);
    EXPECT_EQ(std::count(sig.begin(), sig.end(), '\n'), 6); // header + noiseless + 4 reps
}

TEST(Cli, MissingInputsFailNonzero) {
    EXPECT_NE(run("simulate --config /nonexistent.json --out /tmp/x.csv"), 0);
    EXPECT_NE(run("anova --scores /nonexistent.csv --out /tmp/x.csv"), 0);
}

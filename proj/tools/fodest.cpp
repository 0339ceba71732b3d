#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "fodest/fodest.hpp"

namespace fs = std::filesystem;
using namespace fod;

namespace {

struct FitCli {
    std::string volume, bvecs, bvals, mask, response, out = "fodest-out";
    std::string estimator = "bjs";
    int lmax = 10, lmax_super = 12, l0 = 4;
    double c = 2.0;
    int threads = 1;
    std::uint64_t seed = 0;
};

int run_fit(const FitCli& cli) {
    VolumeStack volume = read_volume_auto(cli.volume);
    GradientTable gradients = read_bvecs_bvals(cli.bvecs, cli.bvals);
    if (!cli.mask.empty()) {
        VolumeStack mask_vol = read_volume_auto(cli.mask);
        require(mask_vol.dims == volume.dims,
                "mask dimensions do not match the data volume");
        volume.mask = volume_to_mask(mask_vol);
    }

    BatchOptions options;
    options.estimator = estimator_from_name(cli.estimator);
    options.fit.l_max = cli.lmax;
    options.fit.l_max_super = cli.lmax_super;
    options.fit.l0 = cli.l0;
    options.fit.c = cli.c;
    options.threads = cli.threads;
    if (!cli.response.empty()) options.kernel = load_kernel(cli.response);

    const BatchResult result = run_batch_fit(volume, gradients, options);

    fs::create_directories(cli.out);
    {
        std::ofstream f(cli.out + "/coefficients.csv");
        write_coefficients_csv(f, estimator_name(options.estimator), result.coefficients_l_max,
                               result.coefficients);
    }
    {
        std::ofstream f(cli.out + "/coefficients.fodc", std::ios::binary);
        write_coefficients_fodc(f, result.coefficients_l_max, result.coefficients);
    }
    {
        std::ofstream f(cli.out + "/peaks.csv");
        write_peaks_csv(f, result.peaks);
    }
    save_kernel(cli.out + "/response.json", result.kernel);

    nlohmann::json cfg;
    cfg["estimator"] = estimator_name(options.estimator);
    cfg["l_max"] = cli.lmax;
    cfg["l_max_super"] = cli.lmax_super;
    cfg["l0"] = cli.l0;
    cfg["c"] = cli.c;
    RunManifest manifest;
    manifest.input_paths = {cli.volume, cli.bvecs, cli.bvals};
    if (!cli.mask.empty()) manifest.input_paths.push_back(cli.mask);
    manifest.config_hash = config_hash_hex(cfg);
    manifest.seed = cli.seed;
    manifest.estimator_tag = estimator_name(options.estimator);
    manifest.software_version = kVersion;
    manifest.wall_seconds = result.wall_seconds;
    manifest.status_counts = result.status_counts;
    {
        std::ofstream f(cli.out + "/manifest.json");
        f << manifest_to_json(manifest).dump(2) << "\n";
    }

    std::cerr << "fit: " << result.coefficients.size() << " voxels written";
    for (const auto& [k, v] : result.status_counts)
        if (v > 0) std::cerr << "  " << k << "=" << v;
    std::cerr << "\n";
    return 0;
}

int run_simulate(const std::string& config_path, const std::string& out_path, int threads,
                 const std::string& signals_prefix) {
    std::ifstream in(config_path);
    require(in.good(), "cannot open " + config_path);
    nlohmann::json doc;
    in >> doc;
    const auto configs = experiment_configs_from_document(doc);

    std::vector<std::tuple<ExperimentConfig, EstimatorKind, MetricsReport>> rows;
    for (const auto& cfg : configs) {
        const SyntheticSetting setting = to_setting(cfg);
        if (!signals_prefix.empty()) {
            std::ofstream sig(signals_prefix + "_" + cfg.name + ".csv");
            require(sig.good(), "cannot open signal dump for setting " + cfg.name);
            write_signals_csv(sig, setting);
        }
        const auto reports = run_synthetic_experiment(setting, cfg.estimators, threads);
        for (const auto& [kind, report] : reports) rows.emplace_back(cfg, kind, report);
    }

    std::ofstream out(out_path);
    require(out.good(), "cannot open " + out_path + " for writing");
    write_metrics_csv(out, rows);

    std::printf("%-16s %-8s %6s %9s %12s %8s\n", "setting", "estimator", "D.R.", "Bias.Sep",
                "(s.e.)", "RMSAE");
    for (const auto& [cfg, kind, r] : rows) {
        if (r.n_correct > 0)
            std::printf("%-16s %-8s %5.0f%% %9.2f %12.2f %8.2f\n", cfg.name.c_str(),
                        estimator_name(kind).c_str(), 100.0 * r.detection_rate, r.bias_sep,
                        r.bias_sep_se, r.rmsae);
        else
            std::printf("%-16s %-8s %5.0f%% %9s %12s %8s\n", cfg.name.c_str(),
                        estimator_name(kind).c_str(), 100.0 * r.detection_rate, "-", "-", "-");
    }
    return 0;
}

int run_bench(int voxels, int threads, int n_gradients, int lmax, int lmax_super, double b,
              double snr, const std::string& out_path) {
    SyntheticSetting setting;
    setting.fibers = make_fiber_configuration(2, 45.0);
    setting.gradient_directions = make_design(n_gradients, b).diffusion_directions();
    setting.kernel = make_response_kernel(1.7e-3, 3.0e-4, b, 1.0, std::max(lmax_super, lmax));
    setting.fit.l_max = lmax;
    setting.fit.l_max_super = lmax_super;
    setting.snr = snr;
    const auto results = benchmark_throughput(
        voxels, setting, {EstimatorKind::Bjs, EstimatorKind::Shridge, EstimatorKind::Scsd},
        threads);

    std::ofstream out;
    std::ostream* os = &std::cout;
    if (!out_path.empty()) {
        out.open(out_path);
        require(out.good(), "cannot open " + out_path + " for writing");
        os = &out;
    }
    *os << "estimator,n_voxels,threads,serial_seconds,parallel_seconds,serial_ms_per_voxel\n";
    for (const auto& r : results)
        *os << estimator_name(r.estimator) << ',' << r.n_voxels << ',' << r.threads << ','
            << format_double(r.serial_seconds) << ',' << format_double(r.parallel_seconds) << ','
            << format_double(1e3 * r.serial_seconds / r.n_voxels) << "\n";
    for (const auto& r : results)
        std::fprintf(stderr, "%-8s %d voxels: serial %.2fs (%.3f ms/voxel), %d threads %.2fs\n",
                     estimator_name(r.estimator).c_str(), r.n_voxels, r.serial_seconds,
                     1e3 * r.serial_seconds / r.n_voxels, r.threads, r.parallel_seconds);
    return 0;
}

int run_anova(const std::string& scores_path, const std::string& out_path,
              const std::string& residuals_path) {
    std::ifstream in(scores_path);
    require(in.good(), "cannot open " + scores_path);
    std::vector<double> scores;
    std::vector<std::string> subjects, handedness, gender;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> cols;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            cols.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) break;
            start = comma + 1;
        }
        require(cols.size() == 4, "anova: expected 4 columns (subject_id,score,handedness,gender)");
        if (first) {
            first = false;
            char* end = nullptr;
            std::strtod(cols[1].c_str(), &end);
            if (end == cols[1].c_str()) continue; // header row
        }
        subjects.push_back(cols[0]);
        scores.push_back(std::stod(cols[1]));
        handedness.push_back(cols[2]);
        gender.push_back(cols[3]);
    }
    const AnovaResult res = two_way_anova(scores, handedness, gender);

    if (!residuals_path.empty()) {
        std::ofstream rout(residuals_path);
        require(rout.good(), "cannot open " + residuals_path + " for writing");
        rout << "subject_id,residual\n";
        for (std::size_t k = 0; k < subjects.size(); ++k)
            rout << subjects[k] << ',' << format_double(res.residuals[k], "%.17g") << "\n";
    }

    auto print_term = [](std::ostream& os, const AnovaTerm& t, bool with_f) {
        os << t.name << ',' << t.df << ',' << format_double(t.ss) << ',' << format_double(t.ms);
        if (with_f)
            os << ',' << format_double(t.f) << ',' << format_double(t.p);
        else
            os << ",,";
        os << "\n";
    };
    std::ofstream out(out_path);
    require(out.good(), "cannot open " + out_path + " for writing");
    out << "term,df,ss,ms,f,p\n";
    print_term(out, res.handedness, true);
    print_term(out, res.gender, true);
    print_term(out, res.interaction, true);
    print_term(out, res.residual, false);

    std::printf("%-22s %4s %10s %10s %8s %8s\n", "", "d.f.", "SS", "MS", "F", "p");
    for (const AnovaTerm* t : {&res.handedness, &res.gender, &res.interaction})
        std::printf("%-22s %4d %10.4f %10.4f %8.3f %8.4f\n", t->name.c_str(), t->df, t->ss, t->ms,
                    t->f, t->p);
    std::printf("%-22s %4d %10.4f %10.4f\n", res.residual.name.c_str(), res.residual.df,
                res.residual.ss, res.residual.ms);
    std::printf("contrast %s - %s: %.4f  95%% CI (%.4f, %.4f)\n", res.handedness_levels[0].c_str(),
                res.handedness_levels[1].c_str(), res.contrast, res.contrast_lo, res.contrast_hi);
    return 0;
}

int run_grid(int subdivision, const std::string& mode, const std::string& hemisphere,
             const std::string& out_path) {
    const GridMode m = mode == "face-centers" ? GridMode::FaceCenters : GridMode::Vertices;
    const Hemisphere h = hemisphere == "upper" ? Hemisphere::Upper : Hemisphere::Full;
    const SphericalGrid grid = icosphere_grid(subdivision, m, h);
    std::ofstream out(out_path);
    require(out.good(), "cannot open " + out_path + " for writing");
    write_grid_csv(grid, out);
    std::cerr << "grid: " << grid.size() << " directions\n";
    return 0;
}

int run_design(int n, double b, int b0_count, const std::string& prefix) {
    const GradientTable table = make_design(n, b);
    std::ofstream vecs(prefix + ".bvecs"), vals(prefix + ".bvals");
    require(vecs.good() && vals.good(), "cannot open output files for " + prefix);
    for (int row = 0; row < 3; ++row) {
        for (int k = 0; k < b0_count; ++k) vecs << (k || row ? " " : "") << 0;
        for (int i = 0; i < table.size(); ++i) {
            const Direction& d = table.directions[i];
            vecs << ((i || b0_count) ? " " : "") << format_double(row == 0 ? d.x : row == 1 ? d.y : d.z, "%.17g");
        }
        vecs << "\n";
    }
    for (int k = 0; k < b0_count; ++k) vals << (k ? " " : "") << 0;
    for (int i = 0; i < table.size(); ++i) vals << ((i || b0_count) ? " " : "") << format_double(b);
    vals << "\n";
    std::cerr << "design: " << table.size() << " gradients + " << b0_count << " b0\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Voxelwise fiber orientation distribution estimation"};
    app.set_version_flag("--version", std::string(kVersion));
    app.require_subcommand(1);

    FitCli fit;
    auto* fit_cmd = app.add_subcommand("fit", "Batch voxelwise FOD fit over a masked volume");
    fit_cmd->add_option("--volume", fit.volume, "4-D data (.nii[.gz] or .raw/.f32 with .json sidecar)")->required();
    fit_cmd->add_option("--bvecs", fit.bvecs, "3 x n gradient direction file")->required();
    fit_cmd->add_option("--bvals", fit.bvals, "1 x n b-value file")->required();
    fit_cmd->add_option("--mask", fit.mask, "mask volume (nonzero = fit)");
    fit_cmd->add_option("--estimator", fit.estimator, "bjs | shridge | scsd")
        ->check(CLI::IsMember({"bjs", "shridge", "scsd"}));
    fit_cmd->add_option("--lmax", fit.lmax, "SH level of the deconvolution");
    fit_cmd->add_option("--lmax-super", fit.lmax_super, "SH level of the sharpened output");
    fit_cmd->add_option("--l0", fit.l0, "highest unshrunk level");
    fit_cmd->add_option("--c", fit.c, "shrinkage exponent");
    fit_cmd->add_option("--threads", fit.threads, "worker threads");
    fit_cmd->add_option("--seed", fit.seed, "recorded in the manifest");
    fit_cmd->add_option("--response", fit.response, "response kernel JSON (estimated when absent)");
    fit_cmd->add_option("--out", fit.out, "output directory");

    std::string sim_config, sim_out = "metrics.csv", sim_signals;
    int sim_threads = 1;
    auto* sim_cmd = app.add_subcommand("simulate", "Synthetic accuracy experiment");
    sim_cmd->add_option("--config", sim_config, "experiment JSON")->required();
    sim_cmd->add_option("--out", sim_out, "metrics CSV path");
    sim_cmd->add_option("--threads", sim_threads, "worker threads");
    sim_cmd->add_option("--dump-signals", sim_signals,
                        "prefix for per-setting replicate signal CSVs");

    int bench_voxels = 10000, bench_threads = 1, bench_n = 91, bench_lmax = 10, bench_lmax_super = 10;
    double bench_b = 3000.0, bench_snr = 50.0;
    std::string bench_out;
    auto* bench_cmd = app.add_subcommand("bench", "Estimator throughput benchmark");
    bench_cmd->add_option("--voxels", bench_voxels, "voxel count");
    bench_cmd->add_option("--threads", bench_threads, "worker threads");
    bench_cmd->add_option("--n-gradients", bench_n, "design size");
    bench_cmd->add_option("--lmax", bench_lmax, "SH level");
    bench_cmd->add_option("--lmax-super", bench_lmax_super, "sharpened SH level");
    bench_cmd->add_option("--b", bench_b, "b-value");
    bench_cmd->add_option("--snr", bench_snr, "signal-to-noise ratio");
    bench_cmd->add_option("--out", bench_out, "timing CSV path (stdout when absent)");

    std::string anova_scores, anova_out = "anova.csv", anova_residuals;
    auto* anova_cmd = app.add_subcommand("anova", "Two-way ANOVA of lateralization scores");
    anova_cmd->add_option("--scores", anova_scores, "CSV: subject_id,score,handedness,gender")->required();
    anova_cmd->add_option("--out", anova_out, "ANOVA table CSV path");
    anova_cmd->add_option("--residuals", anova_residuals, "per-subject residual CSV path");

    int grid_subdivision = 4;
    std::string grid_mode = "vertices", grid_hemisphere = "full", grid_out = "grid.csv";
    auto* grid_cmd = app.add_subcommand("grid", "Export an icosphere grid as CSV");
    grid_cmd->add_option("--subdivision", grid_subdivision, "0..6");
    grid_cmd->add_option("--mode", grid_mode, "vertices | face-centers")
        ->check(CLI::IsMember({"vertices", "face-centers"}));
    grid_cmd->add_option("--hemisphere", grid_hemisphere, "full | upper")
        ->check(CLI::IsMember({"full", "upper"}));
    grid_cmd->add_option("--out", grid_out, "CSV path");

    int design_n = 91, design_b0 = 0;
    double design_b = 3000.0;
    std::string design_prefix = "design";
    auto* design_cmd = app.add_subcommand("design", "Export a gradient design as bvecs/bvals");
    design_cmd->add_option("--n", design_n, "gradient count");
    design_cmd->add_option("--b", design_b, "b-value");
    design_cmd->add_option("--b0", design_b0, "number of leading b0 entries");
    design_cmd->add_option("--out-prefix", design_prefix, "output prefix");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*fit_cmd) return run_fit(fit);
        if (*sim_cmd) return run_simulate(sim_config, sim_out, sim_threads, sim_signals);
        if (*bench_cmd)
            return run_bench(bench_voxels, bench_threads, bench_n, bench_lmax, bench_lmax_super,
                             bench_b, bench_snr, bench_out);
        if (*anova_cmd) return run_anova(anova_scores, anova_out, anova_residuals);
        if (*grid_cmd) return run_grid(grid_subdivision, grid_mode, grid_hemisphere, grid_out);
        if (*design_cmd) return run_design(design_n, design_b, design_b0, design_prefix);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

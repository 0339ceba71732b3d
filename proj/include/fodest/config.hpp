#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "fodest/experiment.hpp"
#include "fodest/gradients.hpp"
#include "fodest/io.hpp"

namespace fod {

/// JSON-facing description of one synthetic setting; mirrors the fields of
/// the in-memory SyntheticSetting plus the generator tensor eigenvalues.
struct ExperimentConfig {
    std::string name = "setting";
    int fibers = 2;
    double separation_deg = 45.0;
    std::vector<double> weights; // empty = equal
    double b = 3000.0;
    double snr = 50.0;
    int n_gradients = 41;
    int l_max = 6;
    int l_max_super = 12;
    int replicates = 100;
    std::uint64_t seed = 42;
    std::vector<EstimatorKind> estimators{EstimatorKind::Bjs, EstimatorKind::Scsd,
                                          EstimatorKind::Shridge};
    double lambda_major = 1.7e-3;
    double lambda_minor = 3.0e-4;
    FitConfig fit_overrides; // l0, c, ridge grid, superCSD constants
    PeakOptions peaks;
    int dense_subdivision = 4;
};

inline ExperimentConfig experiment_config_from_json(const nlohmann::json& j) {
    ExperimentConfig c;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("name", c.name);
    get("fibers", c.fibers);
    get("separation_deg", c.separation_deg);
    get("weights", c.weights);
    get("b", c.b);
    get("snr", c.snr);
    get("n_gradients", c.n_gradients);
    get("l_max", c.l_max);
    get("l_max_super", c.l_max_super);
    get("replicates", c.replicates);
    get("seed", c.seed);
    get("lambda_major", c.lambda_major);
    get("lambda_minor", c.lambda_minor);
    if (j.contains("estimators")) {
        c.estimators.clear();
        for (const auto& s : j.at("estimators")) c.estimators.push_back(estimator_from_name(s));
    }
    get("l0", c.fit_overrides.l0);
    get("c", c.fit_overrides.c);
    get("scsd_tau", c.fit_overrides.scsd_tau);
    get("scsd_lambda", c.fit_overrides.scsd_lambda);
    get("scsd_max_iters", c.fit_overrides.scsd_max_iters);
    get("scsd_tau_relative", c.fit_overrides.scsd_tau_relative);
    if (j.contains("ridge_grid")) c.fit_overrides.ridge_grid = j.at("ridge_grid").get<std::vector<double>>();
    get("peak_rel_threshold", c.peaks.rel_threshold);
    get("peak_neighborhood_hops", c.peaks.neighborhood_hops);
    get("peak_max_peaks", c.peaks.max_peaks);
    get("peak_merge_angle_deg", c.peaks.merge_angle_deg);
    get("dense_subdivision", c.dense_subdivision);
    return c;
}

/// A config document is either one setting object or {"settings": [...]}.
inline std::vector<ExperimentConfig> experiment_configs_from_document(const nlohmann::json& j) {
    std::vector<ExperimentConfig> out;
    if (j.contains("settings"))
        for (const auto& s : j.at("settings")) out.push_back(experiment_config_from_json(s));
    else
        out.push_back(experiment_config_from_json(j));
    require(!out.empty(), "experiment config: no settings");
    return out;
}

inline SyntheticSetting to_setting(const ExperimentConfig& c) {
    SyntheticSetting s;
    s.fibers = make_fiber_configuration(c.fibers, c.separation_deg);
    if (!c.weights.empty()) {
        require(c.weights.size() == s.fibers.directions.size(),
                "experiment config: weights length must match fiber count");
        s.fibers.weights = c.weights;
        s.fibers.validate();
    }
    s.gradient_directions = make_design(c.n_gradients, c.b).diffusion_directions();
    const int kernel_l_max = std::max(c.l_max_super, c.l_max);
    s.kernel = make_response_kernel(c.lambda_major, c.lambda_minor, c.b, 1.0, kernel_l_max);
    s.fit = c.fit_overrides;
    s.fit.l_max = c.l_max;
    s.fit.l_max_super = c.l_max_super;
    s.peaks = c.peaks;
    s.snr = c.snr;
    s.replicates = c.replicates;
    s.seed = c.seed;
    s.dense_subdivision = c.dense_subdivision;
    return s;
}

/// Per-replicate signal export: the noiseless vector then one row per
/// replicate, keyed by replicate id, using the same noise streams as the
/// experiment harness.
inline void write_signals_csv(std::ostream& out, const SyntheticSetting& setting) {
    const Eigen::VectorXd clean =
        synthesize_signal(setting.fibers, setting.kernel, setting.gradient_directions);
    out << "replicate";
    for (int i = 0; i < clean.size(); ++i) out << ",s" << i;
    out << "\n";
    auto row = [&](const std::string& key, const Eigen::VectorXd& s) {
        out << key;
        for (int i = 0; i < s.size(); ++i) out << ',' << format_double(s[i], "%.17g");
        out << "\n";
    };
    row("noiseless", clean);
    for (int rep = 0; rep < setting.replicates; ++rep)
        row(std::to_string(rep),
            add_rician_noise(clean, setting.kernel.s0, setting.snr,
                             CounterRng(setting.seed, static_cast<std::uint64_t>(rep))));
}

/// One CSV row per (setting, estimator). Timing is deliberately excluded so
/// the file is byte-identical across reruns and thread counts.
inline void write_metrics_csv(std::ostream& out,
                              const std::vector<std::tuple<ExperimentConfig, EstimatorKind,
                                                           MetricsReport>>& rows) {
    out << "name,estimator,fibers,separation_deg,b,snr,n_gradients,l_max,l_max_super,replicates,"
           "seed,detection_rate,n_correct,mean_sep,bias_sep,bias_sep_se,rmsae,bias_sep2,bias_sep3\n";
    for (const auto& [cfg, kind, r] : rows) {
        out << cfg.name << ',' << estimator_name(kind) << ',' << cfg.fibers << ','
            << format_double(cfg.separation_deg) << ',' << format_double(cfg.b) << ','
            << format_double(cfg.snr) << ',' << cfg.n_gradients << ',' << cfg.l_max << ','
            << cfg.l_max_super << ',' << cfg.replicates << ',' << cfg.seed << ','
            << format_double(r.detection_rate) << ',' << r.n_correct << ',';
        auto opt = [&](double v) { return r.n_correct > 0 && std::isfinite(v) ? format_double(v) : std::string(); };
        out << opt(r.mean_sep) << ',' << opt(r.bias_sep) << ',' << opt(r.bias_sep_se) << ','
            << opt(r.rmsae) << ',';
        out << (r.bias_sep_pairs.size() > 1 ? opt(r.bias_sep_pairs[1]) : std::string()) << ','
            << (r.bias_sep_pairs.size() > 2 ? opt(r.bias_sep_pairs[2]) : std::string()) << "\n";
    }
}

} // namespace fod
